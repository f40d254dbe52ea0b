#include "tracestokes/forms.hpp"

#include <atomic>
#include <fstream>
#include <thread>
#include <vector>

namespace ts {

namespace {

/// Run fn(0..count-1) on a worker pool. Each call writes only to its own
/// slot of a preallocated result vector, so results do not depend on the
/// schedule; callers merge them in index order afterwards.
template <class Fn>
void for_each_element(int count, const Fn& fn) {
  int workers = int(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (workers > 16) workers = 16;
  if (count < 4 * workers || workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

void merge_blocks(const DiscreteSpace& rows, const DiscreteSpace& cols,
                  const std::vector<Eigen::MatrixXd>& blocks,
                  SparseMatrix& out) {
  const int rl = rows.local_size(), rc = rows.components;
  const int cl = cols.local_size(), cc = cols.components;
  std::vector<Triplet> trip;
  trip.reserve(blocks.size() * rl * rc * cl * cc);
  for (size_t e = 0; e < blocks.size(); ++e) {
    const auto& rmap = rows.dof_map[e];
    const auto& cmap = cols.dof_map[e];
    const Eigen::MatrixXd& blk = blocks[e];
    for (int i = 0; i < rl; ++i)
      for (int a = 0; a < rc; ++a)
        for (int j = 0; j < cl; ++j)
          for (int b = 0; b < cc; ++b)
            trip.emplace_back(rmap[i] * rc + a, cmap[j] * cc + b,
                              blk(i * rc + a, j * cc + b));
  }
  out.resize(rows.total_dofs(), cols.total_dofs());
  out.setFromTriplets(trip.begin(), trip.end());
}

Vec3 band_normal(const LevelSet& phi, const Vec3& x) {
  const Vec3 g = phi.gradient(x);
  const double len = g.norm();
  if (len <= 1e-10)
    throw GeometryError("level-set gradient vanishes at a quadrature point");
  return g / len;
}

} // namespace

FormParameters default_parameters(double h, int velocity_degree) {
  FormParameters p;
  p.tau = 1.0 / (h * h);
  p.rho_p = h;
  if (velocity_degree == 2) {
    p.rho_u = 1.0 / h;
    p.consistent = true;
  } else {
    p.rho_u = h;
    p.consistent = false;
  }
  return p;
}

VelocityFormParts assemble_A_parts(const DiscreteSpace& vel,
                                   const CutSurface& cut,
                                   const BandQuadrature& bandq,
                                   const FormParameters& params) {
  if (vel.components != 3)
    throw UsageError("velocity form needs a 3-component space");
  const int nl = vel.local_size();
  const int ndof = 3 * nl;
  const int nelem = int(vel.band->cut_tets.size());
  const LevelSet& phi = cut.phi;

  std::vector<Eigen::MatrixXd> strain(nelem), mass(nelem), penalty(nelem),
      volume(nelem);

  for_each_element(nelem, [&](int e) {
    Eigen::MatrixXd st = Eigen::MatrixXd::Zero(ndof, ndof);
    Eigen::MatrixXd ma = Eigen::MatrixXd::Zero(ndof, ndof);
    Eigen::MatrixXd pe = Eigen::MatrixXd::Zero(ndof, ndof);
    Eigen::MatrixXd vo = Eigen::MatrixXd::Zero(ndof, ndof);

    cut.for_each_point(e, [&](const Vec3& x, double w) {
      const SurfaceFrame fr = eval_frame(phi, x);
      const BasisEval bas = eval_basis_unchecked(vel, e, x);
      std::array<Vec3, 10> t, Ht;
      for (int i = 0; i < nl; ++i) {
        t[i] = fr.P * bas.grad[i];
        if (params.consistent) Ht[i] = fr.H * t[i];
      }
      const double HH = params.consistent ? (fr.H * fr.H).trace() : 0.0;

      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j) {
          const double tt = t[i].dot(t[j]);
          const double NN = bas.value[i] * bas.value[j];
          for (int c = 0; c < 3; ++c)
            for (int d = 0; d < 3; ++d) {
              double s = fr.P(c, d) * tt + t[j][c] * t[i][d];
              if (params.consistent)
                s += -2.0 * bas.value[j] * fr.n[d] * Ht[i][c] -
                     2.0 * bas.value[i] * fr.n[c] * Ht[j][d] +
                     2.0 * NN * fr.n[c] * fr.n[d] * HH;
              st(3 * i + c, 3 * j + d) += w * s;
              if (c == d) ma(3 * i + c, 3 * j + d) += w * params.alpha * NN;
              pe(3 * i + c, 3 * j + d) +=
                  w * params.tau * NN * fr.n[c] * fr.n[d];
            }
        }
    });

    bandq.for_each_point(e, [&](const Vec3& x, double w) {
      const Vec3 n = band_normal(phi, x);
      const BasisEval bas = eval_basis_unchecked(vel, e, x);
      std::array<double, 10> dn;
      for (int i = 0; i < nl; ++i) dn[i] = bas.grad[i].dot(n);
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j) {
          const double v = w * params.rho_u * dn[i] * dn[j];
          for (int c = 0; c < 3; ++c) vo(3 * i + c, 3 * j + c) += v;
        }
    });

    strain[e] = std::move(st);
    mass[e] = std::move(ma);
    penalty[e] = std::move(pe);
    volume[e] = std::move(vo);
  });

  VelocityFormParts parts;
  merge_blocks(vel, vel, strain, parts.strain);
  merge_blocks(vel, vel, mass, parts.mass);
  merge_blocks(vel, vel, penalty, parts.penalty);
  merge_blocks(vel, vel, volume, parts.volume);
  return parts;
}

SparseMatrix assemble_A(const DiscreteSpace& vel, const CutSurface& cut,
                        const BandQuadrature& bandq,
                        const FormParameters& params) {
  VelocityFormParts parts = assemble_A_parts(vel, cut, bandq, params);
  SparseMatrix A = parts.strain;
  A += parts.mass;
  A += parts.penalty;
  A += parts.volume;
  return A;
}

SparseMatrix assemble_B(const DiscreteSpace& vel, const DiscreteSpace& pres,
                        const CutSurface& cut) {
  if (vel.components != 3 || pres.components != 1)
    throw UsageError("coupling form needs 3-component velocity, scalar pressure");
  if (vel.band != pres.band)
    throw UsageError("coupling form needs spaces over the same band");
  const int vl = vel.local_size();
  const int pl = pres.local_size();
  const int nelem = int(vel.band->cut_tets.size());
  const LevelSet& phi = cut.phi;

  std::vector<Eigen::MatrixXd> blocks(nelem);
  for_each_element(nelem, [&](int e) {
    Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(pl, 3 * vl);
    cut.for_each_point(e, [&](const Vec3& x, double w) {
      const SurfaceFrame fr = eval_frame(phi, x);
      const BasisEval pb = eval_basis_unchecked(pres, e, x);
      const BasisEval vb = eval_basis_unchecked(vel, e, x);
      for (int i = 0; i < pl; ++i) {
        const Vec3 tp = fr.P * pb.grad[i];
        for (int j = 0; j < vl; ++j)
          for (int c = 0; c < 3; ++c)
            blk(i, 3 * j + c) += w * vb.value[j] * tp[c];
      }
    });
    blocks[e] = std::move(blk);
  });

  SparseMatrix B;
  merge_blocks(pres, vel, blocks, B);
  return B;
}

SparseMatrix assemble_C(const DiscreteSpace& pres, const BandQuadrature& bandq,
                        const FormParameters& params) {
  if (pres.components != 1)
    throw UsageError("pressure stabilization needs a scalar space");
  const int pl = pres.local_size();
  const int nelem = int(pres.band->cut_tets.size());

  if (params.stabilization == PressureStab::None) {
    SparseMatrix C(pres.total_dofs(), pres.total_dofs());
    return C;
  }
  const bool full = params.stabilization == PressureStab::Full;
  const LevelSet& phi = pres.band->phi;

  std::vector<Eigen::MatrixXd> blocks(nelem);
  for_each_element(nelem, [&](int e) {
    Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(pl, pl);
    bandq.for_each_point(e, [&](const Vec3& x, double w) {
      const BasisEval pb = eval_basis_unchecked(pres, e, x);
      if (full) {
        for (int i = 0; i < pl; ++i)
          for (int j = 0; j < pl; ++j)
            blk(i, j) += w * params.rho_p * pb.grad[i].dot(pb.grad[j]);
      } else {
        const Vec3 n = band_normal(phi, x);
        std::array<double, 10> dn;
        for (int i = 0; i < pl; ++i) dn[i] = pb.grad[i].dot(n);
        for (int i = 0; i < pl; ++i)
          for (int j = 0; j < pl; ++j)
            blk(i, j) += w * params.rho_p * dn[i] * dn[j];
      }
    });
    blocks[e] = std::move(blk);
  });

  SparseMatrix C;
  merge_blocks(pres, pres, blocks, C);
  return C;
}

std::pair<SparseMatrix, SparseMatrix> assemble_mass(const DiscreteSpace& pres,
                                                    const CutSurface& cut,
                                                    const SparseMatrix& C) {
  if (pres.components != 1)
    throw UsageError("pressure mass needs a scalar space");
  const int pl = pres.local_size();
  const int nelem = int(pres.band->cut_tets.size());

  std::vector<Eigen::MatrixXd> blocks(nelem);
  for_each_element(nelem, [&](int e) {
    Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(pl, pl);
    cut.for_each_point(e, [&](const Vec3& x, double w) {
      const BasisEval pb = eval_basis_unchecked(pres, e, x);
      for (int i = 0; i < pl; ++i)
        for (int j = 0; j < pl; ++j)
          blk(i, j) += w * pb.value[i] * pb.value[j];
    });
    blocks[e] = std::move(blk);
  });

  SparseMatrix M0;
  merge_blocks(pres, pres, blocks, M0);
  SparseMatrix Mstar = M0 + C;
  return {std::move(M0), std::move(Mstar)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> assemble_rhs(
    const DiscreteSpace& vel, const DiscreteSpace& pres, const CutSurface& cut,
    const std::function<Vec3(const Vec3&)>& f,
    const std::function<double(const Vec3&)>& g) {
  const int vl = vel.local_size();
  const int pl = pres.local_size();
  const int nelem = int(vel.band->cut_tets.size());

  std::vector<Eigen::VectorXd> fblk(nelem), gblk(nelem);
  for_each_element(nelem, [&](int e) {
    Eigen::VectorXd fe = Eigen::VectorXd::Zero(3 * vl);
    Eigen::VectorXd ge = Eigen::VectorXd::Zero(pl);
    cut.for_each_point(e, [&](const Vec3& x, double w) {
      const Vec3 fx = f(x);
      const double gx = g(x);
      const BasisEval vb = eval_basis_unchecked(vel, e, x);
      const BasisEval pb = eval_basis_unchecked(pres, e, x);
      for (int j = 0; j < vl; ++j)
        for (int c = 0; c < 3; ++c) fe[3 * j + c] += w * vb.value[j] * fx[c];
      for (int i = 0; i < pl; ++i) ge[i] += w * pb.value[i] * gx;
    });
    fblk[e] = std::move(fe);
    gblk[e] = std::move(ge);
  });

  Eigen::VectorXd fv = Eigen::VectorXd::Zero(vel.total_dofs());
  Eigen::VectorXd gv = Eigen::VectorXd::Zero(pres.total_dofs());
  for (int e = 0; e < nelem; ++e) {
    const auto& vmap = vel.dof_map[e];
    const auto& pmap = pres.dof_map[e];
    for (int j = 0; j < vl; ++j)
      for (int c = 0; c < 3; ++c) fv[3 * vmap[j] + c] += fblk[e][3 * j + c];
    for (int i = 0; i < pl; ++i) gv[pmap[i]] += gblk[e][i];
  }
  return {std::move(fv), std::move(gv)};
}

void dump_matrix(const SparseMatrix& mat, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out.precision(17);
  for (int k = 0; k < mat.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(mat, k); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

} // namespace ts
