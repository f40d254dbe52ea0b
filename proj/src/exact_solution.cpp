#include "tracestokes/exact_solution.hpp"

#include "tracestokes/dual.hpp"

namespace ts {

namespace {

template <class T>
using V3 = std::array<T, 3>;

template <class T>
V3<T> u_field(const V3<T>& x) {
  const T r = dual_sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  const V3<T> n = {x[0] / r, x[1] / r, x[2] / r};
  const V3<T> ut = {T(0.0) - x[2] * x[2], x[1], x[0]};
  const T un = n[0] * ut[0] + n[1] * ut[1] + n[2] * ut[2];
  return {ut[0] - un * n[0], ut[1] - un * n[1], ut[2] - un * n[2]};
}

template <class T>
T p_field(const V3<T>& x) {
  return x[0] * x[1] * x[1] + x[2];
}

struct Frame {
  Vec3 n;
  Mat3 P;
  Mat3 Dn; // Jacobian of the normal field, (i,k) = dn_i/dx_k
};

Frame frame_with_jacobian(const LevelSet& phi, const Vec3& x) {
  const Vec3 g = phi.gradient(x);
  const double len = g.norm();
  if (len <= 1e-10)
    throw GeometryError("level-set gradient vanishes at an evaluation point");
  Frame f;
  f.n = g / len;
  f.P = Mat3::Identity() - f.n * f.n.transpose();
  f.Dn = f.P * phi.hessian(x) / len;
  return f;
}

} // namespace

Vec3 ManufacturedSolution::u(const Vec3& x) const {
  const V3<double> p = {x[0], x[1], x[2]};
  const V3<double> v = u_field(p);
  return Vec3(v[0], v[1], v[2]);
}

double ManufacturedSolution::p(const Vec3& x) const {
  return p_field(V3<double>{x[0], x[1], x[2]});
}

double ManufacturedSolution::g(const Vec3& x) const {
  const Vec3 y = project_to_surface(phi, x);
  const auto xs = seed1(y.data());
  const V3<Dual1> U = u_field(xs);
  const Frame fr = frame_with_jacobian(phi, y);
  double div = 0.0;
  for (int b = 0; b < 3; ++b)
    for (int c = 0; c < 3; ++c) div += U[b].der[c] * fr.P(c, b);
  return div;
}

Vec3 ManufacturedSolution::f(const Vec3& x) const {
  const Vec3 y = project_to_surface(phi, x);
  const auto xs = seed2(y.data());
  const V3<Dual2> U = u_field(xs);
  const Dual2 Pr = p_field(xs);

  Vec3 uval;
  Mat3 du;
  double d2u[3][3][3];
  for (int i = 0; i < 3; ++i) {
    uval[i] = U[i].val.val;
    for (int j = 0; j < 3; ++j) {
      du(i, j) = U[i].val.der[j];
      for (int k = 0; k < 3; ++k) d2u[i][j][k] = U[i].der[j].der[k];
    }
  }
  Vec3 dp;
  for (int j = 0; j < 3; ++j) dp[j] = Pr.val.der[j];

  const Frame fr = frame_with_jacobian(phi, y);
  const Mat3& P = fr.P;
  const Vec3& n = fr.n;
  const Mat3& Dn = fr.Dn;

  // dP(i,j,k) = dP_ij/dx_k
  double dP[3][3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        dP[i][j][k] = -(Dn(i, k) * n[j] + n[i] * Dn(j, k));

  // T = P du P and its derivative by the product rule
  const Mat3 duP = du * P;
  const Mat3 Pdu = P * du;
  double dT[3][3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        double s = 0.0;
        for (int a = 0; a < 3; ++a) {
          s += dP[i][a][k] * duP(a, j);
          s += Pdu(i, a) * dP[a][j][k];
          double m = 0.0;
          for (int b = 0; b < 3; ++b) m += d2u[a][b][k] * P(b, j);
          s += P(i, a) * m;
        }
        dT[i][j][k] = s;
      }

  // divergence of E = sym(T) contracted with the projector
  Vec3 divE = Vec3::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        divE[i] += P(j, k) * 0.5 * (dT[i][j][k] + dT[j][i][k]);

  return -2.0 * (P * divE) + alpha * uval + P * dp;
}

ManufacturedSolution sphere_solution() {
  ManufacturedSolution sol;
  sol.phi = LevelSet::sphere();
  return sol;
}

ErrorReport compute_errors(const FEFunction& u_h, const FEFunction& p_h,
                           const ManufacturedSolution& exact,
                           const CutSurface& cut) {
  const DiscreteSpace& vel = *u_h.space;
  const DiscreteSpace& pres = *p_h.space;
  if (vel.components != 3 || pres.components != 1)
    throw UsageError("compute_errors needs vector velocity, scalar pressure");

  double l2u2 = 0.0, grad2 = 0.0, un2 = 0.0;
  double ep_int = 0.0, ep2_int = 0.0, area = 0.0;

  const int nelem = int(vel.band->cut_tets.size());
  for (int e = 0; e < nelem; ++e) {
    const auto& vmap = vel.dof_map[e];
    const auto& pmap = pres.dof_map[e];
    const int vl = vel.local_size();
    const int pl = pres.local_size();
    cut.for_each_point(e, [&](const Vec3& x, double w) {
      const Frame fr = frame_with_jacobian(exact.phi, x);

      const auto xs = seed1(x.data());
      const V3<Dual1> U = u_field(xs);
      Vec3 ustar;
      Mat3 dustar;
      for (int i = 0; i < 3; ++i) {
        ustar[i] = U[i].val;
        for (int j = 0; j < 3; ++j) dustar(i, j) = U[i].der[j];
      }
      const double pstar = p_field(V3<double>{x[0], x[1], x[2]});

      const BasisEval vb = eval_basis_unchecked(vel, e, x);
      Vec3 uh = Vec3::Zero();
      Mat3 duh = Mat3::Zero();
      for (int i = 0; i < vl; ++i)
        for (int c = 0; c < 3; ++c) {
          const double coef = u_h.coeffs[3 * vmap[i] + c];
          uh[c] += coef * vb.value[i];
          duh.row(c) += coef * vb.grad[i].transpose();
        }
      const BasisEval pb = eval_basis_unchecked(pres, e, x);
      double ph = 0.0;
      for (int i = 0; i < pl; ++i) ph += p_h.coeffs[pmap[i]] * pb.value[i];

      // Jacobian of the projected field P u_h
      const double nu = fr.n.dot(uh);
      const Mat3 dPu =
          fr.P * duh - nu * fr.Dn - fr.n * (fr.Dn.transpose() * uh).transpose();

      const Vec3 eT = ustar - fr.P * uh;
      const Mat3 gT = fr.P * (dustar - dPu) * fr.P;

      l2u2 += w * eT.squaredNorm();
      grad2 += w * gT.squaredNorm();
      un2 += w * nu * nu;
      const double ep = pstar - ph;
      ep_int += w * ep;
      ep2_int += w * ep * ep;
      area += w;
    });
  }

  ErrorReport rep;
  rep.l2_u = std::sqrt(l2u2);
  rep.h1_u = std::sqrt(l2u2 + grad2);
  rep.l2_un = std::sqrt(un2);
  const double mean = ep_int / area;
  rep.l2_p = std::sqrt(std::max(0.0, ep2_int - mean * mean * area));
  return rep;
}

} // namespace ts
