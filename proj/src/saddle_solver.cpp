#include "tracestokes/saddle_solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace ts {

namespace {

using Vec = Eigen::VectorXd;

struct BlockSystem {
  const AssembledSystem& sys;
  int n, m;

  explicit BlockSystem(const AssembledSystem& s)
      : sys(s), n(int(s.A.rows())), m(int(s.C.rows())) {}

  /// subtract the mean of the pressure block (keeps vectors orthogonal
  /// to the constant-pressure kernel of the operator)
  void project(Vec& v) const {
    const double mean = v.tail(m).sum() / m;
    v.tail(m).array() -= mean;
  }

  Vec apply(const Vec& v) const {
    Vec out(n + m);
    out.head(n) = sys.A * v.head(n) +
                  sys.B.transpose() * v.tail(m);
    out.tail(m) = sys.B * v.head(n) - sys.C * v.tail(m);
    project(out);
    return out;
  }
};

} // namespace

SaddleSolveResult solve_saddle(const AssembledSystem& sys, double tol,
                               int maxit) {
  BlockSystem K(sys);
  const int n = K.n, m = K.m;

  Vec b(n + m);
  b.head(n) = sys.f_vec;
  b.tail(m) = -sys.g_vec;
  K.project(b);
  const double bnorm = b.norm();

  SaddleSolveResult res;
  res.u_coeffs = Vec::Zero(n);
  res.p_coeffs = Vec::Zero(m);
  if (bnorm == 0.0) return res;

  Eigen::SimplicialLDLT<SparseMatrix> Afac(sys.A);
  if (Afac.info() != Eigen::Success)
    throw NumericError("factorization of the velocity block failed");
  Eigen::SimplicialLDLT<SparseMatrix> Mfac(sys.Mstar);
  if (Mfac.info() != Eigen::Success)
    throw NumericError("factorization of the pressure mass block failed");

  auto precond = [&](const Vec& v) {
    Vec pv = v;
    K.project(pv);
    Vec out(n + m);
    out.head(n) = Afac.solve(pv.head(n));
    out.tail(m) = Mfac.solve(pv.tail(m));
    K.project(out);
    return out;
  };

  Vec x = Vec::Zero(n + m);

  // preconditioned MINRES (Paige--Saunders recurrences)
  Vec v_old = Vec::Zero(n + m);
  Vec v = b;
  Vec z = precond(v);
  double gamma = std::sqrt(z.dot(v));
  if (!(gamma > 0.0))
    throw NumericError("preconditioner produced a nonpositive inner product");
  const double gamma_init = gamma;

  double eta = gamma;
  double s_old = 0.0, s_cur = 0.0, c_old = 1.0, c_cur = 1.0;
  Vec w_old = Vec::Zero(n + m), w_cur = Vec::Zero(n + m);
  double gamma_old = 1.0;

  int it = 0;
  double true_res = bnorm;
  double eta_target = tol * gamma_init;
  while (it < maxit) {
    ++it;
    z /= gamma;
    Vec Kz = K.apply(z);
    const double delta = z.dot(Kz);

    Vec v_new = Kz - (delta / gamma) * v;
    if (it > 1) v_new -= (gamma / gamma_old) * v_old;
    Vec z_new = precond(v_new);
    double gamma_new = std::sqrt(std::max(0.0, z_new.dot(v_new)));

    const double a0 = c_cur * delta - c_old * s_cur * gamma;
    const double a1 = std::sqrt(a0 * a0 + gamma_new * gamma_new);
    const double a2 = s_cur * delta + c_old * c_cur * gamma;
    const double a3 = s_old * gamma;
    if (!(a1 > 0.0)) break;

    c_old = c_cur;
    s_old = s_cur;
    c_cur = a0 / a1;
    s_cur = gamma_new / a1;

    Vec w_new = (z - a3 * w_old - a2 * w_cur) / a1;
    x += (c_cur * eta) * w_new;
    eta = -s_cur * eta;

    w_old = std::move(w_cur);
    w_cur = std::move(w_new);
    v_old = std::move(v);
    v = std::move(v_new);
    z = std::move(z_new);
    gamma_old = gamma;
    gamma = gamma_new;

    if (gamma == 0.0 || std::abs(eta) <= eta_target) {
      true_res = (b - K.apply(x)).norm();
      if (true_res <= tol * bnorm || gamma == 0.0) break;
      eta_target *= 0.1;
    }
  }

  true_res = (b - K.apply(x)).norm();
  if (true_res > tol * bnorm)
    throw NumericError("saddle solver stalled after " + std::to_string(it) +
                       " iterations with residual " +
                       std::to_string(true_res / bnorm) + " (relative)");

  res.u_coeffs = x.head(n);
  res.p_coeffs = x.tail(m);
  res.iterations = it;
  res.final_residual = true_res;

  // return the pressure with zero M0-weighted mean
  const Vec M0colsum = sys.M0 * Vec::Ones(m);
  const double wsum = M0colsum.sum();
  res.p_coeffs.array() -= M0colsum.dot(res.p_coeffs) / wsum;
  return res;
}

SaddleSolveResult solve_saddle_direct(const AssembledSystem& sys) {
  const int n = int(sys.A.rows());
  const int m = int(sys.C.rows());

  std::vector<Triplet> trip;
  trip.reserve(sys.A.nonZeros() + 2 * sys.B.nonZeros() + sys.C.nonZeros() +
               2 * m);
  for (int k = 0; k < sys.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.A, k); it; ++it)
      trip.emplace_back(int(it.row()), int(it.col()), it.value());
  for (int k = 0; k < sys.B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.B, k); it; ++it) {
      trip.emplace_back(n + int(it.row()), int(it.col()), it.value());
      trip.emplace_back(int(it.col()), n + int(it.row()), it.value());
    }
  for (int k = 0; k < sys.C.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.C, k); it; ++it)
      trip.emplace_back(n + int(it.row()), n + int(it.col()), -it.value());
  for (int i = 0; i < m; ++i) {
    trip.emplace_back(n + i, n + m, 1.0);
    trip.emplace_back(n + m, n + i, 1.0);
  }
  SparseMatrix K(n + m + 1, n + m + 1);
  K.setFromTriplets(trip.begin(), trip.end());

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m + 1);
  rhs.head(n) = sys.f_vec;
  rhs.segment(n, m) = -sys.g_vec;

  Eigen::SparseLU<SparseMatrix> lu(K);
  if (lu.info() != Eigen::Success)
    throw NumericError("direct factorization of the saddle system failed");
  Eigen::VectorXd x = lu.solve(rhs);

  SaddleSolveResult res;
  res.u_coeffs = x.head(n);
  res.p_coeffs = x.segment(n, m);
  res.iterations = 0;

  Eigen::VectorXd ru =
      sys.f_vec - sys.A * res.u_coeffs - sys.B.transpose() * res.p_coeffs;
  Eigen::VectorXd rp = -sys.g_vec - sys.B * res.u_coeffs + sys.C * res.p_coeffs;
  rp.array() -= rp.mean();
  res.final_residual = std::sqrt(ru.squaredNorm() + rp.squaredNorm());

  const Eigen::VectorXd M0colsum = sys.M0 * Eigen::VectorXd::Ones(m);
  res.p_coeffs.array() -= M0colsum.dot(res.p_coeffs) / M0colsum.sum();
  return res;
}

} // namespace ts
