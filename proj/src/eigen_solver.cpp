#include "tracestokes/eigen_solver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <random>

namespace ts {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Shared state of the sparse route: factorizations of A + tI (pattern
/// analyzed once, refactorized per shift) and of Mstar.
struct SchurContext {
  const AssembledSystem* sys;
  SparseMatrix Bt;
  SparseMatrix shifted;
  Eigen::SimplicialLDLT<SparseMatrix> Afac;
  Eigen::SimplicialLDLT<SparseMatrix> Mfac;
  double t = -1.0;
  bool has_C;

  explicit SchurContext(const AssembledSystem& s)
      : sys(&s), Bt(s.B.transpose()), has_C(s.C.nonZeros() > 0) {
    SparseMatrix ident(s.A.rows(), s.A.cols());
    ident.setIdentity();
    shifted = s.A + 0.0 * ident;
    Afac.analyzePattern(shifted);
    Mfac.compute(s.Mstar);
    if (Mfac.info() != Eigen::Success)
      throw NumericError("factorization of Mstar failed");
    factor(0.0);
  }

  void factor(double tnew) {
    if (tnew == t) return;
    SparseMatrix ident(sys->A.rows(), sys->A.cols());
    ident.setIdentity();
    shifted = sys->A + tnew * ident;
    Afac.factorize(shifted);
    if (Afac.info() != Eigen::Success)
      throw NumericError("factorization of the shifted velocity block failed");
    t = tnew;
  }

  Vec velocity_solve(const Vec& y) const { return Afac.solve(Bt * y); }

  Vec apply_S(const Vec& y) const {
    Vec out = sys->B * velocity_solve(y);
    if (has_C) out += sys->C * y;
    return out;
  }
};

struct RitzPair {
  double value = 0.0;
  Vec vector;
};

/// Extreme eigenpairs of S(t) y = lambda Mstar y with the constant mode
/// deflated. Lanczos on Mstar^-1 S in the Mstar inner product with full
/// reorthogonalization; Ritz values accepted on a residual bound, sharpened
/// by the gap estimate when the spectrum allows it.
std::vector<RitzPair> lanczos_pencil(const SchurContext& ctx, bool largest,
                                     int count, const Vec& hint, double rtol,
                                     int maxdim) {
  const int m = int(ctx.sys->Mstar.rows());
  const SparseMatrix& M = ctx.sys->Mstar;
  const int space = m - 1; // dimension after deflating constants
  count = std::min(count, space);
  maxdim = std::min(maxdim, space);
  if (count < 1) throw UsageError("pencil too small for a deflated solve");

  Vec cvec = Vec::Ones(m);
  Vec Mc = M * cvec;
  cvec /= std::sqrt(cvec.dot(Mc));
  Mc = M * cvec;

  std::mt19937 rng(12345);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_vec = [&] {
    Vec v(m);
    for (int i = 0; i < m; ++i) v[i] = gauss(rng);
    return v;
  };

  Mat V(m, maxdim);
  Mat MV(m, maxdim);
  std::vector<double> alpha, beta; // T diagonal / subdiagonal

  // start vector: hint if present, deflated and M-normalized
  Vec v = hint.size() == m ? hint : random_vec();
  for (int attempt = 0;; ++attempt) {
    v -= Mc.dot(v) * cvec;
    double nv = std::sqrt(std::max(0.0, v.dot(M * v)));
    if (nv > 1e-14) {
      v /= nv;
      break;
    }
    if (attempt > 3) throw NumericError("cannot start the pencil iteration");
    v = random_vec();
  }

  auto reorthogonalize = [&](Vec& u, int k) {
    for (int sweep = 0; sweep < 2; ++sweep) {
      u -= Mc.dot(u) * cvec;
      if (k > 0) u -= V.leftCols(k) * (MV.leftCols(k).transpose() * u);
    }
  };

  int k = 0;
  bool spanned = false; // no directions left outside span(V, constants)
  Eigen::SelfAdjointEigenSolver<Mat> small;
  while (true) {
    V.col(k) = v;
    MV.col(k) = M * v;
    Vec s = ctx.apply_S(v);
    double a = v.dot(s);
    alpha.push_back(a);
    Vec u = ctx.Mfac.solve(s);
    u -= a * v;
    if (k > 0) u -= beta[k - 1] * V.col(k - 1);
    reorthogonalize(u, k + 1);
    double b = std::sqrt(std::max(0.0, u.dot(M * u)));
    ++k;

    if (b <= 1e-12 && k < maxdim) {
      // invariant subspace found; continue in a fresh random direction
      u = random_vec();
      reorthogonalize(u, k);
      double nu = std::sqrt(std::max(0.0, u.dot(M * u)));
      if (nu > 1e-8) {
        u /= nu;
        b = 0.0;
      } else {
        spanned = true;
      }
    }
    beta.push_back(b);
    const bool exhausted = k >= maxdim || spanned;
    if (!exhausted) v = (b > 1e-12) ? Vec(u / b) : u;

    if (!exhausted && !(k >= count + 2 && k % 10 == 0)) continue;

    Mat T = Mat::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    small.compute(T);
    const Vec theta = small.eigenvalues(); // ascending
    std::vector<int> want;
    if (largest)
      want.push_back(k - 1);
    else
      for (int i = 0; i < std::min(count, k); ++i) want.push_back(i);

    bool all_ok = true;
    const double width = std::abs(theta[k - 1] - theta[0]) + 1e-300;
    for (int idx : want) {
      const double bound =
          std::abs(beta[k - 1] * small.eigenvectors()(k - 1, idx));
      const double scale = std::max(std::abs(theta[idx]), 1e-14 * width);
      double gap = width;
      for (int j = 0; j < k; ++j)
        if (j != idx) gap = std::min(gap, std::abs(theta[j] - theta[idx]));
      const bool ok = bound <= rtol * scale ||
                      (bound <= 1e-3 * width && gap > 0.0 &&
                       bound * bound / gap <= rtol * scale);
      if (!ok) all_ok = false;
    }
    // a basis of the whole deflated space carries exact Ritz values
    if (k >= space || spanned) all_ok = true;
    if (!all_ok && exhausted)
      throw NumericError("pencil eigensolver: no convergence within " +
                         std::to_string(k) + " Lanczos vectors");
    if (!all_ok) continue;

    std::vector<RitzPair> out;
    for (int idx : want) {
      RitzPair rp;
      rp.value = theta[idx];
      rp.vector = V.leftCols(k) * small.eigenvectors().col(idx);
      const double nv = std::sqrt(rp.vector.dot(M * rp.vector));
      if (nv > 0) rp.vector /= nv;
      out.push_back(std::move(rp));
    }
    return out;
  }
}

/// One eigenvalue of the perturbed pencil: Newton iteration on
/// g(lambda) = mu(eps*lambda) - lambda, where mu(t) is the matching
/// eigenvalue of the t-shifted pencil and mu'(t) = -|x|^2 / |y|_M^2 with
/// x the eliminated velocity component.
double perturbed_eigenvalue(SchurContext& ctx, double epsilon, bool largest,
                            int index, Vec& y_warm, double rtol) {
  double lambda = 0.0;
  double t = 0.0;
  for (int pass = 0; pass < 12; ++pass) {
    ctx.factor(t);
    auto pairs =
        lanczos_pencil(ctx, largest, largest ? 1 : index + 1, y_warm,
                       std::min(rtol, 1e-9), 800);
    const RitzPair& rp = largest ? pairs.front() : pairs[index];
    const double mu = rp.value;
    y_warm = rp.vector;

    const Vec x = ctx.velocity_solve(rp.vector);
    const double dmu_dt = -x.squaredNorm(); // vector is M-normalized
    const double denom = 1.0 - epsilon * dmu_dt;
    const double lambda_new = lambda + (mu - lambda) / denom;

    if (pass > 0 && std::abs(lambda_new - lambda) <=
                        rtol * std::max(std::abs(lambda_new), 1e-300)) {
      return lambda_new;
    }
    lambda = lambda_new;
    t = epsilon * lambda;
  }
  throw NumericError("perturbed-pencil fixed point did not settle");
}

Mat dense_schur(const AssembledSystem& sys) {
  const int m = int(sys.C.rows());
  Eigen::SimplicialLDLT<SparseMatrix> Afac(sys.A);
  if (Afac.info() != Eigen::Success)
    throw NumericError("factorization of the velocity block failed");
  SparseMatrix Bt = sys.B.transpose();
  Mat S(m, m);
  Vec col(sys.A.rows());
  for (int j = 0; j < m; ++j) {
    col = Bt.col(j);
    S.col(j) = sys.B * Afac.solve(col);
  }
  S += Mat(sys.C);
  S = (0.5 * (S + S.transpose())).eval();
  return S;
}

} // namespace

EigenResult infsup_dense(const AssembledSystem& sys, int dense_cap) {
  const int m = int(sys.C.rows());
  if (m > dense_cap)
    throw ConfigError("pressure dimension " + std::to_string(m) +
                      " exceeds the dense cap " + std::to_string(dense_cap) +
                      "; use the sparse route");
  const Mat S = dense_schur(sys);
  const Mat M = Mat(sys.Mstar);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(S, M);
  if (ges.info() != Eigen::Success)
    throw NumericError("dense generalized eigensolve failed");
  const Vec ev = ges.eigenvalues();

  EigenResult r;
  r.lambda_list.assign(ev.data(), ev.data() + m);
  r.lambda1 = ev[0];
  r.lambda2 = m > 1 ? ev[1] : ev[0];
  r.lambda_m = ev[m - 1];
  r.method = "dense";
  r.lambda1_vector = ges.eigenvectors().col(0);
  return r;
}

EigenResult infsup_sparse(const AssembledSystem& sys, double epsilon,
                          int n_small) {
  if (!(epsilon > 0.0) || epsilon > 1e-3)
    throw ConfigError("perturbation epsilon must lie in (0, 1e-3]");
  const int m = int(sys.C.rows());
  SchurContext ctx(sys);

  EigenResult r;
  r.epsilon = epsilon;
  r.method = "sparse-perturbed";

  // constant mode: exact kernel direction of S, Rayleigh quotient only
  Vec ones = Vec::Ones(m);
  const double mass = ones.dot(sys.Mstar * ones);
  r.lambda1 = ones.dot(ctx.apply_S(ones)) / mass;
  r.lambda1_vector = ones / std::sqrt(mass);

  n_small = std::max(1, std::min(n_small, m - 2));
  const double rtol = 1e-9;

  std::vector<double> smalls;
  Vec warm;
  for (int idx = 0; idx < n_small; ++idx) {
    Vec y = warm;
    smalls.push_back(perturbed_eigenvalue(ctx, epsilon, false, idx, y, rtol));
    if (idx == 0) warm = y;
  }
  Vec ylarge;
  const double lam_m = perturbed_eigenvalue(ctx, epsilon, true, 0, ylarge, rtol);

  r.lambda2 = smalls.front();
  r.lambda_m = lam_m;
  r.lambda_list.push_back(r.lambda1);
  for (double v : smalls) r.lambda_list.push_back(v);
  r.lambda_list.push_back(lam_m);
  std::sort(r.lambda_list.begin(), r.lambda_list.end());
  return r;
}

Eigen::VectorXd perturbed_pencil_dense(const AssembledSystem& sys,
                                       double epsilon) {
  const int n = int(sys.A.rows());
  const int m = int(sys.C.rows());
  Mat K = Mat::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = Mat(sys.A);
  K.topRightCorner(n, m) = Mat(SparseMatrix(sys.B.transpose()));
  K.bottomLeftCorner(m, n) = Mat(sys.B);
  K.bottomRightCorner(m, m) = -Mat(sys.C);

  Mat M = Mat::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = epsilon * Mat::Identity(n, n);
  M.bottomRightCorner(m, m) = Mat(sys.Mstar);

  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(K, M,
                                                    Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success)
    throw NumericError("dense perturbed-pencil eigensolve failed");
  Vec lambda = -ges.eigenvalues();
  std::sort(lambda.data(), lambda.data() + lambda.size());
  return lambda;
}

} // namespace ts
