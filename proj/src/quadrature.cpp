#include "tracestokes/quadrature.hpp"

#include <cmath>

namespace ts {

// Golub-Welsch on the Jacobi matrix for weight (1-x)^alpha on [-1,1],
// then mapped to [0,1] with the weight renormalized to (1-t)^alpha.
GaussJacobi1D gauss_jacobi(int n, int alpha) {
  if (n < 1) throw UsageError("gauss_jacobi needs n >= 1");
  const double a = alpha, b = 0.0;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double diag;
    if (k == 0)
      diag = (b - a) / (a + b + 2.0);
    else {
      const double s = 2.0 * k + a + b;
      diag = (b * b - a * a) / (s * (s + 2.0));
    }
    J(k, k) = diag;
    if (k + 1 < n) {
      const double kk = k + 1;
      const double s = 2.0 * kk + a + b;
      const double beta = 4.0 * kk * (kk + a) * (kk + b) * (kk + a + b) /
                          (s * s * (s + 1.0) * (s - 1.0));
      J(k, k + 1) = J(k + 1, k) = std::sqrt(beta);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double beta0 = std::pow(2.0, a + b + 1.0) / (a + b + 1.0);
  GaussJacobi1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = es.eigenvalues()[i];
    const double w = beta0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    // [-1,1] with (1-x)^a  ->  [0,1] with (1-t)^a: t=(x+1)/2, dx=2dt,
    // (1-x)^a = (2(1-t))^a, so divide by 2^(a+1).
    rule.nodes[i] = 0.5 * (x + 1.0);
    rule.weights[i] = w / std::pow(2.0, a + 1.0);
  }
  return rule;
}

static int points_for_degree(int degree) { return degree / 2 + 1; }

TriangleRule triangle_rule(int degree) {
  const int n = points_for_degree(degree);
  const GaussJacobi1D gx = gauss_jacobi(n, 1);
  const GaussJacobi1D gy = gauss_jacobi(n, 0);
  TriangleRule rule;
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double xi = gx.nodes[i];
      const double eta = gy.nodes[j];
      rule.points.emplace_back(xi, eta * (1.0 - xi));
      rule.weights.push_back(gx.weights[i] * gy.weights[j]);
    }
  return rule;
}

TetRule tet_rule(int degree) {
  const int n = points_for_degree(degree);
  const GaussJacobi1D gx = gauss_jacobi(n, 2);
  const GaussJacobi1D gy = gauss_jacobi(n, 1);
  const GaussJacobi1D gz = gauss_jacobi(n, 0);
  TetRule rule;
  rule.points.reserve(n * n * n);
  rule.weights.reserve(n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double xi = gx.nodes[i];
        const double eta = gy.nodes[j];
        const double zeta = gz.nodes[k];
        rule.points.emplace_back(xi, eta * (1.0 - xi),
                                 zeta * (1.0 - xi) * (1.0 - eta));
        rule.weights.push_back(gx.weights[i] * gy.weights[j] * gz.weights[k]);
      }
  return rule;
}

} // namespace ts
