#pragma once

#include <vector>

#include "tracestokes/types.hpp"

namespace ts {

/// Nodes/weights for int_0^1 (1-t)^alpha f(t) dt, exact for f up to
/// degree 2n-1. Built from the Jacobi recurrence via Golub-Welsch, so
/// all weights are positive.
struct GaussJacobi1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussJacobi1D gauss_jacobi(int n, int alpha);

/// Quadrature on the reference triangle (0,0),(1,0),(0,1); weights sum
/// to 1/2. Conical product of 1D rules, exact for total degree <= 2n-1.
struct TriangleRule {
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;
};
TriangleRule triangle_rule(int degree);

/// Quadrature on the reference tet (0,0,0),(1,0,0),(0,1,0),(0,0,1);
/// weights sum to 1/6. Exact for total degree <= 2n-1.
struct TetRule {
  std::vector<Vec3> points;
  std::vector<double> weights;
};
TetRule tet_rule(int degree);

} // namespace ts
