#pragma once

#include "tracestokes/cut_surface.hpp"
#include "tracestokes/fe_space.hpp"

namespace ts {

/// Closed-form reference fields on the unit sphere: the tangential
/// projection of (-z^2, y, x) as velocity and x y^2 + z as pressure,
/// extended off the surface by evaluating the formulas as written. The
/// force and source are defined by the strong operator,
///   f = -2 P div_G(E(u)) + alpha u + P grad p,   g = div_G u,
/// with every derivative, including those of the projector itself, taken
/// by nested forward-mode differentiation, so they are exact to rounding.
/// f and g evaluate at the closest surface point, which realizes the
/// normal-constant extension on quadrature points of the discrete surface.
struct ManufacturedSolution {
  LevelSet phi;
  double alpha = 1.0;

  Vec3 u(const Vec3& x) const;
  double p(const Vec3& x) const;
  Vec3 f(const Vec3& x) const;
  double g(const Vec3& x) const;
};

ManufacturedSolution sphere_solution();

struct ErrorReport {
  double h1_u = 0.0;  // tangential H1 norm of the tangential velocity error
  double l2_u = 0.0;  // surface L2 norm of the tangential velocity error
  double l2_p = 0.0;  // surface L2 norm of the mean-corrected pressure error
  double l2_un = 0.0; // surface L2 norm of the discrete normal component
};

/// Quadrature of the error norms over the discrete surface. The velocity
/// errors compare the exact field with the tangential part P u_h; the
/// pressure error subtracts the mean of the difference first; l2_un
/// measures the normal component of u_h alone.
ErrorReport compute_errors(const FEFunction& u_h, const FEFunction& p_h,
                           const ManufacturedSolution& exact,
                           const CutSurface& cut);

} // namespace ts
