#pragma once

#include "tracestokes/types.hpp"

namespace ts {

/// Implicit surface description. Two base shapes are supported, each
/// optionally translated by alpha * s (evaluation at x delegates to the
/// base formula at x - alpha*s):
///   sphere:  phi(x) = |x|^2 - 1
///   torus:   phi(x) = (|x|^2 + R^2 - r^2)^2 - 4 R^2 (x1^2 + x2^2)
struct LevelSet {
  enum class Kind { Sphere, Torus };

  Kind kind = Kind::Sphere;
  double R = 1.0;
  double r = 0.2;
  Vec3 shift_dir = Vec3::Zero();
  double shift_amount = 0.0;

  static LevelSet sphere();
  static LevelSet torus(double R = 1.0, double r = 0.2);
  /// Same zero set translated by alpha * s; s must be a unit vector.
  LevelSet shifted(const Vec3& s, double alpha) const;

  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  Mat3 hessian(const Vec3& x) const;

  /// Exact surface area of the zero set (4*pi resp. 4*pi^2*R*r).
  double exact_area() const;
};

/// Pointwise geometric data of the implicit surface: unit normal,
/// tangential projector and Weingarten map. H is the tangentially
/// projected Jacobian of the normal field, P (grad n) P, which is
/// symmetric and annihilates n by construction; for the sphere it
/// equals P/|x|.
struct SurfaceFrame {
  Vec3 n;
  Mat3 P;
  Mat3 H;
};

/// Frame from exact closed-form derivatives of phi.
/// Throws GeometryError when the gradient is shorter than 1e-10.
SurfaceFrame eval_frame(const LevelSet& phi, const Vec3& x);

/// Closest-point style projection onto the zero set by damped Newton
/// steps x <- x - phi(x) grad/|grad|^2. Converges in one or two steps
/// for points already O(h^2) close. Throws GeometryError after 10
/// unsuccessful iterations.
Vec3 project_to_surface(const LevelSet& phi, const Vec3& x);

} // namespace ts
