#include "tracestokes/level_set.hpp"

#include <cmath>

namespace ts {

LevelSet LevelSet::sphere() {
  LevelSet phi;
  phi.kind = Kind::Sphere;
  return phi;
}

LevelSet LevelSet::torus(double R, double r) {
  LevelSet phi;
  phi.kind = Kind::Torus;
  phi.R = R;
  phi.r = r;
  return phi;
}

LevelSet LevelSet::shifted(const Vec3& s, double alpha) const {
  LevelSet phi = *this;
  phi.shift_dir = s;
  phi.shift_amount = alpha;
  return phi;
}

double LevelSet::value(const Vec3& x) const {
  const Vec3 y = x - shift_amount * shift_dir;
  if (kind == Kind::Sphere) return y.squaredNorm() - 1.0;
  const double u = y.squaredNorm();
  const double K = R * R - r * r;
  return (u + K) * (u + K) - 4.0 * R * R * (y[0] * y[0] + y[1] * y[1]);
}

Vec3 LevelSet::gradient(const Vec3& x) const {
  const Vec3 y = x - shift_amount * shift_dir;
  if (kind == Kind::Sphere) return 2.0 * y;
  const double u = y.squaredNorm();
  const double K = R * R - r * r;
  Vec3 g = 4.0 * (u + K) * y;
  g[0] -= 8.0 * R * R * y[0];
  g[1] -= 8.0 * R * R * y[1];
  return g;
}

Mat3 LevelSet::hessian(const Vec3& x) const {
  const Vec3 y = x - shift_amount * shift_dir;
  if (kind == Kind::Sphere) return 2.0 * Mat3::Identity();
  const double u = y.squaredNorm();
  const double K = R * R - r * r;
  Mat3 H = 4.0 * (u + K) * Mat3::Identity() + 8.0 * y * y.transpose();
  H(0, 0) -= 8.0 * R * R;
  H(1, 1) -= 8.0 * R * R;
  return H;
}

double LevelSet::exact_area() const {
  if (kind == Kind::Sphere) return 4.0 * M_PI;
  return 4.0 * M_PI * M_PI * R * r;
}

SurfaceFrame eval_frame(const LevelSet& phi, const Vec3& x) {
  const Vec3 g = phi.gradient(x);
  const double glen = g.norm();
  if (glen <= 1e-10)
    throw GeometryError("level-set gradient vanishes at evaluation point");
  SurfaceFrame f;
  f.n = g / glen;
  f.P = Mat3::Identity() - f.n * f.n.transpose();
  f.H = f.P * phi.hessian(x) * f.P / glen;
  return f;
}

Vec3 project_to_surface(const LevelSet& phi, const Vec3& x) {
  Vec3 y = x;
  for (int it = 0; it < 10; ++it) {
    const double v = phi.value(y);
    if (std::abs(v) <= 1e-14 * (1.0 + y.squaredNorm())) return y;
    const Vec3 g = phi.gradient(y);
    const double g2 = g.squaredNorm();
    if (g2 <= 1e-20)
      throw GeometryError("projection hit a level-set critical point");
    y -= (v / g2) * g;
  }
  if (std::abs(phi.value(y)) <= 1e-10) return y;
  throw GeometryError("projection onto the zero set did not converge");
}

} // namespace ts
