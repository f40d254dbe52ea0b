#pragma once

#include <array>
#include <cmath>

namespace ts {

/// Forward-mode dual number carrying a value and three partial derivatives.
/// Nesting (Dual<Dual<double>>) propagates second derivatives: seeding both
/// layers with the same coordinate directions makes grad(i) the first
/// derivative and grad(i).grad(j) the (i,j) entry of the Hessian.
template <typename T>
struct Dual {
  T val{};
  std::array<T, 3> der{};

  Dual() = default;
  Dual(const T& v) : val(v) {} // NOLINT: implicit promotion is the point
  Dual(const T& v, const std::array<T, 3>& d) : val(v), der(d) {}

  Dual operator-() const { return {-val, {-der[0], -der[1], -der[2]}}; }

  Dual& operator+=(const Dual& o) {
    val += o.val;
    for (int i = 0; i < 3; ++i) der[i] += o.der[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    val -= o.val;
    for (int i = 0; i < 3; ++i) der[i] -= o.der[i];
    return *this;
  }
};

template <typename T>
Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <typename T>
Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }

template <typename T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  Dual<T> r;
  r.val = a.val * b.val;
  for (int i = 0; i < 3; ++i) r.der[i] = a.der[i] * b.val + a.val * b.der[i];
  return r;
}

template <typename T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  Dual<T> r;
  T inv = T(1.0) / b.val;
  r.val = a.val * inv;
  for (int i = 0; i < 3; ++i)
    r.der[i] = (a.der[i] - r.val * b.der[i]) * inv;
  return r;
}

// mixed scalar forms so polynomial code reads naturally
template <typename T> Dual<T> operator+(const Dual<T>& a, double s) { return a + Dual<T>(T(s)); }
template <typename T> Dual<T> operator+(double s, const Dual<T>& a) { return Dual<T>(T(s)) + a; }
template <typename T> Dual<T> operator-(const Dual<T>& a, double s) { return a - Dual<T>(T(s)); }
template <typename T> Dual<T> operator-(double s, const Dual<T>& a) { return Dual<T>(T(s)) - a; }
template <typename T> Dual<T> operator*(const Dual<T>& a, double s) { return a * Dual<T>(T(s)); }
template <typename T> Dual<T> operator*(double s, const Dual<T>& a) { return Dual<T>(T(s)) * a; }
template <typename T> Dual<T> operator/(const Dual<T>& a, double s) { return a / Dual<T>(T(s)); }
template <typename T> Dual<T> operator/(double s, const Dual<T>& a) { return Dual<T>(T(s)) / a; }

inline double dual_sqrt(double x) { return std::sqrt(x); }

template <typename T>
Dual<T> dual_sqrt(const Dual<T>& a) {
  Dual<T> r;
  r.val = dual_sqrt(a.val);
  T scale = T(0.5) / r.val;
  for (int i = 0; i < 3; ++i) r.der[i] = a.der[i] * scale;
  return r;
}

using Dual1 = Dual<double>;        // value + gradient
using Dual2 = Dual<Dual<double>>;  // value + gradient + Hessian

/// Seed the three coordinates of a point for a first-order sweep.
inline std::array<Dual1, 3> seed1(const double x[3]) {
  std::array<Dual1, 3> p;
  for (int i = 0; i < 3; ++i) {
    p[i].val = x[i];
    p[i].der[i] = 1.0;
  }
  return p;
}

/// Seed for a second-order sweep (both layers carry the unit directions).
inline std::array<Dual2, 3> seed2(const double x[3]) {
  std::array<Dual2, 3> p;
  for (int i = 0; i < 3; ++i) {
    p[i].val.val = x[i];
    p[i].val.der[i] = 1.0;
    p[i].der[i].val = 1.0;
  }
  return p;
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual1& x) { return x.val; }
inline double value_of(const Dual2& x) { return x.val.val; }

} // namespace ts
