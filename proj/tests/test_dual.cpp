#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "tracestokes/dual.hpp"
#include "tracestokes/types.hpp"

using namespace ts;

namespace {

// f(x) = (a.x)(b.x) + (c.x)/sqrt(d + |x|^2) + 1/(e + (a.x)^2),
// covering products, quotients and the square root. The closed-form
// gradient and Hessian below are the oracle.
template <typename T>
T test_function(const std::array<T, 3>& x, const Vec3& a, const Vec3& b,
                const Vec3& c, double d, double e) {
  T ax = a[0] * x[0] + a[1] * x[1] + a[2] * x[2];
  T bx = b[0] * x[0] + b[1] * x[1] + b[2] * x[2];
  T cx = c[0] * x[0] + c[1] * x[1] + c[2] * x[2];
  T r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  T s = dual_sqrt(r2 + d);
  return ax * bx + cx / s + 1.0 / (ax * ax + e);
}

void closed_form(const Vec3& x, const Vec3& a, const Vec3& b, const Vec3& c,
                 double d, double e, double& value, Vec3& grad, Mat3& hess) {
  const double ax = a.dot(x), bx = b.dot(x), cx = c.dot(x);
  const double s = std::sqrt(x.squaredNorm() + d);
  const double w = ax * ax + e;
  value = ax * bx + cx / s + 1.0 / w;
  grad = a * bx + b * ax + c / s - cx * x / (s * s * s) -
         2.0 * ax * a / (w * w);
  hess = a * b.transpose() + b * a.transpose();
  hess -= (c * x.transpose() + x * c.transpose()) / (s * s * s);
  hess -= cx / (s * s * s) * Mat3::Identity();
  hess += 3.0 * cx / (s * s * s * s * s) * x * x.transpose();
  hess += (-2.0 / (w * w) + 8.0 * ax * ax / (w * w * w)) * a * a.transpose();
}

} // namespace

TEST_CASE("first and second derivatives of basic operations") {
  const double x[3] = {0.7, -0.3, 1.2};

  auto jet = seed2(x);
  // f = x0 * x1 + x2^2
  Dual2 f = jet[0] * jet[1] + jet[2] * jet[2];
  CHECK(value_of(f) == doctest::Approx(0.7 * -0.3 + 1.44).epsilon(1e-15));
  CHECK(f.val.der[0] == doctest::Approx(-0.3).epsilon(1e-15));
  CHECK(f.val.der[1] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(f.val.der[2] == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(f.der[0].der[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.der[1].der[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.der[2].der[2] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(f.der[0].der[0] == 0.0);

  // g = 1 / x2
  Dual2 g = 1.0 / jet[2];
  CHECK(value_of(g) == doctest::Approx(1.0 / 1.2).epsilon(1e-15));
  CHECK(g.val.der[2] == doctest::Approx(-1.0 / 1.44).epsilon(1e-14));
  CHECK(g.der[2].der[2] == doctest::Approx(2.0 / (1.2 * 1.2 * 1.2)).epsilon(1e-14));

  // r = |x|
  Dual2 r = dual_sqrt(jet[0] * jet[0] + jet[1] * jet[1] + jet[2] * jet[2]);
  const double rn = std::sqrt(0.49 + 0.09 + 1.44);
  CHECK(value_of(r) == doctest::Approx(rn).epsilon(1e-15));
  CHECK(r.val.der[0] == doctest::Approx(0.7 / rn).epsilon(1e-14));
  // Hessian of |x| is (I - x x^T / r^2) / r
  CHECK(r.der[0].der[0] ==
        doctest::Approx((1.0 - 0.49 / (rn * rn)) / rn).epsilon(1e-13));
  CHECK(r.der[0].der[1] ==
        doctest::Approx(-0.7 * -0.3 / (rn * rn * rn)).epsilon(1e-13));
}

TEST_CASE("thirty random functions match closed-form gradient and Hessian") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> positive(0.5, 2.0);
  auto rand_vec = [&] { return Vec3(unit(rng), unit(rng), unit(rng)); };

  for (int trial = 0; trial < 30; ++trial) {
    const Vec3 a = rand_vec(), b = rand_vec(), c = rand_vec(), x = rand_vec();
    const double d = positive(rng), e = positive(rng);

    double value;
    Vec3 grad;
    Mat3 hess;
    closed_form(x, a, b, c, d, e, value, grad, hess);

    const double px[3] = {x[0], x[1], x[2]};
    auto jet = seed2(px);
    Dual2 f = test_function(jet, a, b, c, d, e);

    // plain double evaluation agrees with the jet value up to the one
    // extra rounding the division rule introduces
    std::array<double, 3> xd = {x[0], x[1], x[2]};
    CHECK(std::abs(test_function(xd, a, b, c, d, e) - value_of(f)) <=
          1e-14 * std::max(1.0, std::abs(value)));

    const double gscale = std::max(1.0, grad.cwiseAbs().maxCoeff());
    const double hscale = std::max(1.0, hess.cwiseAbs().maxCoeff());
    CHECK(std::abs(value_of(f) - value) <= 1e-12 * std::max(1.0, std::abs(value)));
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(f.val.der[i] - grad[i]) <= 1e-12 * gscale);
      // both derivative layers carry the same first-order information
      CHECK(std::abs(f.der[i].val - f.val.der[i]) <= 1e-13 * gscale);
      for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(f.der[i].der[j] - hess(i, j)) <= 1e-10 * hscale);
        CHECK(std::abs(f.der[i].der[j] - f.der[j].der[i]) <= 1e-13 * hscale);
      }
    }
  }
}

TEST_CASE("seeding conventions") {
  const double x[3] = {0.25, -1.5, 2.0};
  auto j1 = seed1(x);
  for (int i = 0; i < 3; ++i) {
    CHECK(j1[i].val == x[i]);
    for (int k = 0; k < 3; ++k) CHECK(j1[i].der[k] == (i == k ? 1.0 : 0.0));
  }
  auto j2 = seed2(x);
  for (int i = 0; i < 3; ++i) {
    CHECK(value_of(j2[i]) == x[i]);
    for (int k = 0; k < 3; ++k) {
      CHECK(j2[i].val.der[k] == (i == k ? 1.0 : 0.0));
      CHECK(j2[i].der[k].val == (i == k ? 1.0 : 0.0));
      for (int l = 0; l < 3; ++l) CHECK(j2[i].der[k].der[l] == 0.0);
    }
  }
}
