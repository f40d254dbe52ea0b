#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tracestokes/cut_surface.hpp"
#include "tracestokes/level_set.hpp"
#include "tracestokes/mesh.hpp"

using namespace ts;

namespace {

const std::array<Vec3, 4> kRefTet = {Vec3(0, 0, 0), Vec3(1, 0, 0),
                                     Vec3(0, 1, 0), Vec3(0, 0, 1)};

double tri_area(const std::array<Vec3, 3>& t) {
  return 0.5 * (t[1] - t[0]).cross(t[2] - t[0]).norm();
}

double patch_area(const std::vector<std::array<Vec3, 3>>& tris) {
  double a = 0.0;
  for (const auto& t : tris) a += tri_area(t);
  return a;
}

std::array<double, 4> barycentric(const BackgroundMesh& mesh, int tet,
                                  const Vec3& x) {
  const auto& conn = mesh.tets[tet];
  const Vec3& p0 = mesh.vertices[conn[0]];
  Mat3 E;
  E.col(0) = mesh.vertices[conn[1]] - p0;
  E.col(1) = mesh.vertices[conn[2]] - p0;
  E.col(2) = mesh.vertices[conn[3]] - p0;
  const Vec3 lam = E.fullPivLu().solve(x - p0);
  return {1.0 - lam.sum(), lam[0], lam[1], lam[2]};
}

bool lex_less(const Vec3& a, const Vec3& b) {
  if (a[0] != b[0]) return a[0] < b[0];
  if (a[1] != b[1]) return a[1] < b[1];
  return a[2] < b[2];
}

struct SoupStats {
  long vertices = 0;
  long edges = 0;
  long faces = 0;
  long bad_edges = 0; // edges not shared by exactly two triangles
};

SoupStats soup_stats(const CutSurface& cut) {
  using Key = std::array<double, 3>;
  std::set<Key> verts;
  std::map<std::array<double, 6>, int> edges;
  for (const auto& tri : cut.triangles) {
    for (int e = 0; e < 3; ++e) {
      const Vec3& p = tri[e];
      const Vec3& q = tri[(e + 1) % 3];
      verts.insert({p[0], p[1], p[2]});
      const Vec3& a = lex_less(p, q) ? p : q;
      const Vec3& b = lex_less(p, q) ? q : p;
      ++edges[{a[0], a[1], a[2], b[0], b[1], b[2]}];
    }
  }
  SoupStats s;
  s.vertices = long(verts.size());
  s.edges = long(edges.size());
  s.faces = long(cut.triangles.size());
  for (const auto& [k, count] : edges)
    if (count != 2) ++s.bad_edges;
  return s;
}

} // namespace

TEST_CASE("marching tet handles the one-negative-corner cut") {
  const std::array<double, 4> values = {-1.0, 1.0, 1.0, 1.0};
  const auto tris = marching_tet(kRefTet, values);
  REQUIRE(tris.size() == 1);
  // crossings sit at the midpoints of the three edges leaving corner 0
  CHECK(patch_area(tris) == doctest::Approx(std::sqrt(3.0) / 8.0).epsilon(1e-14));
  for (const auto& tri : tris)
    for (const Vec3& v : tri) CHECK(v.sum() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("marching tet splits the two-negative-corner quad") {
  const std::array<double, 4> values = {-1.0, -1.0, 1.0, 1.0};
  const auto tris = marching_tet(kRefTet, values);
  REQUIRE(tris.size() == 2);
  // the cut is the parallelogram through the four edge midpoints
  CHECK(patch_area(tris) ==
        doctest::Approx(0.25 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("marching tet ignores uncut tets") {
  CHECK(marching_tet(kRefTet, {1.0, 2.0, 3.0, 4.0}).empty());
  CHECK(marching_tet(kRefTet, {-1.0, -2.0, -3.0, -4.0}).empty());
  CHECK(marching_tet(kRefTet, {0.0, 0.0, 0.0, 0.0}).empty());
}

TEST_CASE("a zero face is emitted only from the negative side") {
  const auto from_negative = marching_tet(kRefTet, {0.0, 0.0, 0.0, -1.0});
  REQUIRE(from_negative.size() == 1);
  CHECK(patch_area(from_negative) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(marching_tet(kRefTet, {0.0, 0.0, 0.0, 1.0}).empty());
}

TEST_CASE("zero corners join the cut polygon") {
  const auto one_zero = marching_tet(kRefTet, {0.0, -1.0, 1.0, 1.0});
  REQUIRE(one_zero.size() == 1);
  bool has_origin = false;
  for (const Vec3& v : one_zero[0])
    if (v.norm() == 0.0) has_origin = true;
  CHECK(has_origin);

  const auto two_zeros = marching_tet(kRefTet, {0.0, 0.0, -1.0, 1.0});
  REQUIRE(two_zeros.size() == 1);
}

TEST_CASE("cut triangles stay inside their tets on the interpolated zero set") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(2, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  const CutSurface cut = extract_cut_surface(band, phi, 1);
  REQUIRE(cut.triangles.size() > 0);

  for (size_t c = 0; c < band.cut_tets.size(); ++c) {
    const int t = band.cut_tets[c];
    const auto& conn = mesh.tets[t];
    std::array<double, 4> corner_phi;
    for (int v = 0; v < 4; ++v)
      corner_phi[v] = phi.value(mesh.vertices[conn[v]]);
    for (int k = cut.tet_offset[c]; k < cut.tet_offset[c + 1]; ++k) {
      for (const Vec3& x : cut.triangles[k]) {
        const std::array<double, 4> lam = barycentric(mesh, t, x);
        double interp = 0.0;
        for (int v = 0; v < 4; ++v) {
          CHECK(lam[v] >= -1e-12);
          CHECK(lam[v] <= 1.0 + 1e-12);
          interp += lam[v] * corner_phi[v];
        }
        CHECK(std::abs(interp) <= 1e-12);
      }
    }
  }
}

TEST_CASE("subdivided triangles still stay inside their tets") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(2, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  const CutSurface cut = extract_cut_surface(band, phi, 3);

  for (size_t c = 0; c < band.cut_tets.size(); ++c)
    for (int k = cut.tet_offset[c]; k < cut.tet_offset[c + 1]; ++k)
      for (const Vec3& x : cut.triangles[k]) {
        const std::array<double, 4> lam = barycentric(mesh, band.cut_tets[c], x);
        for (int v = 0; v < 4; ++v) {
          CHECK(lam[v] >= -1e-12);
          CHECK(lam[v] <= 1.0 + 1e-12);
        }
      }
}

TEST_CASE("per-tet quadrature weights are positive and sum to the patch area") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(2, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  for (const int m : {1, 3}) {
    const CutSurface cut = extract_cut_surface(band, phi, m);
    double total = 0.0;
    for (size_t c = 0; c < band.cut_tets.size(); ++c) {
      double wsum = 0.0;
      cut.for_each_point(int(c), [&](const Vec3&, double w) {
        CHECK(w > 0.0);
        wsum += w;
      });
      const double area = cut.tet_patch_area(int(c));
      CHECK(wsum == doctest::Approx(area).epsilon(1e-12));
      total += area;
    }
    CHECK(total == doctest::Approx(cut.total_area() - cut.extra_area())
                       .epsilon(1e-12));
  }
}

TEST_CASE("sphere area converges with the subdivision factor") {
  const LevelSet phi = LevelSet::sphere();
  const double exact = phi.exact_area();
  const BackgroundMesh mesh = build_mesh(3, phi);
  const ActiveBand band = extract_active_band(mesh, phi);

  const CutSurface coarse = extract_cut_surface(band, phi, 1);
  const double a1 = surface_integrate(coarse, [](const Vec3&) { return 1.0; });
  CHECK(a1 == doctest::Approx(coarse.total_area()).epsilon(1e-13));
  CHECK(std::abs(a1 - exact) <= 0.02 * exact);

  // The inscribed facets of the unit sphere lose 0.417*(h/m)^2 of the
  // area; at level 3 with m = 5 that is a relative 7.3e-4.
  const int m = int(std::ceil(1.0 / mesh.h));
  const CutSurface fine = extract_cut_surface(band, phi, m);
  const double am = fine.total_area();
  CHECK(std::abs(am - exact) <= 8.5e-4 * exact);
}

TEST_CASE("doubling the subdivision factor shrinks the area error four-fold") {
  const LevelSet phi = LevelSet::sphere();
  const double exact = phi.exact_area();
  const BackgroundMesh mesh = build_mesh(3, phi);
  const ActiveBand band = extract_active_band(mesh, phi);

  const double e1 =
      std::abs(extract_cut_surface(band, phi, 1).total_area() - exact);
  const double e2 =
      std::abs(extract_cut_surface(band, phi, 2).total_area() - exact);
  const double e4 =
      std::abs(extract_cut_surface(band, phi, 4).total_area() - exact);
  CHECK(e1 / e2 >= 3.2);
  CHECK(e1 / e2 <= 5.0);
  CHECK(e2 / e4 >= 3.2);
  CHECK(e2 / e4 <= 5.0);
}

TEST_CASE("torus area matches the closed form") {
  const LevelSet phi = LevelSet::torus();
  const BackgroundMesh mesh = build_mesh(4, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  const int m = int(std::ceil(1.0 / mesh.h));
  const CutSurface cut = extract_cut_surface(band, phi, m);
  const double exact = phi.exact_area();
  CHECK(std::abs(cut.total_area() - exact) <= 1e-3 * exact);

  // the thin tube (2r is under four h here) dips through faces of uncut
  // tets; those pieces land in the extra block and carry real area
  CHECK(cut.extra_area() > 0.0);
  CHECK(cut.extra_area() < 0.01 * exact);
}

TEST_CASE("the extra block is empty without re-sampling") {
  const LevelSet phi = LevelSet::torus();
  const BackgroundMesh mesh = build_mesh(4, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  const CutSurface cut = extract_cut_surface(band, phi, 1);
  CHECK(cut.extra_area() == 0.0);
  CHECK(size_t(cut.tet_offset.back()) == cut.triangles.size());
}

TEST_CASE("odd monomials integrate to zero on the sphere") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(3, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  const CutSurface cut = extract_cut_surface(band, phi, 1);
  const double area = cut.total_area();
  for (int axis = 0; axis < 3; ++axis) {
    const double moment =
        surface_integrate(cut, [axis](const Vec3& x) { return x[axis]; });
    CHECK(std::abs(moment) <= 1e-10 * area);
  }
}

TEST_CASE("the extracted sphere surface is watertight and closed") {
  const LevelSet phi = LevelSet::sphere();
  for (const int level : {2, 3}) {
    const BackgroundMesh mesh = build_mesh(level, phi);
    const ActiveBand band = extract_active_band(mesh, phi);
    const CutSurface cut = extract_cut_surface(band, phi, 1);
    REQUIRE(cut.dropped == 0);
    const SoupStats s = soup_stats(cut);
    CHECK(s.bad_edges == 0);
    CHECK(s.vertices - s.edges + s.faces == 2); // genus-zero closed surface
  }
}

TEST_CASE("quadrature points lie within the interpolation error of the surface") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(3, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  // |phi - I1(phi)| <= (1/8) diam^2 |phi''| with diam = h*sqrt(3), phi'' = 2
  for (const int m : {1, 5}) {
    const CutSurface cut = extract_cut_surface(band, phi, m);
    const double fine_h = mesh.h / double(m);
    const double bound = 0.76 * fine_h * fine_h * 3.0;
    for (size_t c = 0; c < band.cut_tets.size(); ++c)
      cut.for_each_point(int(c), [&](const Vec3& x, double) {
        CHECK(std::abs(phi.value(x)) <= bound);
      });
  }
}

TEST_CASE("band quadrature weights sum to the tet volumes") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(2, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  const BandQuadrature bq = band_quadrature(band, 4);
  for (size_t c = 0; c < band.cut_tets.size(); ++c) {
    double wsum = 0.0;
    bq.for_each_point(int(c), [&](const Vec3&, double w) {
      CHECK(w > 0.0);
      wsum += w;
    });
    const double vol = mesh.tet_volume(band.cut_tets[c]);
    CHECK(wsum == doctest::Approx(vol).epsilon(1e-12));
  }
}

TEST_CASE("sphere patches are single components with short boundaries") {
  const LevelSet phi = LevelSet::sphere();
  for (const int level : {2, 3}) {
    const BackgroundMesh mesh = build_mesh(level, phi);
    const ActiveBand band = extract_active_band(mesh, phi);
    const CutSurface cut = extract_cut_surface(band, phi, 1);
    const DiagnosticReport rep = check_mesh_assumption(band, cut);
    CHECK(rep.max_components == 1);
    CHECK(rep.max_ratio <= 10.0);
    CHECK(rep.flagged.empty());
  }
}

TEST_CASE("surface dump writes nine numbers per triangle") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(2, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  const CutSurface cut = extract_cut_surface(band, phi, 1);

  const std::string path = "surface_dump_test.txt";
  dump_surface(cut, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  size_t lines = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::array<double, 9> v{};
    for (double& x : v) REQUIRE((row >> x));
    if (lines == 0)
      for (int k = 0; k < 9; ++k)
        CHECK(v[size_t(k)] == cut.triangles[0][size_t(k / 3)][k % 3]);
    ++lines;
  }
  in.close();
  CHECK(lines == cut.triangles.size());
  std::remove(path.c_str());
}

TEST_CASE("invalid subdivision factors are rejected") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(2, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  CHECK_THROWS_AS(extract_cut_surface(band, phi, 0), ConfigError);
  CHECK_THROWS_AS(extract_cut_surface(band, phi, -2), ConfigError);
}
