#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "tracestokes/fe_space.hpp"
#include "tracestokes/level_set.hpp"
#include "tracestokes/mesh.hpp"

using namespace ts;

namespace {

Vec3 random_point_in_tet(const BackgroundMesh& mesh, int tet,
                         std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(0.01, 1.0);
  std::array<double, 4> w;
  double sum = 0.0;
  for (double& x : w) {
    x = -std::log(uni(rng));
    sum += x;
  }
  Vec3 p = Vec3::Zero();
  for (int v = 0; v < 4; ++v)
    p += (w[v] / sum) * mesh.vertices[mesh.tets[tet][v]];
  return p;
}

ActiveBand synthetic_band(const BackgroundMesh& mesh, std::vector<int> tets) {
  ActiveBand band;
  band.parent = &mesh;
  band.cut_tets = std::move(tets);
  return band;
}

int shared_vertices(const BackgroundMesh& mesh, int a, int b) {
  int n = 0;
  for (const int va : mesh.tets[a])
    for (const int vb : mesh.tets[b])
      if (va == vb) ++n;
  return n;
}

} // namespace

TEST_CASE("scalar dof counts on one and two tets") {
  const BackgroundMesh mesh = build_mesh(0);
  int t0 = -1, t1 = -1;
  for (size_t a = 0; a < mesh.tets.size() && t0 < 0; ++a)
    for (size_t b = a + 1; b < mesh.tets.size() && t0 < 0; ++b)
      if (shared_vertices(mesh, int(a), int(b)) == 3) {
        t0 = int(a);
        t1 = int(b);
      }
  REQUIRE(t0 >= 0);

  const ActiveBand solo = synthetic_band(mesh, {t0});
  CHECK(build_space(solo, 1, 1).dof_count == 4);
  CHECK(build_space(solo, 2, 1).dof_count == 10);

  const ActiveBand pair = synthetic_band(mesh, {t0, t1});
  CHECK(build_space(pair, 1, 1).dof_count == 5);
  // shared face merges 3 vertex nodes and 3 edge midpoints
  CHECK(build_space(pair, 2, 1).dof_count == 14);

  const DiscreteSpace vec = build_space(pair, 2, 3);
  CHECK(vec.total_dofs() == 3 * vec.dof_count);
}

TEST_CASE("node coordinates match vertices and edge midpoints") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(2, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  const DiscreteSpace space = build_space(band, 2, 1);

  for (size_t c = 0; c < band.cut_tets.size(); ++c) {
    const auto& conn = mesh.tets[band.cut_tets[c]];
    for (int l = 0; l < 4; ++l) {
      const Vec3 d = space.node_coords[space.dof_map[c][l]] -
                     mesh.vertices[conn[l]];
      CHECK(d.norm() == 0.0);
    }
    const std::array<std::array<int, 2>, 6> edges = {
        {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
    for (int e = 0; e < 6; ++e) {
      const Vec3 mid = 0.5 * (mesh.vertices[conn[edges[e][0]]] +
                              mesh.vertices[conn[edges[e][1]]]);
      const Vec3 d = space.node_coords[space.dof_map[c][4 + e]] - mid;
      CHECK(d.norm() == 0.0);
    }
  }
}

TEST_CASE("shared edges get the same midpoint node from both tets") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(2, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  const DiscreteSpace space = build_space(band, 2, 1);

  long checked = 0;
  for (size_t c = 0; c < band.cut_tets.size(); ++c) {
    for (const int nb : band.neighbor_map[c]) {
      if (nb <= int(c)) continue;
      std::set<int> nodes_c(space.dof_map[c].begin(), space.dof_map[c].end());
      // every node the two tets geometrically share must be one node id
      for (const int node : space.dof_map[size_t(nb)]) {
        for (const int mine : space.dof_map[c]) {
          if (mine == node) continue;
          const Vec3 d = space.node_coords[mine] - space.node_coords[node];
          CHECK(d.norm() > 0.0);
        }
      }
      checked += long(nodes_c.size());
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("shape functions form a partition of unity") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(2, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  std::mt19937 rng(71);
  std::uniform_int_distribution<int> pick(0, int(band.cut_tets.size()) - 1);

  for (const int degree : {1, 2}) {
    const DiscreteSpace space = build_space(band, degree, 1);
    for (int trial = 0; trial < 50; ++trial) {
      const int c = pick(rng);
      const Vec3 x = random_point_in_tet(mesh, band.cut_tets[c], rng);
      const BasisEval eval = eval_basis_unchecked(space, c, x);
      REQUIRE(eval.n == (degree == 1 ? 4 : 10));
      double vsum = 0.0;
      Vec3 gsum = Vec3::Zero();
      for (int i = 0; i < eval.n; ++i) {
        vsum += eval.value[i];
        gsum += eval.grad[i];
      }
      CHECK(vsum == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(gsum.norm() <= 1e-11);
    }
  }
}

TEST_CASE("shape functions are one at their node and zero at the others") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(2, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  for (const int degree : {1, 2}) {
    const DiscreteSpace space = build_space(band, degree, 1);
    const int nl = space.local_size();
    for (const size_t c : {size_t(0), band.cut_tets.size() - 1}) {
      for (int l = 0; l < nl; ++l) {
        const Vec3 node = space.node_coords[space.dof_map[c][l]];
        const BasisEval eval = eval_basis_unchecked(space, int(c), node);
        for (int i = 0; i < nl; ++i)
          CHECK(eval.value[i] ==
                doctest::Approx(i == l ? 1.0 : 0.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("basis gradients match finite differences") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(2, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  std::mt19937 rng(72);
  std::uniform_int_distribution<int> pick(0, int(band.cut_tets.size()) - 1);
  const double step = 1e-6;

  for (const int degree : {1, 2}) {
    const DiscreteSpace space = build_space(band, degree, 1);
    for (int trial = 0; trial < 10; ++trial) {
      const int c = pick(rng);
      const Vec3 x = random_point_in_tet(mesh, band.cut_tets[c], rng);
      const BasisEval at = eval_basis_unchecked(space, c, x);
      for (int k = 0; k < 3; ++k) {
        Vec3 xp = x, xm = x;
        xp[k] += step;
        xm[k] -= step;
        const BasisEval ep = eval_basis_unchecked(space, c, xp);
        const BasisEval em = eval_basis_unchecked(space, c, xm);
        for (int i = 0; i < at.n; ++i) {
          const double fd = (ep.value[i] - em.value[i]) / (2.0 * step);
          CHECK(std::abs(fd - at.grad[i][k]) <=
                1e-6 * (1.0 + std::abs(at.grad[i][k])));
        }
      }
    }
  }
}

TEST_CASE("interpolation reproduces polynomials of matching degree") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(2, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  std::mt19937 rng(73);
  std::uniform_int_distribution<int> pick(0, int(band.cut_tets.size()) - 1);

  const auto linear = [](const Vec3& x) {
    return 0.7 - 1.3 * x[0] + 0.4 * x[1] + 2.0 * x[2];
  };
  const auto quadratic = [&](const Vec3& x) {
    return linear(x) + 0.9 * x[0] * x[0] - 1.1 * x[0] * x[1] +
           0.6 * x[1] * x[2] + 0.3 * x[2] * x[2];
  };

  const DiscreteSpace p1 = build_space(band, 1, 1);
  const FEFunction f1 = interpolate(p1, linear);
  CHECK(f1.coeffs.size() == p1.total_dofs());
  const DiscreteSpace p2 = build_space(band, 2, 1);
  const FEFunction f2 = interpolate(p2, quadratic);

  for (int trial = 0; trial < 40; ++trial) {
    const int c = pick(rng);
    const Vec3 x = random_point_in_tet(mesh, band.cut_tets[c], rng);
    CHECK(f1.eval(c, x) == doctest::Approx(linear(x)).epsilon(1e-12));
    CHECK(f2.eval(c, x) == doctest::Approx(quadratic(x)).epsilon(1e-12));
  }
}

TEST_CASE("quadratic interpolation reproduces the sphere level set") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(2, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  const DiscreteSpace space = build_space(band, 2, 1);
  const FEFunction interp =
      interpolate(space, [&](const Vec3& x) { return phi.value(x); });

  std::mt19937 rng(74);
  std::uniform_int_distribution<int> pick(0, int(band.cut_tets.size()) - 1);
  for (int trial = 0; trial < 100; ++trial) {
    const int c = pick(rng);
    const Vec3 x = random_point_in_tet(mesh, band.cut_tets[c], rng);
    CHECK(std::abs(interp.eval(c, x) - phi.value(x)) <= 1e-12);
  }
}

TEST_CASE("quadratic interpolation error for the torus decays cubically") {
  const LevelSet phi = LevelSet::torus();
  double previous = 0.0;
  for (const int level : {3, 4}) {
    const BackgroundMesh mesh = build_mesh(level, phi);
    const ActiveBand band = extract_active_band(mesh, phi);
    const DiscreteSpace space = build_space(band, 2, 1);
    const FEFunction interp =
        interpolate(space, [&](const Vec3& x) { return phi.value(x); });

    double err = 0.0;
    for (size_t c = 0; c < band.cut_tets.size(); ++c) {
      const auto& conn = mesh.tets[band.cut_tets[c]];
      Vec3 centroid = Vec3::Zero();
      for (const int v : conn) centroid += 0.25 * mesh.vertices[v];
      const std::array<Vec3, 5> samples = {
          centroid,
          0.5 * (centroid + mesh.vertices[conn[0]]),
          0.5 * (centroid + mesh.vertices[conn[1]]),
          0.5 * (centroid + mesh.vertices[conn[2]]),
          0.5 * (centroid + mesh.vertices[conn[3]]),
      };
      for (const Vec3& x : samples)
        err = std::max(err,
                       std::abs(interp.eval(int(c), x) - phi.value(x)));
    }
    if (previous > 0.0) {
      const double ratio = previous / err;
      CHECK(ratio >= 4.5);
      CHECK(ratio <= 13.0);
    }
    previous = err;
  }
}

TEST_CASE("vector interpolation keeps components separate") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(2, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  const DiscreteSpace space = build_space(band, 2, 3);
  const auto field = [](const Vec3& x) {
    return Vec3(x[0], 2.0 * x[1], x[0] + x[2]);
  };
  const FEFunction f = interpolate(space, field);
  CHECK(f.coeffs.size() == space.total_dofs());

  std::mt19937 rng(75);
  std::uniform_int_distribution<int> pick(0, int(band.cut_tets.size()) - 1);
  for (int trial = 0; trial < 20; ++trial) {
    const int c = pick(rng);
    const Vec3 x = random_point_in_tet(mesh, band.cut_tets[c], rng);
    const Vec3 want = field(x);
    for (int comp = 0; comp < 3; ++comp)
      CHECK(f.eval(c, x, comp) == doctest::Approx(want[comp]).epsilon(1e-12));
  }
}

TEST_CASE("basis evaluation rejects points outside the element") {
  const LevelSet phi = LevelSet::sphere();
  const BackgroundMesh mesh = build_mesh(2, phi);
  const ActiveBand band = extract_active_band(mesh, phi);
  const DiscreteSpace space = build_space(band, 2, 1);
  CHECK_THROWS_AS(eval_basis(space, 0, Vec3(10.0, 10.0, 10.0)), UsageError);

  std::mt19937 rng(76);
  const Vec3 inside = random_point_in_tet(mesh, band.cut_tets[0], rng);
  const BasisEval checked = eval_basis(space, 0, inside);
  const BasisEval unchecked = eval_basis_unchecked(space, 0, inside);
  for (int i = 0; i < checked.n; ++i)
    CHECK(checked.value[i] == unchecked.value[i]);
}

TEST_CASE("invalid degrees and component counts are rejected") {
  const BackgroundMesh mesh = build_mesh(0);
  const ActiveBand band = synthetic_band(mesh, {0});
  CHECK_THROWS_AS(build_space(band, 3, 1), UsageError);
  CHECK_THROWS_AS(build_space(band, 0, 1), UsageError);
  CHECK_THROWS_AS(build_space(band, 1, 2), UsageError);
}
