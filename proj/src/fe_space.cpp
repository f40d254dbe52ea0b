#include "tracestokes/fe_space.hpp"

#include <algorithm>
#include <map>

namespace ts {

namespace {

constexpr std::array<std::array<int, 2>, 6> kTetEdges = {{
    {0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3},
}};

struct Barycentric {
  std::array<double, 4> lambda;
  std::array<Vec3, 4> grad; // constant per tet
};

Barycentric barycentric(const BackgroundMesh& mesh, int tet, const Vec3& x) {
  const auto& conn = mesh.tets[tet];
  const Vec3& p0 = mesh.vertices[conn[0]];
  Mat3 J;
  J.col(0) = mesh.vertices[conn[1]] - p0;
  J.col(1) = mesh.vertices[conn[2]] - p0;
  J.col(2) = mesh.vertices[conn[3]] - p0;
  const Mat3 Jinv = J.inverse();
  const Vec3 r = Jinv * (x - p0);
  Barycentric b;
  b.lambda = {1.0 - r[0] - r[1] - r[2], r[0], r[1], r[2]};
  for (int i = 0; i < 3; ++i) b.grad[i + 1] = Jinv.row(i);
  b.grad[0] = -(b.grad[1] + b.grad[2] + b.grad[3]);
  return b;
}

} // namespace

DiscreteSpace build_space(const ActiveBand& band, int degree, int components) {
  if (degree != 1 && degree != 2)
    throw UsageError("build_space supports degrees 1 and 2");
  if (components != 1 && components != 3)
    throw UsageError("build_space supports 1 or 3 components");

  const BackgroundMesh& mesh = *band.parent;
  DiscreteSpace space;
  space.band = &band;
  space.degree = degree;
  space.components = components;

  // key = (v, v) for vertices, sorted (v, w) for edge midpoints
  using Key = std::array<int, 2>;
  std::vector<Key> keys;
  keys.reserve(band.cut_tets.size() * (degree == 1 ? 4 : 10));
  for (const int t : band.cut_tets) {
    const auto& conn = mesh.tets[t];
    for (const int v : conn) keys.push_back({v, v});
    if (degree == 2)
      for (const auto& e : kTetEdges) {
        int a = conn[e[0]], b = conn[e[1]];
        if (a > b) std::swap(a, b);
        keys.push_back({a, b});
      }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  space.dof_count = int(keys.size());

  auto index_of = [&](Key k) {
    return int(std::lower_bound(keys.begin(), keys.end(), k) - keys.begin());
  };

  space.node_coords.resize(keys.size());
  for (size_t i = 0; i < keys.size(); ++i) {
    const auto& [a, b] = keys[i];
    space.node_coords[i] = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
  }

  space.dof_map.resize(band.cut_tets.size());
  for (size_t c = 0; c < band.cut_tets.size(); ++c) {
    const auto& conn = mesh.tets[band.cut_tets[c]];
    auto& map = space.dof_map[c];
    map.fill(-1);
    for (int v = 0; v < 4; ++v) map[v] = index_of({conn[v], conn[v]});
    if (degree == 2)
      for (int e = 0; e < 6; ++e) {
        int a = conn[kTetEdges[e][0]], b = conn[kTetEdges[e][1]];
        if (a > b) std::swap(a, b);
        map[4 + e] = index_of({a, b});
      }
  }
  return space;
}

BasisEval eval_basis_unchecked(const DiscreteSpace& space, int cut_index,
                               const Vec3& x) {
  const BackgroundMesh& mesh = *space.band->parent;
  const int tet = space.band->cut_tets[cut_index];
  const Barycentric b = barycentric(mesh, tet, x);

  BasisEval e;
  if (space.degree == 1) {
    e.n = 4;
    for (int i = 0; i < 4; ++i) {
      e.value[i] = b.lambda[i];
      e.grad[i] = b.grad[i];
    }
    return e;
  }
  e.n = 10;
  for (int i = 0; i < 4; ++i) {
    e.value[i] = b.lambda[i] * (2.0 * b.lambda[i] - 1.0);
    e.grad[i] = (4.0 * b.lambda[i] - 1.0) * b.grad[i];
  }
  for (int k = 0; k < 6; ++k) {
    const int i = kTetEdges[k][0], j = kTetEdges[k][1];
    e.value[4 + k] = 4.0 * b.lambda[i] * b.lambda[j];
    e.grad[4 + k] = 4.0 * (b.lambda[i] * b.grad[j] + b.lambda[j] * b.grad[i]);
  }
  return e;
}

BasisEval eval_basis(const DiscreteSpace& space, int cut_index, const Vec3& x) {
  const BackgroundMesh& mesh = *space.band->parent;
  const int tet = space.band->cut_tets[cut_index];
  const Barycentric b = barycentric(mesh, tet, x);
  for (const double l : b.lambda)
    if (l < -1e-10 || l > 1.0 + 1e-10)
      throw UsageError("eval_basis: point lies outside the element");
  return eval_basis_unchecked(space, cut_index, x);
}

double FEFunction::eval(int cut_index, const Vec3& x, int component) const {
  const BasisEval b = eval_basis_unchecked(*space, cut_index, x);
  const auto& map = space->dof_map[cut_index];
  double v = 0.0;
  for (int i = 0; i < b.n; ++i)
    v += coeffs[map[i] * space->components + component] * b.value[i];
  return v;
}

FEFunction interpolate(const DiscreteSpace& space,
                       const std::function<double(const Vec3&)>& f) {
  if (space.components != 1)
    throw UsageError("scalar interpolate needs a scalar space");
  FEFunction u;
  u.space = &space;
  u.coeffs.resize(space.dof_count);
  for (int i = 0; i < space.dof_count; ++i)
    u.coeffs[i] = f(space.node_coords[i]);
  return u;
}

FEFunction interpolate(const DiscreteSpace& space,
                       const std::function<Vec3(const Vec3&)>& f) {
  if (space.components != 3)
    throw UsageError("vector interpolate needs a 3-component space");
  FEFunction u;
  u.space = &space;
  u.coeffs.resize(space.total_dofs());
  for (int i = 0; i < space.dof_count; ++i) {
    const Vec3 v = f(space.node_coords[i]);
    for (int c = 0; c < 3; ++c) u.coeffs[3 * i + c] = v[c];
  }
  return u;
}

} // namespace ts
