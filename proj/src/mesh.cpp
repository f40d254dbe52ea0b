#include "tracestokes/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

namespace ts {

const std::array<std::array<int, 3>, 6> kKuhnPerms = {{
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
}};

namespace {

int perm_sign(const std::array<int, 3>& p) {
  int s = 1;
  if (p[0] > p[1]) s = -s;
  if (p[0] > p[2]) s = -s;
  if (p[1] > p[2]) s = -s;
  return s;
}

std::array<std::array<int, 4>, 6> make_kuhn_tets() {
  std::array<std::array<int, 4>, 6> tets{};
  for (int k = 0; k < 6; ++k) {
    const auto& p = kKuhnPerms[k];
    const int c0 = 0;
    const int c1 = 1 << p[0];
    const int c2 = c1 | (1 << p[1]);
    const int c3 = 7;
    if (perm_sign(p) > 0)
      tets[k] = {c0, c1, c2, c3};
    else
      tets[k] = {c0, c2, c1, c3};
  }
  return tets;
}

} // namespace

const std::array<std::array<int, 4>, 6> kKuhnTets = make_kuhn_tets();

double BackgroundMesh::tet_volume(int t) const {
  const auto& c = tets[t];
  const Vec3 a = vertices[c[1]] - vertices[c[0]];
  const Vec3 b = vertices[c[2]] - vertices[c[0]];
  const Vec3 d = vertices[c[3]] - vertices[c[0]];
  return a.cross(b).dot(d) / 6.0;
}

double BackgroundMesh::tet_diameter(int t) const {
  const auto& c = tets[t];
  double d2 = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      d2 = std::max(d2, (vertices[c[i]] - vertices[c[j]]).squaredNorm());
  return std::sqrt(d2);
}

Vec3 BackgroundMesh::cell_corner(int t) const {
  const std::int64_t cell = tet_cell[t];
  const std::int64_t N = cells_per_axis;
  const std::int64_t i = cell % N, j = (cell / N) % N, k = cell / (N * N);
  return origin() + h * Vec3(double(i), double(j), double(k));
}

namespace {

struct CubeSelector {
  const LevelSet* phi = nullptr;
  int N = 0;
  double h = 0.0;
  Vec3 origin;

  Vec3 corner(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return origin + h * Vec3(double(i), double(j), double(k));
  }

  /// cut criterion on the actual cut definition: a corner sign change
  /// (zeros included), or the center closer to the zero set than the
  /// cube diagonal in level-set units
  bool triggers(std::int64_t i, std::int64_t j, std::int64_t k) const {
    double mn = 1e300, mx = -1e300;
    for (int b = 0; b < 8; ++b) {
      const double v = phi->value(
          corner(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1)));
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    if (mn <= 0.0 && mx >= 0.0) return true;
    const double diag = h * std::sqrt(3.0);
    const double c = phi->value(corner(i, j, k) + 0.5 * h * Vec3::Ones());
    return std::abs(c) <= diag;
  }
};

} // namespace

static BackgroundMesh build_from_cells(int level,
                                       const std::vector<std::int64_t>& cells) {
  BackgroundMesh mesh;
  mesh.level = level;
  mesh.h = (5.0 / 3.0) * std::pow(2.0, -level);
  mesh.cells_per_axis = 2 << level;
  const std::int64_t N = mesh.cells_per_axis;
  const Vec3 origin = mesh.origin();

  std::unordered_map<std::int64_t, int> vertex_id;
  vertex_id.reserve(cells.size() * 4);
  auto vertex = [&](std::int64_t i, std::int64_t j, std::int64_t k) {
    const std::int64_t key = (k * (N + 1) + j) * (N + 1) + i;
    auto [it, fresh] = vertex_id.try_emplace(key, int(mesh.vertices.size()));
    if (fresh)
      mesh.vertices.push_back(origin +
                              mesh.h * Vec3(double(i), double(j), double(k)));
    return it->second;
  };

  mesh.tets.reserve(cells.size() * 6);
  mesh.tet_cell.reserve(cells.size() * 6);
  mesh.tet_perm.reserve(cells.size() * 6);
  for (const std::int64_t cell : cells) {
    const std::int64_t i = cell % N, j = (cell / N) % N, k = cell / (N * N);
    int corner_ids[8];
    for (int b = 0; b < 8; ++b)
      corner_ids[b] = vertex(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
    for (int p = 0; p < 6; ++p) {
      mesh.tets.push_back({corner_ids[kKuhnTets[p][0]],
                           corner_ids[kKuhnTets[p][1]],
                           corner_ids[kKuhnTets[p][2]],
                           corner_ids[kKuhnTets[p][3]]});
      mesh.tet_cell.push_back(cell);
      mesh.tet_perm.push_back(p);
    }
  }
  return mesh;
}

BackgroundMesh build_mesh(int level) {
  if (level < 0 || level > 6)
    throw ConfigError("uniform build_mesh supports levels 0..6");
  const std::int64_t N = 2 << level;
  std::vector<std::int64_t> cells;
  cells.reserve(N * N * N);
  for (std::int64_t c = 0; c < N * N * N; ++c) cells.push_back(c);
  return build_from_cells(level, cells);
}

BackgroundMesh build_mesh(int level, const LevelSet& phi) {
  if (level < 0 || level > 8)
    throw ConfigError("build_mesh supports levels 0..8");
  const std::int64_t N = 2 << level;
  const double h = (5.0 / 3.0) * std::pow(2.0, -level);

  CubeSelector sel{&phi, int(N), h, Vec3(-5.0 / 3.0, -5.0 / 3.0, -5.0 / 3.0)};

  // Octree descent: prune subtrees whose center is provably farther from
  // the zero set than half the subtree diagonal. The slope bound combines
  // the center gradient with a global Hessian bound over Omega.
  const double hess_bound = (phi.kind == LevelSet::Kind::Sphere) ? 2.0 : 120.0;
  std::vector<std::int64_t> candidates;
  struct Node {
    std::int64_t i, j, k;
    int depth;
  };
  std::vector<Node> stack{{0, 0, 0, 0}};
  while (!stack.empty()) {
    const Node nd = stack.back();
    stack.pop_back();
    const std::int64_t side = N >> nd.depth;
    const double width = h * double(side);
    const Vec3 lo = sel.corner(nd.i * side, nd.j * side, nd.k * side);
    const Vec3 center = lo + 0.5 * width * Vec3::Ones();
    const double half_diag = 0.5 * width * std::sqrt(3.0);
    const double slope = phi.gradient(center).norm() + hess_bound * half_diag;
    if (std::abs(phi.value(center)) > slope * half_diag + 2.0 * h) continue;
    if (side == 1) {
      candidates.push_back((nd.k * N + nd.j) * N + nd.i);
      continue;
    }
    for (int b = 7; b >= 0; --b)
      stack.push_back({2 * nd.i + (b & 1), 2 * nd.j + ((b >> 1) & 1),
                       2 * nd.k + ((b >> 2) & 1), nd.depth + 1});
  }

  std::vector<std::int64_t> triggered;
  for (const std::int64_t cell : candidates) {
    const std::int64_t i = cell % N, j = (cell / N) % N, k = cell / (N * N);
    if (sel.triggers(i, j, k)) triggered.push_back(cell);
  }
  if (triggered.empty())
    throw GeometryError("level set does not intersect the mesh region");

  // keep triggered cubes plus one buffer layer of 26-neighbors
  std::vector<std::int64_t> kept;
  kept.reserve(triggered.size() * 4);
  for (const std::int64_t cell : triggered) {
    const std::int64_t i = cell % N, j = (cell / N) % N, k = cell / (N * N);
    for (int dk = -1; dk <= 1; ++dk)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const std::int64_t ii = i + di, jj = j + dj, kk = k + dk;
          if (ii < 0 || jj < 0 || kk < 0 || ii >= N || jj >= N || kk >= N)
            continue;
          kept.push_back((kk * N + jj) * N + ii);
        }
  }
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  return build_from_cells(level, kept);
}

ActiveBand extract_active_band(const BackgroundMesh& mesh, const LevelSet& phi) {
  ActiveBand band;
  band.parent = &mesh;
  band.phi = phi;
  band.vertex_phi.resize(mesh.vertices.size());
  for (size_t v = 0; v < mesh.vertices.size(); ++v)
    band.vertex_phi[v] = phi.value(mesh.vertices[v]);

  const double bound = 5.0 / 3.0 - 1e-12;
  for (size_t t = 0; t < mesh.tets.size(); ++t) {
    double mn = 1e300, mx = -1e300;
    for (const int v : mesh.tets[t]) {
      mn = std::min(mn, band.vertex_phi[v]);
      mx = std::max(mx, band.vertex_phi[v]);
    }
    if (mn <= 0.0 && mx >= 0.0) {
      for (const int v : mesh.tets[t])
        if (mesh.vertices[v].cwiseAbs().maxCoeff() >= bound)
          throw GeometryError("zero set touches the domain boundary");
      band.cut_tets.push_back(int(t));
    }
  }
  if (band.cut_tets.empty())
    throw GeometryError("active band is empty: surface misses the mesh");

  // omega(T): cut tets sharing a vertex, built via vertex->cut-tet lists
  std::unordered_map<int, std::vector<int>> tets_of_vertex;
  for (size_t c = 0; c < band.cut_tets.size(); ++c)
    for (const int v : mesh.tets[band.cut_tets[c]])
      tets_of_vertex[v].push_back(int(c));
  band.neighbor_map.resize(band.cut_tets.size());
  for (size_t c = 0; c < band.cut_tets.size(); ++c) {
    auto& nbrs = band.neighbor_map[c];
    for (const int v : mesh.tets[band.cut_tets[c]]) {
      const auto& list = tets_of_vertex[v];
      nbrs.insert(nbrs.end(), list.begin(), list.end());
    }
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return band;
}

void dump_mesh(const BackgroundMesh& mesh, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("cannot open mesh dump file: " + path);
  std::fprintf(f, "tets %zu vertices %zu level %d\n", mesh.tets.size(),
               mesh.vertices.size(), mesh.level);
  for (const auto& v : mesh.vertices)
    std::fprintf(f, "%.17g %.17g %.17g\n", v[0], v[1], v[2]);
  for (const auto& t : mesh.tets)
    std::fprintf(f, "%d %d %d %d\n", t[0], t[1], t[2], t[3]);
  std::fclose(f);
}

} // namespace ts
