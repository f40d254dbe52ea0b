#include "tracestokes/cut_surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace ts {

namespace {

bool lex_less(const Vec3& a, const Vec3& b) {
  if (a[0] != b[0]) return a[0] < b[0];
  if (a[1] != b[1]) return a[1] < b[1];
  return a[2] < b[2];
}

double tri_area(const std::array<Vec3, 3>& t) {
  return 0.5 * (t[1] - t[0]).cross(t[2] - t[0]).norm();
}

} // namespace

std::vector<std::array<Vec3, 3>> marching_tet(
    const std::array<Vec3, 4>& corners, const std::array<double, 4>& values) {
  std::vector<std::array<Vec3, 3>> out;

  int zeros = 0;
  for (const double v : values)
    if (v == 0.0) ++zeros;
  if (zeros == 4) return out;
  if (zeros == 3) {
    // face on the zero set; emit from the negative side only
    double fourth = 0.0;
    std::array<Vec3, 3> face;
    int k = 0;
    for (int i = 0; i < 4; ++i) {
      if (values[i] == 0.0)
        face[k++] = corners[i];
      else
        fourth = values[i];
    }
    if (fourth < 0.0) out.push_back(face);
    return out;
  }

  std::vector<Vec3> pts;
  for (int i = 0; i < 4; ++i)
    if (values[i] == 0.0) pts.push_back(corners[i]);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      if (values[i] * values[j] >= 0.0) continue;
      // canonical endpoint order keeps the crossing bitwise identical
      // when the same edge is seen from a neighboring tet
      int a = i, b = j;
      if (lex_less(corners[j], corners[i])) std::swap(a, b);
      const double t = values[a] / (values[a] - values[b]);
      pts.push_back(corners[a] + t * (corners[b] - corners[a]));
    }

  if (pts.size() < 3) return out;
  if (pts.size() == 3) {
    out.push_back({pts[0], pts[1], pts[2]});
    return out;
  }

  // planar quad: order the corners by angle, then split along the
  // shorter diagonal
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : pts) c += p;
  c /= double(pts.size());
  const Vec3 nrm = (pts[1] - pts[0]).cross(pts[2] - pts[0]);
  Vec3 e1 = (pts[1] - pts[0]).normalized();
  Vec3 e2 = nrm.cross(e1).normalized();
  std::array<int, 4> order = {0, 1, 2, 3};
  std::array<double, 4> ang;
  for (int i = 0; i < 4; ++i)
    ang[i] = std::atan2((pts[i] - c).dot(e2), (pts[i] - c).dot(e1));
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return ang[a] < ang[b]; });
  const Vec3 q0 = pts[order[0]], q1 = pts[order[1]], q2 = pts[order[2]],
             q3 = pts[order[3]];
  if ((q2 - q0).squaredNorm() <= (q3 - q1).squaredNorm()) {
    out.push_back({q0, q1, q2});
    out.push_back({q0, q2, q3});
  } else {
    out.push_back({q1, q2, q3});
    out.push_back({q1, q3, q0});
  }
  return out;
}

namespace {

/// Sub-tets of the Kuhn tet T_p inside the unit cube when the cube is cut
/// into m^3 sub-cubes each split by the same Kuhn pattern. Every sub-tet
/// lies in exactly one T_p; we list, per sub-tet, its four corners in
/// units of the fine lattice (0..m per axis).
struct SubTet {
  std::array<std::array<int, 3>, 4> corners;
};

std::vector<SubTet> sublattice_template(int perm, int m) {
  const auto& p = kKuhnPerms[perm];
  std::vector<SubTet> list;
  list.reserve(size_t(m) * m * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int sp = 0; sp < 6; ++sp) {
          // barycenter of the sub-tet in fine lattice units, times 4
          const auto& sq = kKuhnPerms[sp];
          double bc[3] = {4.0 * a, 4.0 * b, 4.0 * c};
          bc[sq[0]] += 3.0;
          bc[sq[1]] += 2.0;
          bc[sq[2]] += 1.0;
          if (!(bc[p[0]] >= bc[p[1]] && bc[p[1]] >= bc[p[2]])) continue;
          SubTet st;
          for (int v = 0; v < 4; ++v) {
            const int mask = kKuhnTets[sp][v];
            st.corners[v] = {a + ((mask >> 0) & 1), b + ((mask >> 1) & 1),
                             c + ((mask >> 2) & 1)};
          }
          list.push_back(st);
        }
  if (int(list.size()) != m * m * m)
    throw NumericError("sub-lattice template has unexpected cardinality");
  return list;
}

} // namespace

CutSurface extract_cut_surface(const ActiveBand& band, const LevelSet& phi,
                               int m, int quad_degree) {
  if (m < 1) throw ConfigError("surface subdivision factor m must be >= 1");
  const BackgroundMesh& mesh = *band.parent;
  CutSurface cut;
  cut.mesh = &mesh;
  cut.band = &band;
  cut.phi = phi;
  cut.m = m;
  cut.quad_degree = quad_degree;

  std::array<std::vector<SubTet>, 6> templates;
  for (int p = 0; p < 6; ++p) templates[p] = sublattice_template(p, m);

  const Vec3 origin = mesh.origin();
  const double fine = mesh.h / double(m);
  const std::int64_t N = mesh.cells_per_axis;

  auto march_into = [&](int t) {
    const std::int64_t cell = mesh.tet_cell[t];
    const std::int64_t ci = cell % N, cj = (cell / N) % N, ck = cell / (N * N);
    const double drop_area = 1e-14 * mesh.tet_diameter(t) * mesh.tet_diameter(t);

    for (const SubTet& st : templates[mesh.tet_perm[t]]) {
      std::array<Vec3, 4> corners;
      std::array<double, 4> values;
      for (int v = 0; v < 4; ++v) {
        // global fine-lattice index keeps shared points bitwise identical
        const double I = double(ci * m + st.corners[v][0]);
        const double J = double(cj * m + st.corners[v][1]);
        const double K = double(ck * m + st.corners[v][2]);
        corners[v] = origin + fine * Vec3(I, J, K);
        values[v] = phi.value(corners[v]);
      }
      double mn = 1e300, mx = -1e300;
      for (const double v : values) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
      if (mn > 0.0 || mx < 0.0) continue;
      for (const auto& tri : marching_tet(corners, values)) {
        if (tri_area(tri) < drop_area) {
          ++cut.dropped;
          continue;
        }
        cut.triangles.push_back(tri);
      }
    }
  };

  cut.tet_offset.assign(band.cut_tets.size() + 1, 0);
  for (size_t c = 0; c < band.cut_tets.size(); ++c) {
    march_into(band.cut_tets[c]);
    cut.tet_offset[c + 1] = int(cut.triangles.size());
  }

  if (m > 1) {
    // The re-sampled zero set can dip through a face of a tet whose own
    // corner values are all one sign; collect those pieces in the extra
    // block. A centered slope bound screens out the tets that certainly
    // stay clear of the surface.
    std::vector<char> is_cut(mesh.tets.size(), 0);
    for (const int t : band.cut_tets) is_cut[t] = 1;
    const double hess_bound =
        (phi.kind == LevelSet::Kind::Sphere) ? 2.0 : 120.0;
    for (int t = 0; t < int(mesh.tets.size()); ++t) {
      if (is_cut[t]) continue;
      const auto& conn = mesh.tets[t];
      Vec3 cen = Vec3::Zero();
      for (int v = 0; v < 4; ++v) cen += mesh.vertices[conn[v]];
      cen *= 0.25;
      const double rad = 0.75 * mesh.tet_diameter(t);
      const double slope = phi.gradient(cen).norm() + hess_bound * rad;
      if (std::abs(phi.value(cen)) > slope * rad) continue;
      march_into(t);
    }
  }

  if (cut.dropped > 0)
    std::fprintf(stderr,
                 "[tracestokes] cut surface: dropped %ld degenerate triangles\n",
                 cut.dropped);
  return cut;
}

double CutSurface::tet_patch_area(int cut_index) const {
  double a = 0.0;
  for (int k = tet_offset[cut_index]; k < tet_offset[cut_index + 1]; ++k)
    a += tri_area(triangles[k]);
  return a;
}

double CutSurface::total_area() const {
  double a = 0.0;
  for (const auto& t : triangles) a += tri_area(t);
  return a;
}

double CutSurface::extra_area() const {
  double a = 0.0;
  for (size_t k = size_t(tet_offset.back()); k < triangles.size(); ++k)
    a += tri_area(triangles[k]);
  return a;
}

void CutSurface::for_each_point(
    int cut_index, const std::function<void(const Vec3&, double)>& fn) const {
  static thread_local int cached_degree = -1;
  static thread_local TriangleRule cached_rule;
  if (cached_degree != quad_degree) {
    cached_rule = triangle_rule(quad_degree);
    cached_degree = quad_degree;
  }
  for (int k = tet_offset[cut_index]; k < tet_offset[cut_index + 1]; ++k) {
    const auto& tri = triangles[k];
    const double scale = 2.0 * tri_area(tri); // reference weights sum to 1/2
    for (size_t q = 0; q < cached_rule.points.size(); ++q) {
      const double u = cached_rule.points[q][0], v = cached_rule.points[q][1];
      const Vec3 x = tri[0] + u * (tri[1] - tri[0]) + v * (tri[2] - tri[0]);
      fn(x, cached_rule.weights[q] * scale);
    }
  }
}

double surface_integrate(const CutSurface& cut,
                         const std::function<double(const Vec3&)>& f) {
  const TriangleRule rule = triangle_rule(cut.quad_degree);
  double sum = 0.0;
  for (const auto& tri : cut.triangles) {
    const double scale = 2.0 * tri_area(tri); // reference weights sum to 1/2
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double u = rule.points[q][0], v = rule.points[q][1];
      const Vec3 x = tri[0] + u * (tri[1] - tri[0]) + v * (tri[2] - tri[0]);
      sum += (rule.weights[q] * scale) * f(x);
    }
  }
  return sum;
}

BandQuadrature band_quadrature(const ActiveBand& band, int degree) {
  BandQuadrature bq;
  bq.mesh = band.parent;
  bq.band = &band;
  bq.rule = tet_rule(degree);
  return bq;
}

void BandQuadrature::for_each_point(
    int cut_index, const std::function<void(const Vec3&, double)>& fn) const {
  const int t = band->cut_tets[cut_index];
  const auto& conn = mesh->tets[t];
  const Vec3& p0 = mesh->vertices[conn[0]];
  const Vec3 e1 = mesh->vertices[conn[1]] - p0;
  const Vec3 e2 = mesh->vertices[conn[2]] - p0;
  const Vec3 e3 = mesh->vertices[conn[3]] - p0;
  const double scale = 6.0 * mesh->tet_volume(t); // reference weights sum to 1/6
  for (size_t q = 0; q < rule.points.size(); ++q) {
    const Vec3& r = rule.points[q];
    fn(p0 + r[0] * e1 + r[1] * e2 + r[2] * e3, rule.weights[q] * scale);
  }
}

DiagnosticReport check_mesh_assumption(const ActiveBand& band,
                                       const CutSurface& cut,
                                       double ratio_limit) {
  DiagnosticReport rep;
  const BackgroundMesh& mesh = *band.parent;
  const size_t n = band.cut_tets.size();
  rep.components.resize(n, 0);
  rep.boundary_ratio.resize(n, 0.0);

  for (size_t c = 0; c < n; ++c) {
    const int lo = cut.tet_offset[c], hi = cut.tet_offset[c + 1];
    const int ntri = hi - lo;
    if (ntri == 0) continue;

    // connect triangles sharing an edge (vertex keys quantized on the
    // scale of fp jitter)
    const double eps = 1e-9 * mesh.h;
    auto key_of = [&](const Vec3& p) {
      return std::array<long long, 3>{llround(p[0] / eps), llround(p[1] / eps),
                                      llround(p[2] / eps)};
    };
    using EdgeKey = std::array<long long, 6>;
    std::map<EdgeKey, std::vector<int>> edge_tris;
    std::map<EdgeKey, double> edge_len;
    for (int k = lo; k < hi; ++k) {
      const auto& tri = cut.triangles[k];
      for (int e = 0; e < 3; ++e) {
        auto a = key_of(tri[e]), b = key_of(tri[(e + 1) % 3]);
        if (b < a) std::swap(a, b);
        EdgeKey ek = {a[0], a[1], a[2], b[0], b[1], b[2]};
        edge_tris[ek].push_back(k - lo);
        edge_len[ek] = (tri[(e + 1) % 3] - tri[e]).norm();
      }
    }
    std::vector<int> root(ntri);
    for (int i = 0; i < ntri; ++i) root[i] = i;
    std::function<int(int)> find = [&](int i) {
      while (root[i] != i) i = root[i] = root[root[i]];
      return i;
    };
    double boundary = 0.0;
    for (const auto& [ek, tris] : edge_tris) {
      if (tris.size() == 1) boundary += edge_len[ek];
      for (size_t i = 1; i < tris.size(); ++i)
        root[find(tris[i])] = find(tris[0]);
    }
    int comps = 0;
    for (int i = 0; i < ntri; ++i)
      if (find(i) == i) ++comps;
    rep.components[c] = comps;
    rep.boundary_ratio[c] = boundary / mesh.tet_diameter(band.cut_tets[c]);
    if (comps > 1 || rep.boundary_ratio[c] > ratio_limit)
      rep.flagged.push_back(int(c));
    rep.max_components = std::max(rep.max_components, comps);
    rep.max_ratio = std::max(rep.max_ratio, rep.boundary_ratio[c]);
  }
  return rep;
}

void dump_surface(const CutSurface& cut, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("cannot open surface dump file: " + path);
  for (const auto& tri : cut.triangles)
    std::fprintf(f, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                 tri[0][0], tri[0][1], tri[0][2], tri[1][0], tri[1][1],
                 tri[1][2], tri[2][0], tri[2][1], tri[2][2]);
  std::fclose(f);
}

} // namespace ts
