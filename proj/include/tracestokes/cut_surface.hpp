#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "tracestokes/mesh.hpp"
#include "tracestokes/quadrature.hpp"

namespace ts {

/// Zero set of the linear interpolant of the corner values on one tet:
/// empty, one triangle, or a planar quad split along its shorter diagonal.
/// Corner values exactly zero put the corner on the surface; a face of
/// three zero corners is emitted only from the tet whose fourth corner is
/// negative, so transversal zero-faces are counted once.
std::vector<std::array<Vec3, 3>> marching_tet(
    const std::array<Vec3, 4>& corners, const std::array<double, 4>& values);

/// Piecewise planar approximation of the surface inside the active band.
/// For m == 1 the triangles are the marching-tet cuts of the band tets
/// themselves. For m > 1 each tet is divided into m^3 Kuhn sub-tets of the
/// global lattice at spacing h/m and the interpolant is re-sampled there,
/// which drives the geometric error down to O((h/m)^2). Triangles are
/// grouped per cut tet; quadrature points and exact frames are generated
/// on the fly.
///
/// With m > 1 the re-sampled zero set can also enter tets whose own corner
/// values are all of one sign (a thin feature dipping through a face, which
/// happens when the tube radius is only a few h). Those triangles are kept
/// in an extra block after the per-tet zone, [tet_offset.back(),
/// triangles.size()): they count towards total_area(), surface_integrate
/// and dump_surface, but they carry no element data, so assembly and error
/// evaluation never see them. For m == 1 the block is always empty.
struct CutSurface {
  const BackgroundMesh* mesh = nullptr;
  const ActiveBand* band = nullptr;
  LevelSet phi;
  int m = 1;
  int quad_degree = 4;

  std::vector<std::array<Vec3, 3>> triangles;
  std::vector<int> tet_offset; // CSR: triangles of cut tet c are [off[c], off[c+1])
  long dropped = 0;            // degenerate triangles discarded

  double tet_patch_area(int cut_index) const;
  double total_area() const;
  /// area of the extra block (pieces outside the cut tets)
  double extra_area() const;

  /// visit quadrature points of the patch in cut tet c
  void for_each_point(int cut_index,
                      const std::function<void(const Vec3&, double)>& fn) const;
};

CutSurface extract_cut_surface(const ActiveBand& band, const LevelSet& phi,
                               int m, int quad_degree = 4);

/// Quadrature sum of f over every triangle, extra block included.
double surface_integrate(const CutSurface& cut,
                         const std::function<double(const Vec3&)>& f);

/// Volume quadrature over the full cut tets (the band domain of the
/// stabilization integrals).
struct BandQuadrature {
  const BackgroundMesh* mesh = nullptr;
  const ActiveBand* band = nullptr;
  TetRule rule;

  void for_each_point(int cut_index,
                      const std::function<void(const Vec3&, double)>& fn) const;
};

BandQuadrature band_quadrature(const ActiveBand& band, int degree = 4);

/// Per-tet health check of the cut: number of connected components of the
/// patch and the length of its boundary on the tet faces relative to h_T.
struct DiagnosticReport {
  std::vector<int> components;       // per cut tet
  std::vector<double> boundary_ratio; // |dT ∩ Gamma_h| / h_T
  std::vector<int> flagged;          // cut indices failing either check
  int max_components = 0;
  double max_ratio = 0.0;
};

DiagnosticReport check_mesh_assumption(const ActiveBand& band,
                                       const CutSurface& cut,
                                       double ratio_limit = 10.0);

/// Plain-text triangle soup, one "x1 y1 z1 x2 y2 z2 x3 y3 z3" line each.
void dump_surface(const CutSurface& cut, const std::string& path);

} // namespace ts
