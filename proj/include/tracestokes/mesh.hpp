#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tracestokes/level_set.hpp"
#include "tracestokes/types.hpp"

namespace ts {

/// Tetrahedral mesh of (part of) the cube Omega = (-5/3, 5/3)^3 at dyadic
/// refinement level ell, h = (5/3) * 2^-ell. Cells are axis-aligned cubes
/// of side h split into 6 Kuhn tets in a translation-invariant pattern, so
/// faces of neighboring cubes match. With a level set given, only cubes
/// near its zero set (cut cubes plus one buffer layer) are kept; without
/// one the full uniform grid is produced.
struct BackgroundMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;
  int level = 0;
  double h = 0.0;

  /// cube lattice bookkeeping used by the cut-surface sub-lattice
  int cells_per_axis = 0;                 // N = 2 * 2^level
  std::vector<std::int64_t> tet_cell;     // linear cube index per tet
  std::vector<int> tet_perm;              // Kuhn permutation id per tet

  Vec3 origin() const { return Vec3(-5.0 / 3.0, -5.0 / 3.0, -5.0 / 3.0); }
  double tet_volume(int t) const;
  double tet_diameter(int t) const;
  /// corner of the cube containing tet t
  Vec3 cell_corner(int t) const;
};

/// The Kuhn split of the unit cube: 6 tets indexed by permutations pi of
/// the axes, T_pi = {x : x_pi0 >= x_pi1 >= x_pi2}, listed as corner bit
/// masks (bit i set = offset 1 along axis i). Vertex order is chosen with
/// positive orientation.
extern const std::array<std::array<int, 4>, 6> kKuhnTets;
extern const std::array<std::array<int, 3>, 6> kKuhnPerms;

BackgroundMesh build_mesh(int level);
BackgroundMesh build_mesh(int level, const LevelSet& phi);

/// Elements cut by the zero set (vertex values of the P1 interpolant not
/// all of one strict sign; exact zeros count as cut) together with the
/// vertex-neighbor map omega(T) inside the cut set.
struct ActiveBand {
  const BackgroundMesh* parent = nullptr;
  LevelSet phi;
  std::vector<int> cut_tets;
  /// per cut tet (in cut_tets order), indices into cut_tets of all cut
  /// tets sharing at least one vertex, self included; symmetric
  std::vector<std::vector<int>> neighbor_map;
  /// level-set values at parent mesh vertices (cached for reuse)
  std::vector<double> vertex_phi;
};

ActiveBand extract_active_band(const BackgroundMesh& mesh, const LevelSet& phi);

/// Plain-text dump: "tets N vertices M level L" header, vertex coordinates,
/// then connectivity.
void dump_mesh(const BackgroundMesh& mesh, const std::string& path);

} // namespace ts
