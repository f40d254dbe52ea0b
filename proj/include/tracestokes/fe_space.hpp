#pragma once

#include <functional>
#include <vector>

#include "tracestokes/mesh.hpp"

namespace ts {

/// Continuous Lagrange space (P1 or P2) over the cut tets of an active
/// band. Scalar DOFs are numbered by sorted vertex-index keys (vertex
/// nodes by their own index, edge midpoints by the sorted vertex pair),
/// which makes the numbering deterministic and conforming across shared
/// entities. Every DOF of every cut tet is kept. For vector spaces the
/// global unknown of scalar node s, component c is s*components + c.
struct DiscreteSpace {
  const ActiveBand* band = nullptr;
  int degree = 1;
  int components = 1;
  int dof_count = 0;                       // scalar nodes
  std::vector<std::array<int, 10>> dof_map; // per cut tet, local -> scalar node
  std::vector<Vec3> node_coords;

  int local_size() const { return degree == 1 ? 4 : 10; }
  int total_dofs() const { return dof_count * components; }
};

DiscreteSpace build_space(const ActiveBand& band, int degree, int components);

/// Local basis data at one point: values and physical gradients of the
/// scalar shape functions of the tet.
struct BasisEval {
  int n = 0;
  std::array<double, 10> value;
  std::array<Vec3, 10> grad;
};

/// Evaluate at x, which must lie in the given cut tet (barycentric
/// tolerance 1e-10, UsageError otherwise).
BasisEval eval_basis(const DiscreteSpace& space, int cut_index, const Vec3& x);

/// Same without the location check, for quadrature loops that generate
/// their points inside the element.
BasisEval eval_basis_unchecked(const DiscreteSpace& space, int cut_index,
                               const Vec3& x);

struct FEFunction {
  const DiscreteSpace* space = nullptr;
  Eigen::VectorXd coeffs;

  /// value of component c at x in cut tet (unchecked variant below)
  double eval(int cut_index, const Vec3& x, int component = 0) const;
};

/// Nodal interpolation of component-wise callables.
FEFunction interpolate(const DiscreteSpace& space,
                       const std::function<double(const Vec3&)>& f);
FEFunction interpolate(const DiscreteSpace& space,
                       const std::function<Vec3(const Vec3&)>& f);

} // namespace ts
