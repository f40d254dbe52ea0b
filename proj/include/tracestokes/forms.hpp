#pragma once

#include <functional>
#include <string>
#include <utility>

#include "tracestokes/cut_surface.hpp"
#include "tracestokes/fe_space.hpp"

namespace ts {

enum class PressureStab { None, Normal, Full };

/// Weights of the discrete forms. tau penalizes the normal velocity
/// component on the surface, rho_u the normal derivative of the velocity
/// over the band volume, rho_p the pressure gradient (full) or its normal
/// component (normal) over the band volume, alpha is the zeroth-order
/// reaction coefficient. With consistent set, the strain term subtracts
/// the curvature contribution u_N H of the normal velocity component from
/// each strain tensor before contracting.
struct FormParameters {
  double tau = 0.0;
  double rho_u = 0.0;
  double rho_p = 0.0;
  double alpha = 1.0;
  bool consistent = true;
  PressureStab stabilization = PressureStab::Normal;
};

/// tau = h^-2, rho_p = h; rho_u = h^-1 and the consistent strain for
/// quadratic velocity, rho_u = h and the plain strain for linear velocity.
FormParameters default_parameters(double h, int velocity_degree);

/// Sparse blocks of the discrete saddle system
///   [ A   B^T ] [u]   [ f ]
///   [ B  -C   ] [p] = [-g ]
/// together with the pressure mass matrices used by the eigenvalue
/// studies (M0 on the surface, Mstar = M0 + mass-side stabilization).
struct AssembledSystem {
  SparseMatrix A;     // n x n velocity block, SPD
  SparseMatrix B;     // m x n coupling, row i = b(., psi_i)
  SparseMatrix C;     // m x m pressure stabilization (zero matrix for none)
  SparseMatrix M0;    // m x m surface pressure mass
  SparseMatrix Mstar; // m x m, M0 + C of the mass-side stabilization
  Eigen::VectorXd f_vec;
  Eigen::VectorXd g_vec;
  FormParameters params;
  int level = -1;
  std::string surface_id;
};

/// The four summands of the velocity form, kept separate so the strain
/// energy of a discrete field can be inspected on its own:
///   strain  = 2 int_G E(u):E(v)                 (or the consistent variant)
///   mass    = alpha int_G u.v
///   penalty = tau int_G (u.n)(v.n)
///   volume  = rho_u int_B (grad u n).(grad v n)
struct VelocityFormParts {
  SparseMatrix strain;
  SparseMatrix mass;
  SparseMatrix penalty;
  SparseMatrix volume;
};

VelocityFormParts assemble_A_parts(const DiscreteSpace& vel,
                                   const CutSurface& cut,
                                   const BandQuadrature& bandq,
                                   const FormParameters& params);

/// Sum of the parts above.
SparseMatrix assemble_A(const DiscreteSpace& vel, const CutSurface& cut,
                        const BandQuadrature& bandq,
                        const FormParameters& params);

/// b(v, q) = int_G v . (P grad q), assembled in the integrated-by-parts
/// form so that only the tangential pressure gradient ever appears.
SparseMatrix assemble_B(const DiscreteSpace& vel, const DiscreteSpace& pres,
                        const CutSurface& cut);

/// rho_p int_B (n.grad p)(n.grad q) for normal stabilization,
/// rho_p int_B grad p . grad q for full, the zero matrix for none.
SparseMatrix assemble_C(const DiscreteSpace& pres, const BandQuadrature& bandq,
                        const FormParameters& params);

/// M0 entries int_G psi_j psi_i, and Mstar = M0 + C.
std::pair<SparseMatrix, SparseMatrix> assemble_mass(const DiscreteSpace& pres,
                                                    const CutSurface& cut,
                                                    const SparseMatrix& C);

/// Load vectors f_i = int_G f . phi_i and g_i = int_G g psi_i from
/// pointwise force and source callables.
std::pair<Eigen::VectorXd, Eigen::VectorXd> assemble_rhs(
    const DiscreteSpace& vel, const DiscreteSpace& pres, const CutSurface& cut,
    const std::function<Vec3(const Vec3&)>& f,
    const std::function<double(const Vec3&)>& g);

/// Matrix export, one "row col value" line per structural entry with 17
/// significant digits.
void dump_matrix(const SparseMatrix& mat, const std::string& path);

} // namespace ts
