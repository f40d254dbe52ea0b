#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tracestokes/eigen_solver.hpp"
#include "tracestokes/exact_solution.hpp"
#include "tracestokes/saddle_solver.hpp"

namespace ts {

/// Flat key = value configuration shared by all studies. Every key has a
/// default; lists are comma separated and `levels` also accepts ranges
/// ("2-4"). Unknown keys and malformed values raise ConfigError.
struct ExperimentConfig {
  std::string surface = "sphere"; // sphere | torus
  double torus_R = 1.0;           // torus centerline radius
  double torus_r = 0.2;           // torus tube radius
  std::vector<int> levels = {2, 3, 4};
  std::string pair = "p2p1"; // p2p1 | p1p1
  std::string form = "auto"; // consistent | inconsistent | auto (by degree)
  /// subset of none | normal | full; empty picks the per-study default
  /// (normal, except the shift study which runs none and normal)
  std::vector<std::string> stabilizations;
  double c_tau = 1.0; // tau = c_tau / h^2
  std::string mass_side = "auto"; // mass side of the eigen pencil: the
                                  // stabilization itself, or forced normal/full
  double c_p = 1.0;   // rho_p = c_p * h
  double c_u = 1.0;   // rho_u = c_u * h^{+-1} per rho_u_scaling
  std::string rho_u_scaling = "auto"; // h | hinv | auto (hinv for P2, h for P1)
  double alpha = 1.0;                 // zeroth-order coefficient
  double epsilon = 1e-6;              // eigenvalue perturbation
  double tol = 1e-8;                  // Krylov tolerance
  int maxit = 500;                    // Krylov iteration cap
  int n_small = 1;       // nonzero small eigenvalues resolved by the sparse path
  int m_quad = 0;        // surface subdivision; 0 = ceil(1/h) for convergence
                         // and diagnose runs, 1 for the eigenvalue studies
  int quad_degree = 4;   // quadrature degree on triangles and tets
  Vec3 shift_dir{1.0, 1.0, 1.0}; // normalized on parse and echo
  double shift_alpha = 0.0;      // surface displacement along shift_dir
  std::vector<double> shift_alphas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  int shift_level = 4;     // refinement level of the shift study
  int dense_cap = 3000;    // pressure dimension limit of the dense eigenpath
  std::string cross_check = "auto"; // auto | on | off: dense verification of
                                    // sparse eigenvalues when m <= dense_cap
  std::string dump_dir; // when nonempty, every assembled system is exported
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Apply one "key=value" assignment (same grammar as a config line).
void apply_override(ExperimentConfig& config, const std::string& assignment);

/// Canonical (key, value) list covering every key; parsing it back
/// reproduces the configuration.
std::vector<std::pair<std::string, std::string>>
echo_config(const ExperimentConfig& config);

/// Shortest decimal string that parses back to exactly v.
std::string format_double(double v);

/// Table with a config echo. Cells are absent (empty in CSV) where a value
/// is undefined, e.g. the EOC of the first level, or every result column of
/// a level whose pipeline failed; the failure text then sits in row_errors.
struct ExperimentReport {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;
  std::vector<std::string> row_errors; // aligned with rows, "" when clean
  std::vector<std::pair<std::string, std::string>> config_echo;
};

/// '#'-commented config echo, a header line, then one comma-separated line
/// per row. A trailing "error" column carries the row_errors strings.
void write_csv(const ExperimentReport& report, std::ostream& out);

/// Geometry and spaces of one refinement level. Members live on the heap
/// because band, spaces and quadratures keep pointers to their parents.
struct Instance {
  std::unique_ptr<BackgroundMesh> mesh;
  std::unique_ptr<ActiveBand> band;
  std::unique_ptr<CutSurface> cut;
  std::unique_ptr<BandQuadrature> bandq;
  std::unique_ptr<DiscreteSpace> vel;
  std::unique_ptr<DiscreteSpace> pres;
  double h = 0.0;
  int subdiv = 1; // surface subdivision factor used
};

LevelSet make_level_set(const ExperimentConfig& config, double shift_alpha);

Instance build_instance(const ExperimentConfig& config, int level,
                        double shift_alpha, int m_quad);

/// Weights from the caption constants: tau = c_tau/h^2, rho_p = c_p h,
/// rho_u per scaling rule, strain variant per `form`. The stabilization
/// member is left at its default and set per study.
FormParameters resolve_parameters(const ExperimentConfig& config, double h,
                                  int velocity_degree);

/// Assemble the saddle system for one stabilization choice ("none",
/// "normal" or "full"). Mstar pairs M0 with the normal-direction
/// stabilization when stab is none, so the eigenvalue studies of the
/// unstabilized Schur complement keep a uniform mass scaling. Load vectors
/// are assembled when a manufactured solution is passed.
AssembledSystem build_system(const Instance& inst,
                             const ExperimentConfig& config,
                             const std::string& stab,
                             const ManufacturedSolution* sol = nullptr);

/// Solve the manufactured sphere problem per level and report error norms,
/// orders, iteration counts and residuals. Requires surface = sphere,
/// pair = p2p1 and shift_alpha = 0.
ExperimentReport run_convergence(const ExperimentConfig& config);

/// Extreme eigenvalues lambda_2 and lambda_m of the stabilized pressure
/// pencil per level and stabilization, sparse path with a dense
/// cross-check where the pressure dimension allows it.
ExperimentReport run_infsup(const ExperimentConfig& config);

/// The infsup cells at a fixed level while the surface moves through the
/// mesh: one row per shift_alphas entry.
ExperimentReport run_shift_study(const ExperimentConfig& config);

/// Mesh and surface statistics per level: areas, cut counts, the regular
/// element fraction |Gamma_T| >= 0.01 h_T^2, patch component and boundary
/// ratio checks, and the tube resolution for the torus.
ExperimentReport run_diagnose(const ExperimentConfig& config);

/// Write mesh, surface and assembled matrices per level into out_dir.
void run_dump(const ExperimentConfig& config, const std::string& out_dir);

} // namespace ts
