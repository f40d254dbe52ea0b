#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "tracestokes/experiments.hpp"

namespace py = pybind11;
using namespace ts;

namespace {

ExperimentConfig make_config(const std::string& text,
                             const std::vector<std::string>& overrides) {
  ExperimentConfig config =
      text.empty() ? ExperimentConfig{} : parse_config_text(text);
  for (const std::string& assignment : overrides)
    apply_override(config, assignment);
  return config;
}

double surface_area(const std::string& surface, int level, int m, double R,
                    double r) {
  ExperimentConfig config;
  config.surface = surface;
  config.torus_R = R;
  config.torus_r = r;
  config.m_quad = m;
  const Instance inst = build_instance(config, level, 0.0, m);
  return inst.cut->total_area();
}

py::dict infsup_level(const std::string& surface, int level,
                      const std::string& pair, const std::string& stab,
                      double epsilon, int m, double shift_alpha) {
  ExperimentConfig config;
  config.surface = surface;
  config.pair = pair;
  config.epsilon = epsilon;
  const Instance inst =
      build_instance(config, level, shift_alpha, m > 0 ? m : 1);
  const AssembledSystem sys = build_system(inst, config, stab);
  const EigenResult eig = infsup_sparse(sys, epsilon, config.n_small);

  py::dict out;
  out["h"] = inst.h;
  out["n"] = sys.A.rows();
  out["m"] = sys.B.rows();
  out["lambda1"] = eig.lambda1;
  out["lambda2"] = eig.lambda2;
  out["lambda_m"] = eig.lambda_m;
  out["method"] = eig.method;
  return out;
}

py::dict converge_level(int level, const std::string& stab, double tol,
                        int maxit) {
  ExperimentConfig config;
  config.tol = tol;
  config.maxit = maxit;
  ManufacturedSolution sol = sphere_solution();
  sol.alpha = config.alpha;

  const Instance inst = build_instance(config, level, 0.0, 0);
  const AssembledSystem sys = build_system(inst, config, stab, &sol);
  const SaddleSolveResult result = solve_saddle(sys, tol, maxit);
  const FEFunction u_h{inst.vel.get(), result.u_coeffs};
  const FEFunction p_h{inst.pres.get(), result.p_coeffs};
  const ErrorReport err = compute_errors(u_h, p_h, sol, *inst.cut);

  py::dict out;
  out["h"] = inst.h;
  out["n"] = sys.A.rows();
  out["m"] = sys.B.rows();
  out["h1_u"] = err.h1_u;
  out["l2_u"] = err.l2_u;
  out["l2_p"] = err.l2_p;
  out["l2_un"] = err.l2_un;
  out["iterations"] = result.iterations;
  out["residual"] = result.final_residual;
  return out;
}

std::string study(const std::string& kind, const std::string& config_text,
                  const std::vector<std::string>& overrides) {
  const ExperimentConfig config = make_config(config_text, overrides);
  ExperimentReport report;
  if (kind == "converge")
    report = run_convergence(config);
  else if (kind == "infsup")
    report = run_infsup(config);
  else if (kind == "shift")
    report = run_shift_study(config);
  else if (kind == "diagnose")
    report = run_diagnose(config);
  else
    throw ConfigError("unknown study kind '" + kind +
                      "' (expected converge, infsup, shift or diagnose)");
  std::ostringstream out;
  write_csv(report, out);
  return out.str();
}

} // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "trace finite element studies of the surface Stokes problem";
  mod.attr("__version__") = "0.1.0";

  py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);
  py::register_exception<UsageError>(mod, "UsageError", PyExc_ValueError);
  py::register_exception<GeometryError>(mod, "GeometryError",
                                        PyExc_RuntimeError);
  py::register_exception<NumericError>(mod, "NumericError",
                                       PyExc_RuntimeError);

  mod.def("area", &surface_area, py::arg("surface") = "sphere",
          py::arg("level") = 3, py::arg("m") = 0, py::arg("R") = 1.0,
          py::arg("r") = 0.2,
          "Area of the piecewise planar surface approximation; m = 0 picks "
          "the subdivision factor ceil(1/h).");

  mod.def("infsup", &infsup_level, py::arg("surface") = "sphere",
          py::arg("level") = 2, py::arg("pair") = "p2p1",
          py::arg("stabilization") = "normal", py::arg("epsilon") = 1e-6,
          py::arg("m") = 1, py::arg("shift_alpha") = 0.0,
          "Extreme eigenvalues of the stabilized pressure pencil on one "
          "level.");

  mod.def("converge", &converge_level, py::arg("level") = 2,
          py::arg("stabilization") = "normal", py::arg("tol") = 1e-8,
          py::arg("maxit") = 500,
          "Solve the manufactured sphere problem on one level and report "
          "error norms.");

  mod.def("study", &study, py::arg("kind"), py::arg("config") = "",
          py::arg("overrides") = std::vector<std::string>{},
          "Run a full study (converge, infsup, shift or diagnose) and "
          "return its CSV report.");
}
