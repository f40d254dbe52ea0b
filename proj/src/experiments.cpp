#include "tracestokes/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ts {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string::size_type pos = 0;
  while (pos <= value.size()) {
    auto comma = value.find(',', pos);
    if (comma == std::string::npos) comma = value.size();
    std::string item = trim(value.substr(pos, comma - pos));
    if (!item.empty()) items.push_back(item);
    pos = comma + 1;
  }
  return items;
}

double parse_double(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    throw ConfigError("config key '" + key + "': '" + value +
                      "' is not a number");
  return v;
}

long parse_int(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0')
    throw ConfigError("config key '" + key + "': '" + value +
                      "' is not an integer");
  return v;
}

std::vector<int> parse_levels(const std::string& key,
                              const std::string& value) {
  std::vector<int> levels;
  for (const std::string& item : split_list(value)) {
    auto dash = item.find('-', 1);
    if (dash != std::string::npos) {
      long a = parse_int(key, trim(item.substr(0, dash)));
      long b = parse_int(key, trim(item.substr(dash + 1)));
      if (b < a)
        throw ConfigError("config key '" + key + "': empty range '" + item +
                          "'");
      for (long l = a; l <= b; ++l) levels.push_back(static_cast<int>(l));
    } else {
      levels.push_back(static_cast<int>(parse_int(key, item)));
    }
  }
  if (levels.empty())
    throw ConfigError("config key '" + key + "': needs at least one level");
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  for (int l : levels)
    if (l < 0 || l > 10)
      throw ConfigError("config key '" + key + "': level " +
                        std::to_string(l) + " out of range 0..10");
  return levels;
}

Vec3 parse_vec3(const std::string& key, const std::string& value) {
  auto items = split_list(value);
  if (items.size() != 3)
    throw ConfigError("config key '" + key + "': expected three components");
  return Vec3(parse_double(key, items[0]), parse_double(key, items[1]),
              parse_double(key, items[2]));
}

Vec3 unit_or_throw(const Vec3& s) {
  double n = s.norm();
  if (!(n > 0.0)) throw ConfigError("shift_dir must be a nonzero vector");
  if (std::abs(n - 1.0) <= 1e-14) return s;
  return Vec3(s / n);
}

void check_choice(const std::string& key, const std::string& value,
                  std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (value == a) return;
  std::string msg = "config key '" + key + "': '" + value + "' is not one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw ConfigError(msg);
}

void set_key(ExperimentConfig& c, const std::string& key,
             const std::string& value) {
  if (key == "surface") {
    check_choice(key, value, {"sphere", "torus"});
    c.surface = value;
  } else if (key == "torus_R") {
    c.torus_R = parse_double(key, value);
  } else if (key == "torus_r") {
    c.torus_r = parse_double(key, value);
  } else if (key == "levels") {
    c.levels = parse_levels(key, value);
  } else if (key == "pair") {
    check_choice(key, value, {"p2p1", "p1p1"});
    c.pair = value;
  } else if (key == "form") {
    check_choice(key, value, {"consistent", "inconsistent", "auto"});
    c.form = value;
  } else if (key == "stabilization") {
    c.stabilizations = split_list(value);
    for (const std::string& s : c.stabilizations)
      check_choice(key, s, {"none", "normal", "full"});
  } else if (key == "mass_side") {
    check_choice(key, value, {"auto", "normal", "full"});
    c.mass_side = value;
  } else if (key == "c_tau") {
    c.c_tau = parse_double(key, value);
  } else if (key == "c_p") {
    c.c_p = parse_double(key, value);
  } else if (key == "c_u") {
    c.c_u = parse_double(key, value);
  } else if (key == "rho_u_scaling") {
    check_choice(key, value, {"h", "hinv", "auto"});
    c.rho_u_scaling = value;
  } else if (key == "alpha") {
    c.alpha = parse_double(key, value);
  } else if (key == "epsilon") {
    c.epsilon = parse_double(key, value);
    if (c.epsilon <= 0.0)
      throw ConfigError("config key 'epsilon': must be positive");
  } else if (key == "tol") {
    c.tol = parse_double(key, value);
    if (c.tol <= 0.0) throw ConfigError("config key 'tol': must be positive");
  } else if (key == "maxit") {
    c.maxit = static_cast<int>(parse_int(key, value));
    if (c.maxit < 1) throw ConfigError("config key 'maxit': must be >= 1");
  } else if (key == "n_small") {
    c.n_small = static_cast<int>(parse_int(key, value));
    if (c.n_small < 1) throw ConfigError("config key 'n_small': must be >= 1");
  } else if (key == "m_quad") {
    c.m_quad = static_cast<int>(parse_int(key, value));
    if (c.m_quad < 0) throw ConfigError("config key 'm_quad': must be >= 0");
  } else if (key == "quad_degree") {
    c.quad_degree = static_cast<int>(parse_int(key, value));
    if (c.quad_degree < 1)
      throw ConfigError("config key 'quad_degree': must be >= 1");
  } else if (key == "shift_dir") {
    c.shift_dir = unit_or_throw(parse_vec3(key, value));
  } else if (key == "shift_alpha") {
    c.shift_alpha = parse_double(key, value);
  } else if (key == "shift_alphas") {
    c.shift_alphas.clear();
    for (const std::string& item : split_list(value))
      c.shift_alphas.push_back(parse_double(key, item));
    if (c.shift_alphas.empty())
      throw ConfigError("config key 'shift_alphas': needs at least one value");
  } else if (key == "shift_level") {
    c.shift_level = static_cast<int>(parse_int(key, value));
    if (c.shift_level < 0 || c.shift_level > 10)
      throw ConfigError("config key 'shift_level': out of range 0..10");
  } else if (key == "dense_cap") {
    c.dense_cap = static_cast<int>(parse_int(key, value));
    if (c.dense_cap < 1)
      throw ConfigError("config key 'dense_cap': must be >= 1");
  } else if (key == "cross_check") {
    check_choice(key, value, {"auto", "on", "off"});
    c.cross_check = value;
  } else if (key == "dump_dir") {
    c.dump_dir = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void validate(const ExperimentConfig& c) {
  if (!(c.torus_R > c.torus_r) || !(c.torus_r > 0.0))
    throw ConfigError("torus radii must satisfy torus_R > torus_r > 0");
  if (c.alpha < 0.0) throw ConfigError("alpha must be nonnegative");
  if (c.c_tau < 0.0 || c.c_p < 0.0 || c.c_u < 0.0)
    throw ConfigError("the constants c_tau, c_p, c_u must be nonnegative");
}

double level_h(int level) { return (5.0 / 3.0) * std::pow(2.0, -level); }

int resolve_subdiv(const ExperimentConfig& c, int level, bool geometric) {
  if (c.m_quad > 0) return c.m_quad;
  if (!geometric) return 1;
  return static_cast<int>(std::ceil(1.0 / level_h(level)));
}

std::vector<std::string> resolve_stabs(const ExperimentConfig& c,
                                       std::vector<std::string> fallback) {
  return c.stabilizations.empty() ? std::move(fallback) : c.stabilizations;
}

PressureStab parse_stab(const std::string& stab) {
  if (stab == "none") return PressureStab::None;
  if (stab == "normal") return PressureStab::Normal;
  if (stab == "full") return PressureStab::Full;
  throw ConfigError("unknown stabilization '" + stab + "'");
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

/// store a computed value; a nonfinite value leaves the cell empty and is
/// recorded in the row error instead
void set_cell(std::vector<std::optional<double>>& row, size_t idx, double v,
              std::string& row_error, const std::string& what) {
  if (std::isfinite(v)) {
    row[idx] = v;
  } else {
    if (!row_error.empty()) row_error += "; ";
    row_error += what + " is not finite";
  }
}

void append_error(std::string& row_error, const std::string& what) {
  if (!row_error.empty()) row_error += "; ";
  row_error += what;
}

void dump_vector(const Eigen::VectorXd& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << i << ' ' << v[i] << '\n';
}

void dump_system(const AssembledSystem& sys, const std::string& dir,
                 const std::string& tag) {
  std::filesystem::create_directories(dir);
  dump_matrix(sys.A, dir + "/A_" + tag + ".txt");
  dump_matrix(sys.B, dir + "/B_" + tag + ".txt");
  dump_matrix(sys.C, dir + "/C_" + tag + ".txt");
  dump_matrix(sys.M0, dir + "/M0_" + tag + ".txt");
  dump_matrix(sys.Mstar, dir + "/Mstar_" + tag + ".txt");
  if (sys.f_vec.size() > 0) dump_vector(sys.f_vec, dir + "/f_" + tag + ".txt");
  if (sys.g_vec.size() > 0) dump_vector(sys.g_vec, dir + "/g_" + tag + ".txt");
}

int velocity_degree(const ExperimentConfig& c) {
  if (c.pair == "p2p1") return 2;
  if (c.pair == "p1p1") return 1;
  throw ConfigError("unknown velocity/pressure pair '" + c.pair + "'");
}

double rel_diff(double a, double b) {
  double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

struct EigenCells {
  std::optional<double> lambda2;
  std::optional<double> lambda_m;
  std::string error;
};

/// one (level, stabilization) cell of the eigenvalue studies; shared by the
/// refinement and the shift study so that matching configurations produce
/// bitwise identical results
EigenCells eigen_cells(const AssembledSystem& sys,
                       const ExperimentConfig& config,
                       const std::string& where) {
  EigenCells cells;
  try {
    EigenResult sparse = infsup_sparse(sys, config.epsilon, config.n_small);
    cells.lambda2 = sparse.lambda_list.at(1);
    cells.lambda_m = sparse.lambda_list.back();
    const int m = static_cast<int>(sys.M0.rows());
    if (config.cross_check != "off" && m <= config.dense_cap) {
      try {
        EigenResult dense = infsup_dense(sys, config.dense_cap);
        double d2 = rel_diff(*cells.lambda2, dense.lambda2);
        double dm = rel_diff(*cells.lambda_m, dense.lambda_m);
        if (d2 > 1e-5 || dm > 1e-5)
          std::cerr << "warning: dense cross-check mismatch at " << where
                    << ": lambda2 rel " << d2 << ", lambda_m rel " << dm
                    << "\n";
      } catch (const std::exception& e) {
        std::cerr << "warning: dense cross-check failed at " << where << ": "
                  << e.what() << "\n";
      }
    }
  } catch (const std::exception& e) {
    cells.error = where + ": " + e.what();
  }
  return cells;
}

} // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    set_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  config.shift_dir = unit_or_throw(config.shift_dir);
  validate(config);
  return config;
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + assignment + "': expected key=value");
  set_key(config, trim(assignment.substr(0, eq)),
          trim(assignment.substr(eq + 1)));
  config.shift_dir = unit_or_throw(config.shift_dir);
  validate(config);
}

std::string format_double(double v) {
  if (v == 0.0) return "0";
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::vector<std::pair<std::string, std::string>>
echo_config(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> echo;
  echo.emplace_back("surface", c.surface);
  echo.emplace_back("torus_R", format_double(c.torus_R));
  echo.emplace_back("torus_r", format_double(c.torus_r));
  {
    std::string levels;
    for (size_t i = 0; i < c.levels.size(); ++i) {
      if (i) levels += ",";
      levels += std::to_string(c.levels[i]);
    }
    echo.emplace_back("levels", levels);
  }
  echo.emplace_back("pair", c.pair);
  echo.emplace_back("form", c.form);
  echo.emplace_back("stabilization", join_list(c.stabilizations));
  echo.emplace_back("mass_side", c.mass_side);
  echo.emplace_back("c_tau", format_double(c.c_tau));
  echo.emplace_back("c_p", format_double(c.c_p));
  echo.emplace_back("c_u", format_double(c.c_u));
  echo.emplace_back("rho_u_scaling", c.rho_u_scaling);
  echo.emplace_back("alpha", format_double(c.alpha));
  echo.emplace_back("epsilon", format_double(c.epsilon));
  echo.emplace_back("tol", format_double(c.tol));
  echo.emplace_back("maxit", std::to_string(c.maxit));
  echo.emplace_back("n_small", std::to_string(c.n_small));
  echo.emplace_back("m_quad", std::to_string(c.m_quad));
  echo.emplace_back("quad_degree", std::to_string(c.quad_degree));
  {
    Vec3 s = unit_or_throw(c.shift_dir);
    echo.emplace_back("shift_dir", format_double(s[0]) + "," +
                                       format_double(s[1]) + "," +
                                       format_double(s[2]));
  }
  echo.emplace_back("shift_alpha", format_double(c.shift_alpha));
  {
    std::string alphas;
    for (size_t i = 0; i < c.shift_alphas.size(); ++i) {
      if (i) alphas += ",";
      alphas += format_double(c.shift_alphas[i]);
    }
    echo.emplace_back("shift_alphas", alphas);
  }
  echo.emplace_back("shift_level", std::to_string(c.shift_level));
  echo.emplace_back("dense_cap", std::to_string(c.dense_cap));
  echo.emplace_back("cross_check", c.cross_check);
  echo.emplace_back("dump_dir", c.dump_dir);
  return echo;
}

void write_csv(const ExperimentReport& report, std::ostream& out) {
  out << "# " << report.name << "\n";
  for (const auto& kv : report.config_echo)
    out << "# " << kv.first << " = " << kv.second << "\n";
  for (size_t i = 0; i < report.columns.size(); ++i) {
    if (i) out << ",";
    out << report.columns[i];
  }
  out << ",error\n";
  for (size_t r = 0; r < report.rows.size(); ++r) {
    const auto& row = report.rows[r];
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      if (row[i]) out << format_double(*row[i]);
    }
    out << ",";
    if (r < report.row_errors.size()) out << csv_escape(report.row_errors[r]);
    out << "\n";
  }
}

LevelSet make_level_set(const ExperimentConfig& config, double shift_alpha) {
  LevelSet base;
  if (config.surface == "sphere") {
    base = LevelSet::sphere();
  } else if (config.surface == "torus") {
    base = LevelSet::torus(config.torus_R, config.torus_r);
  } else {
    throw ConfigError("unknown surface '" + config.surface + "'");
  }
  if (shift_alpha == 0.0) return base;
  return base.shifted(unit_or_throw(config.shift_dir), shift_alpha);
}

Instance build_instance(const ExperimentConfig& config, int level,
                        double shift_alpha, int m_quad) {
  if (level < 0 || level > 10)
    throw ConfigError("level " + std::to_string(level) +
                      " out of range 0..10");
  if (m_quad < 1) throw ConfigError("surface subdivision must be >= 1");
  LevelSet phi = make_level_set(config, shift_alpha);
  Instance inst;
  inst.mesh = std::make_unique<BackgroundMesh>(build_mesh(level, phi));
  inst.band = std::make_unique<ActiveBand>(extract_active_band(*inst.mesh, phi));
  if (inst.band->cut_tets.empty())
    throw GeometryError("no cut tetrahedra at level " + std::to_string(level));
  inst.cut = std::make_unique<CutSurface>(
      extract_cut_surface(*inst.band, phi, m_quad, config.quad_degree));
  inst.bandq = std::make_unique<BandQuadrature>(
      band_quadrature(*inst.band, config.quad_degree));
  inst.vel =
      std::make_unique<DiscreteSpace>(build_space(*inst.band, velocity_degree(config), 3));
  inst.pres = std::make_unique<DiscreteSpace>(build_space(*inst.band, 1, 1));
  inst.h = inst.mesh->h;
  inst.subdiv = m_quad;
  if (config.surface == "torus") {
    double across = 2.0 * config.torus_r / inst.h;
    if (across < 8.0)
      std::cerr << "warning: only " << format_double(across)
                << " elements across the torus tube diameter at level "
                << level << "; the geometry may be under-resolved\n";
  }
  return inst;
}

FormParameters resolve_parameters(const ExperimentConfig& config, double h,
                                  int velocity_degree) {
  FormParameters params = default_parameters(h, velocity_degree);
  params.tau = config.c_tau / (h * h);
  params.rho_p = config.c_p * h;
  if (config.rho_u_scaling == "h")
    params.rho_u = config.c_u * h;
  else if (config.rho_u_scaling == "hinv")
    params.rho_u = config.c_u / h;
  else if (config.rho_u_scaling == "auto")
    params.rho_u = velocity_degree == 2 ? config.c_u / h : config.c_u * h;
  else
    throw ConfigError("unknown rho_u_scaling '" + config.rho_u_scaling + "'");
  if (config.form == "consistent")
    params.consistent = true;
  else if (config.form == "inconsistent")
    params.consistent = false;
  else if (config.form != "auto")
    throw ConfigError("unknown form '" + config.form + "'");
  params.alpha = config.alpha;
  return params;
}

AssembledSystem build_system(const Instance& inst,
                             const ExperimentConfig& config,
                             const std::string& stab,
                             const ManufacturedSolution* sol) {
  FormParameters params =
      resolve_parameters(config, inst.h, inst.vel->degree);
  params.stabilization = parse_stab(stab);
  AssembledSystem sys;
  sys.params = params;
  sys.level = inst.mesh->level;
  sys.surface_id = config.surface;
  if (inst.band->phi.shift_amount != 0.0)
    sys.surface_id += "+shift";
  sys.A = assemble_A(*inst.vel, *inst.cut, *inst.bandq, params);
  sys.B = assemble_B(*inst.vel, *inst.pres, *inst.cut);
  sys.C = assemble_C(*inst.pres, *inst.bandq, params);
  SparseMatrix mass_side;
  if (config.mass_side == "normal" || config.mass_side == "full") {
    FormParameters forced = params;
    forced.stabilization = config.mass_side == "full" ? PressureStab::Full
                                                      : PressureStab::Normal;
    mass_side = assemble_C(*inst.pres, *inst.bandq, forced);
  } else if (params.stabilization == PressureStab::None) {
    // the eigenvalue pencil of the unstabilized system still needs a
    // positive definite mass side; pair it with the normal-gradient one
    FormParameters normal = params;
    normal.stabilization = PressureStab::Normal;
    mass_side = assemble_C(*inst.pres, *inst.bandq, normal);
  } else {
    mass_side = sys.C;
  }
  std::tie(sys.M0, sys.Mstar) = assemble_mass(*inst.pres, *inst.cut, mass_side);
  if (sol) {
    auto f = [sol](const Vec3& x) { return sol->f(x); };
    auto g = [sol](const Vec3& x) { return sol->g(x); };
    std::tie(sys.f_vec, sys.g_vec) =
        assemble_rhs(*inst.vel, *inst.pres, *inst.cut, f, g);
  }
  return sys;
}

ExperimentReport run_convergence(const ExperimentConfig& config) {
  if (config.surface != "sphere")
    throw ConfigError("the convergence study requires surface = sphere");
  if (config.pair != "p2p1")
    throw ConfigError("the convergence study requires pair = p2p1");
  if (config.shift_alpha != 0.0)
    throw ConfigError("the convergence study requires shift_alpha = 0");
  const std::string stab = resolve_stabs(config, {"normal"}).front();

  ExperimentReport report;
  report.name = "converge";
  report.config_echo = echo_config(config);
  const bool with_eoc = config.levels.size() >= 2;
  report.columns = {"level", "h", "n", "m"};
  const char* metrics[4] = {"h1_u", "l2_u", "l2_p", "l2_un"};
  for (const char* metric : metrics) {
    report.columns.push_back(metric);
    if (with_eoc) report.columns.push_back(std::string("eoc_") + metric);
  }
  report.columns.push_back("iterations");
  report.columns.push_back("residual");

  ManufacturedSolution sol = sphere_solution();
  sol.alpha = config.alpha;

  std::optional<double> prev[4];
  for (int level : config.levels) {
    std::vector<std::optional<double>> row(report.columns.size());
    std::string row_error;
    row[0] = level;
    row[1] = level_h(level);
    try {
      Instance inst = build_instance(config, level, 0.0,
                                     resolve_subdiv(config, level, true));
      row[1] = inst.h;
      row[2] = inst.vel->total_dofs();
      row[3] = inst.pres->total_dofs();
      AssembledSystem sys = build_system(inst, config, stab, &sol);
      if (!config.dump_dir.empty())
        dump_system(sys, config.dump_dir,
                    "L" + std::to_string(level) + "_" + stab);
      SaddleSolveResult result = solve_saddle(sys, config.tol, config.maxit);
      FEFunction u_h{inst.vel.get(), result.u_coeffs};
      FEFunction p_h{inst.pres.get(), result.p_coeffs};
      ErrorReport err = compute_errors(u_h, p_h, sol, *inst.cut);
      const double values[4] = {err.h1_u, err.l2_u, err.l2_p, err.l2_un};
      size_t col = 4;
      for (int k = 0; k < 4; ++k) {
        set_cell(row, col, values[k], row_error, metrics[k]);
        ++col;
        if (with_eoc) {
          if (prev[k] && row[col - 1] && values[k] > 0.0)
            set_cell(row, col, std::log2(*prev[k] / values[k]), row_error,
                     std::string("eoc_") + metrics[k]);
          ++col;
        }
        prev[k] = row[col - (with_eoc ? 2 : 1)];
      }
      set_cell(row, col++, result.iterations, row_error, "iterations");
      set_cell(row, col++, result.final_residual, row_error, "residual");
    } catch (const std::exception& e) {
      append_error(row_error, e.what());
      for (int k = 0; k < 4; ++k) prev[k].reset();
      std::cerr << "error: convergence level " << level << ": " << e.what()
                << "\n";
    }
    report.rows.push_back(std::move(row));
    report.row_errors.push_back(std::move(row_error));
  }
  return report;
}

ExperimentReport run_infsup(const ExperimentConfig& config) {
  const std::vector<std::string> stabs = resolve_stabs(config, {"normal"});

  ExperimentReport report;
  report.name = "infsup";
  report.config_echo = echo_config(config);
  report.columns = {"level", "h", "n", "m"};
  for (const std::string& stab : stabs) {
    report.columns.push_back("lambda2_" + stab);
    report.columns.push_back("lambda_m_" + stab);
  }

  for (int level : config.levels) {
    std::vector<std::optional<double>> row(report.columns.size());
    std::string row_error;
    row[0] = level;
    row[1] = level_h(level);
    try {
      Instance inst = build_instance(config, level, config.shift_alpha,
                                     resolve_subdiv(config, level, false));
      row[1] = inst.h;
      row[2] = inst.vel->total_dofs();
      row[3] = inst.pres->total_dofs();
      size_t col = 4;
      for (const std::string& stab : stabs) {
        AssembledSystem sys = build_system(inst, config, stab);
        if (!config.dump_dir.empty())
          dump_system(sys, config.dump_dir,
                      "L" + std::to_string(level) + "_" + stab);
        EigenCells cells = eigen_cells(
            sys, config, "level " + std::to_string(level) + " " + stab);
        if (!cells.error.empty()) {
          append_error(row_error, cells.error);
          std::cerr << "error: infsup " << cells.error << "\n";
        }
        if (cells.lambda2)
          set_cell(row, col, *cells.lambda2, row_error, "lambda2_" + stab);
        if (cells.lambda_m)
          set_cell(row, col + 1, *cells.lambda_m, row_error,
                   "lambda_m_" + stab);
        col += 2;
      }
    } catch (const std::exception& e) {
      append_error(row_error, e.what());
      std::cerr << "error: infsup level " << level << ": " << e.what() << "\n";
    }
    report.rows.push_back(std::move(row));
    report.row_errors.push_back(std::move(row_error));
  }
  return report;
}

ExperimentReport run_shift_study(const ExperimentConfig& config) {
  const std::vector<std::string> stabs =
      resolve_stabs(config, {"none", "normal"});

  ExperimentReport report;
  report.name = "shift";
  report.config_echo = echo_config(config);
  report.columns = {"alpha_shift", "level", "h", "n", "m"};
  for (const std::string& stab : stabs) {
    report.columns.push_back("lambda2_" + stab);
    report.columns.push_back("lambda_m_" + stab);
  }

  const int level = config.shift_level;
  for (double alpha : config.shift_alphas) {
    std::vector<std::optional<double>> row(report.columns.size());
    std::string row_error;
    row[0] = alpha;
    row[1] = level;
    row[2] = level_h(level);
    try {
      Instance inst = build_instance(config, level, alpha,
                                     resolve_subdiv(config, level, false));
      row[2] = inst.h;
      row[3] = inst.vel->total_dofs();
      row[4] = inst.pres->total_dofs();
      size_t col = 5;
      for (const std::string& stab : stabs) {
        AssembledSystem sys = build_system(inst, config, stab);
        if (!config.dump_dir.empty())
          dump_system(sys, config.dump_dir,
                      "L" + std::to_string(level) + "_a" +
                          format_double(alpha) + "_" + stab);
        EigenCells cells = eigen_cells(
            sys, config, "alpha " + format_double(alpha) + " " + stab);
        if (!cells.error.empty()) {
          append_error(row_error, cells.error);
          std::cerr << "error: shift " << cells.error << "\n";
        }
        if (cells.lambda2)
          set_cell(row, col, *cells.lambda2, row_error, "lambda2_" + stab);
        if (cells.lambda_m)
          set_cell(row, col + 1, *cells.lambda_m, row_error,
                   "lambda_m_" + stab);
        col += 2;
      }
    } catch (const std::exception& e) {
      append_error(row_error, e.what());
      std::cerr << "error: shift alpha " << format_double(alpha) << ": "
                << e.what() << "\n";
    }
    report.rows.push_back(std::move(row));
    report.row_errors.push_back(std::move(row_error));
  }
  return report;
}

ExperimentReport run_diagnose(const ExperimentConfig& config) {
  ExperimentReport report;
  report.name = "diagnose";
  report.config_echo = echo_config(config);
  report.columns = {"level",        "h",
                    "cut_tets",     "n",
                    "m",            "area",
                    "exact_area",   "area_rel_err",
                    "regular_frac", "max_components",
                    "max_boundary_ratio", "flagged",
                    "tube_cells"};

  for (int level : config.levels) {
    std::vector<std::optional<double>> row(report.columns.size());
    std::string row_error;
    row[0] = level;
    row[1] = level_h(level);
    try {
      Instance inst = build_instance(config, level, config.shift_alpha,
                                     resolve_subdiv(config, level, true));
      row[1] = inst.h;
      row[2] = static_cast<double>(inst.band->cut_tets.size());
      row[3] = inst.vel->total_dofs();
      row[4] = inst.pres->total_dofs();
      const double area = inst.cut->total_area();
      const double exact = inst.band->phi.exact_area();
      set_cell(row, 5, area, row_error, "area");
      set_cell(row, 6, exact, row_error, "exact_area");
      set_cell(row, 7, std::abs(area - exact) / exact, row_error,
               "area_rel_err");
      const int ncut = static_cast<int>(inst.band->cut_tets.size());
      int regular = 0;
      for (int ci = 0; ci < ncut; ++ci) {
        const double ht = inst.mesh->tet_diameter(inst.band->cut_tets[ci]);
        if (inst.cut->tet_patch_area(ci) >= 0.01 * ht * ht) ++regular;
      }
      set_cell(row, 8, static_cast<double>(regular) / ncut, row_error,
               "regular_frac");
      DiagnosticReport diag = check_mesh_assumption(*inst.band, *inst.cut);
      row[9] = static_cast<double>(diag.max_components);
      set_cell(row, 10, diag.max_ratio, row_error, "max_boundary_ratio");
      row[11] = static_cast<double>(diag.flagged.size());
      if (config.surface == "torus")
        row[12] = 2.0 * config.torus_r / inst.h;
    } catch (const std::exception& e) {
      append_error(row_error, e.what());
      std::cerr << "error: diagnose level " << level << ": " << e.what()
                << "\n";
    }
    report.rows.push_back(std::move(row));
    report.row_errors.push_back(std::move(row_error));
  }
  return report;
}

void run_dump(const ExperimentConfig& config, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::vector<std::string> stabs = resolve_stabs(config, {"normal"});
  ManufacturedSolution sol = sphere_solution();
  sol.alpha = config.alpha;
  const bool with_rhs =
      config.surface == "sphere" && config.shift_alpha == 0.0;
  for (int level : config.levels) {
    Instance inst = build_instance(config, level, config.shift_alpha,
                                   resolve_subdiv(config, level, false));
    const std::string suffix = "L" + std::to_string(level);
    dump_mesh(*inst.mesh, out_dir + "/mesh_" + suffix + ".txt");
    dump_surface(*inst.cut, out_dir + "/surface_" + suffix + ".txt");
    for (const std::string& stab : stabs) {
      AssembledSystem sys =
          build_system(inst, config, stab, with_rhs ? &sol : nullptr);
      dump_system(sys, out_dir, suffix + "_" + stab);
    }
  }
}

} // namespace ts
