#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tracestokes/experiments.hpp"

namespace {

int run(const CLI::App& app, const std::string& config_path,
        const std::string& out_dir, const std::vector<std::string>& overrides,
        const std::string& dump_dir) {
  ts::ExperimentConfig config;
  if (!config_path.empty()) config = ts::parse_config_file(config_path);
  for (const std::string& assignment : overrides)
    ts::apply_override(config, assignment);
  if (!dump_dir.empty()) config.dump_dir = dump_dir;

  if (app.got_subcommand("dump")) {
    ts::run_dump(config, out_dir);
    std::cout << "wrote dumps to " << out_dir << "\n";
    return 0;
  }

  ts::ExperimentReport report;
  if (app.got_subcommand("converge"))
    report = ts::run_convergence(config);
  else if (app.got_subcommand("infsup"))
    report = ts::run_infsup(config);
  else if (app.got_subcommand("shift"))
    report = ts::run_shift_study(config);
  else
    report = ts::run_diagnose(config);

  std::filesystem::create_directories(out_dir);
  const std::string path = out_dir + "/" + report.name + ".csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ts::ConfigError("cannot open " + path + " for writing");
  ts::write_csv(report, out);
  out.close();
  std::cout << "wrote " << path << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"trace finite element studies of the surface Stokes problem"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string dump_dir;
  std::vector<std::string> overrides;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "configuration file with key = value lines");
    sub->add_option("--out", out_dir, "output directory")
        ->capture_default_str();
    sub->add_option("--set", overrides,
                    "override one config entry, key=value (repeatable)");
    sub->add_option("--dump-matrices", dump_dir,
                    "export every assembled system to this directory");
  };
  add_common(app.add_subcommand(
      "converge", "manufactured-solution convergence study on the sphere"));
  add_common(app.add_subcommand(
      "infsup", "extreme eigenvalues of the pressure pencil per level"));
  add_common(app.add_subcommand(
      "shift", "eigenvalue robustness while the surface moves through the mesh"));
  add_common(app.add_subcommand(
      "diagnose", "mesh, band and surface statistics per level"));
  add_common(app.add_subcommand(
      "dump", "export meshes, surfaces and matrices per level"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return run(app, config_path, out_dir, overrides, dump_dir);
  } catch (const ts::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ts::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ts::GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return 3;
  } catch (const ts::NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
