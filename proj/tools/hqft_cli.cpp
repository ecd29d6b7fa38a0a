// Command-line entry point. Exit codes: 0 pass, 1 verification failure, 2 config error.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hqft/cli/run.hpp"

namespace {

constexpr int kConfigError = 2;

}  // namespace

int main(int argc, char** argv) {
  using namespace hqft::cli;
  CLI::App app{"Exact lattice checks of free field theories, their quantization and AQFT axioms"};
  app.require_subcommand(1, 1);
  app.fallthrough();  // flags may follow the subcommand

  RunConfig config;
  std::string dt = "1", dx = "1", mass = "0", theory = "KG", config_file;
  std::size_t cap = config.cap;
  std::uint64_t seed = config.seed;
  app.add_option("--nt", config.nt, "time slices")->capture_default_str();
  app.add_option("--nx", config.nx, "spatial sites on the circle")->capture_default_str();
  app.add_option("--dt", dt, "time step (rational)")->capture_default_str();
  app.add_option("--dx", dx, "space step (rational)")->capture_default_str();
  app.add_option("--mass", mass, "KG mass (rational)")->capture_default_str();
  app.add_option("--theory", theory, "KG or YM for homology, zigzag and report")->capture_default_str();
  app.add_option("--cap", cap, "CCR word-length cap")->capture_default_str();
  app.add_option("--seed", seed, "random seed")->capture_default_str();
  app.add_option("--out", config.out, "report JSON path");
  app.add_option("--config", config_file, "JSON config file; its keys override flags");

  for (const auto& c : commands()) {
    std::string help = c == "verify-kg"   ? "full KG pipeline"
                       : c == "verify-ym" ? "full YM pipeline"
                       : c == "homology"  ? "homology rank table"
                       : c == "zigzag"    ? "Heisenberg zig-zag suite"
                                          : "all suites for the configured theory";
    app.add_subcommand(c, help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunResult result;
  try {
    config.dt = hqft::parse_scalar(dt);
    config.dx = hqft::parse_scalar(dx);
    config.mass = hqft::parse_scalar(mass);
    config.theory = parse_theory(theory);
    config.cap = cap;
    config.seed = seed;
    if (!config_file.empty()) load_config_file(config, config_file);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    result = run(command, config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "verification aborted: " << e.what() << "\n";
    return 1;
  }
  std::cout << result.summary;
  if (!config.out.empty()) {
    std::ofstream out(config.out);
    if (!out) {
      std::cerr << "cannot write " << config.out << "\n";
      return kConfigError;
    }
    out << result.report.dump(2) << "\n";
  }
  return result.exit_code;
}
