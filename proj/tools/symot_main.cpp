#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"symot: symmetric multi-marginal Monge-Kantorovich solver suite"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run a scenario config (JSON), write report.json + tables.csv");
  run->add_option("config", config_path, "scenario config file")->required();

  int sce_n = 4, sce_N = 2;
  std::string sce_out;
  auto* sce = app.add_subcommand("sce", "strictly-correlated-electrons co-motion experiment");
  sce->add_option("--n", sce_n, "number of density atoms")->required();
  sce->add_option("--N", sce_N, "number of electrons (marginals)")->required();
  sce->add_option("--out", sce_out, "optional output directory");

  std::string cm_path;
  auto* cm = app.add_subcommand("check-monotone", "monotonicity tests for a vectorfield config");
  cm->add_option("config", cm_path, "scenario config file")->required();

  auto* ver = app.add_subcommand("version", "print version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ver->parsed()) {
      std::cout << "symot " << symot::cli::kVersion << '\n';
      return symot::cli::kOk;
    }
    if (sce->parsed()) return symot::cli::run_sce(sce_n, sce_N, sce_out);

    const std::string& path = run->parsed() ? config_path : cm_path;
    std::ifstream in(path);
    if (!in) {
      std::cerr << "error: cannot read config '" << path << "'\n";
      return symot::cli::kUsageError;
    }
    nlohmann::json cfg;
    try {
      cfg = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
      std::cerr << "error: config parse failure: " << e.what() << '\n';
      return symot::cli::kUsageError;
    }
    if (run->parsed()) return symot::cli::run_scenarios(cfg, path);
    return symot::cli::run_check_monotone(cfg, path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return symot::cli::kUsageError;
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return symot::cli::kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return symot::cli::kUsageError;
  }
}
