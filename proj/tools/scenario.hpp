#pragma once

#include <json.hpp>
#include <string>

namespace symot::cli {

inline constexpr const char* kVersion = "1.0.0";

// Exit codes of the `symot` executable: 0 all assertions pass, 1 usage/config
// error or guard violation, 2 assertion failure.
enum ExitCode { kOk = 0, kUsageError = 1, kAssertionFailure = 2 };

// Runs one scenario (or a batch array) from a parsed config; writes
// report.json and tables.csv under output_dir. Returns the exit code.
int run_scenarios(const nlohmann::json& config, const std::string& config_path);

// Strictly-correlated-electrons experiment: uniform density on (0,1) discretized as n
// midpoints, Coulomb cost, exact involution search. Prints the co-motion
// report; writes files when output_dir is nonempty.
int run_sce(int n, int N, const std::string& output_dir);

// `check-monotone <config>`: monotonicity tests only.
int run_check_monotone(const nlohmann::json& config, const std::string& config_path);

std::string git_blob_sha1(const std::string& content);

}  // namespace symot::cli
