#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* bin() { return SYMOT_BIN; }

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run_cmd(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "symot_cli_log.txt";
  const std::string cmd = std::string(bin()) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  std::ifstream in(log);
  std::ostringstream ss;
  ss << in.rdbuf();
  return RunResult{WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, ss.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("symot_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

json strip_timings(json report) {
  report.erase("timings_ms");
  return report;
}

}  // namespace

TEST_CASE("version subcommand") {
  const auto r = run_cmd("version");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("symot") != std::string::npos);
}

TEST_CASE("exit 0 with a passing scenario and a well-formed report") {
  const fs::path dir = fresh_dir("ok");
  const std::string cfg = R"({
    "name": "quad",
    "instance": {"generator": {"type": "random-cloud", "n": 4, "d": 1, "seed": 3}},
    "N": 2,
    "cost": {"family": "quadratic"},
    "tasks": ["duality", "cyc"],
    "output_dir": ")" + dir.string() + R"("
  })";
  write_file(dir / "cfg.json", cfg);
  const auto r = run_cmd("run " + (dir / "cfg.json").string());
  CHECK(r.exit_code == 0);

  std::ifstream in(dir / "report.json");
  REQUIRE(in.good());
  const json report = json::parse(in);
  CHECK(report.at("results").at("duality").at("metrics").at("mk_sym").get<double>() ==
        doctest::Approx(0.0).epsilon(1e-10));
  CHECK(report.at("results").at("cyc").at("metrics").at("involution").get<std::string>() == "()");
  CHECK(report.at("config_hash").get<std::string>().size() == 40);

  std::ifstream csv(dir / "tables.csv", std::ios::binary);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "scenario,task,metric,value\r");
}

TEST_CASE("exit 2 on assertion failure") {
  const fs::path dir = fresh_dir("fail");
  // A negative sandwich tolerance demands gap >= 0.5, impossible here.
  const std::string cfg = R"({
    "name": "forced-fail",
    "instance": {"generator": {"type": "random-cloud", "n": 3, "d": 1, "seed": 5}},
    "N": 2,
    "cost": {"family": "quadratic"},
    "tasks": ["cyc"],
    "tolerances": {"sandwich": -0.5},
    "output_dir": ")" + dir.string() + R"("
  })";
  write_file(dir / "cfg.json", cfg);
  const auto r = run_cmd("run " + (dir / "cfg.json").string());
  CHECK(r.exit_code == 2);
  CHECK(fs::exists(dir / "report.json"));  // failures still produce the report
}

TEST_CASE("exit 1 on usage and guard errors") {
  SUBCASE("missing config file") {
    const auto r = run_cmd("run /nonexistent/config.json");
    CHECK(r.exit_code == 1);
  }

  SUBCASE("malformed JSON") {
    const fs::path dir = fresh_dir("badjson");
    write_file(dir / "cfg.json", "{ not json");
    const auto r = run_cmd("run " + (dir / "cfg.json").string());
    CHECK(r.exit_code == 1);
  }

  SUBCASE("enumeration guard exceeded") {
    const fs::path dir = fresh_dir("guard");
    const std::string cfg = R"({
      "name": "guard",
      "instance": {"generator": {"type": "random-cloud", "n": 50, "d": 1, "seed": 1}},
      "N": 4,
      "cost": {"family": "quadratic"},
      "tasks": ["cyc"],
      "method": {"cyc": "exact"},
      "output_dir": ")" + dir.string() + R"("
    })";
    write_file(dir / "cfg.json", cfg);
    const auto r = run_cmd("run " + (dir / "cfg.json").string());
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("enumeration guard exceeded") != std::string::npos);
  }

  SUBCASE("unknown task") {
    const fs::path dir = fresh_dir("badtask");
    const std::string cfg = R"({
      "name": "badtask",
      "instance": {"generator": {"type": "random-cloud", "n": 3, "d": 1, "seed": 1}},
      "N": 2,
      "cost": {"family": "quadratic"},
      "tasks": ["frobnicate"],
      "output_dir": ")" + dir.string() + R"("
    })";
    write_file(dir / "cfg.json", cfg);
    const auto r = run_cmd("run " + (dir / "cfg.json").string());
    CHECK(r.exit_code == 1);
  }
}

TEST_CASE("reports are byte-identical across reruns, excluding timings") {
  const fs::path dir = fresh_dir("determinism");
  const std::string cfg = R"({
    "name": "det",
    "instance": {"generator": {"type": "random-cloud", "n": 4, "d": 2, "seed": 11}},
    "N": 2,
    "cost": {"family": "vectorfield",
             "fields": [{"type": "random-bounded", "seed": 4, "bound": 1.0}]},
    "tasks": ["duality", "cyc", "decompose", "monotone"],
    "method": {"cyc": "exact", "seed": 9},
    "output_dir": ")" + dir.string() + R"("
  })";
  write_file(dir / "cfg.json", cfg);

  REQUIRE(run_cmd("run " + (dir / "cfg.json").string()).exit_code == 0);
  json first;
  {
    std::ifstream in(dir / "report.json");
    first = json::parse(in);
  }
  REQUIRE(run_cmd("run " + (dir / "cfg.json").string()).exit_code == 0);
  json second;
  {
    std::ifstream in(dir / "report.json");
    second = json::parse(in);
  }
  CHECK(strip_timings(first).dump() == strip_timings(second).dump());
}

TEST_CASE("sce subcommand reproduces the half-shift pairing") {
  const fs::path dir = fresh_dir("sce");
  const auto r = run_cmd("sce --n 4 --N 2 --out " + dir.string());
  CHECK(r.exit_code == 0);
  std::ifstream in(dir / "report.json");
  REQUIRE(in.good());
  const json report = json::parse(in);
  CHECK(report.at("results").at("sce").at("metrics").at("co_motion").get<std::string>() ==
        "(0 2)(1 3)");
}

TEST_CASE("sce rejects degenerate instances (Coulomb needs n >= N)") {
  const auto r = run_cmd("sce --n 1 --N 2");
  CHECK(r.exit_code == 1);
}

TEST_CASE("SYMOT_THREADS does not change the report") {
  const fs::path dir = fresh_dir("threads");
  const std::string cfg = R"({
    "name": "threads",
    "instance": {"generator": {"type": "random-cloud", "n": 5, "d": 1, "seed": 31}},
    "N": 2,
    "cost": {"family": "quadratic"},
    "tasks": ["cyc"],
    "method": {"cyc": "local", "seed": 2, "restarts": 12},
    "output_dir": ")" + dir.string() + R"("
  })";
  write_file(dir / "cfg.json", cfg);
  auto report_with = [&](const std::string& env) {
    const fs::path log = fs::temp_directory_path() / "symot_cli_log.txt";
    const std::string cmd = env + " " + std::string(bin()) + " run " +
                            (dir / "cfg.json").string() + " > " + log.string() + " 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::ifstream in(dir / "report.json");
    json r = json::parse(in);
    r.erase("timings_ms");
    return r.dump();
  };
  const std::string one = report_with("SYMOT_THREADS=1");
  const std::string four = report_with("SYMOT_THREADS=4");
  CHECK(one == four);
}

TEST_CASE("explicit table costs and batch configs") {
  const fs::path dir = fresh_dir("batch");
  // Two scenarios in one file: an explicit 2x2 table and a coulomb instance.
  const std::string cfg = R"([
    {
      "name": "table-cost",
      "instance": {"points": [[0.0], [1.0]], "radius": 1.0},
      "N": 2,
      "cost": {"family": "table", "values": [0.0, 1.0, 1.0, 0.0]},
      "tasks": ["duality", "cyc"],
      "output_dir": ")" + dir.string() + R"("
    },
    {
      "name": "coulomb-4",
      "instance": {"generator": {"type": "uniform-grid", "n": 4, "d": 1, "seed": 0}},
      "N": 2,
      "cost": {"family": "coulomb"},
      "tasks": ["duality", "cyc"],
      "output_dir": ")" + dir.string() + R"("
    }
  ])";
  write_file(dir / "cfg.json", cfg);
  const auto r = run_cmd("run " + (dir / "cfg.json").string());
  CHECK(r.exit_code == 0);
  {
    std::ifstream in(dir / "table-cost" / "report.json");
    REQUIRE(in.good());
    const json report = json::parse(in);
    // max over couplings of the antidiagonal table: mass 1/2 on each of
    // (0,1), (1,0) gives value 1.
    CHECK(report.at("results").at("duality").at("metrics").at("mk_sym").get<double>() ==
          doctest::Approx(1.0));
    CHECK(report.at("results").at("cyc").at("metrics").at("involution").get<std::string>() ==
          "(0 1)");
  }
  CHECK(fs::exists(dir / "coulomb-4" / "report.json"));
}

TEST_CASE("check-monotone subcommand") {
  const fs::path dir = fresh_dir("checkmono");
  const std::string cfg = R"({
    "name": "mono",
    "instance": {"generator": {"type": "random-cloud", "n": 4, "d": 2, "seed": 21}},
    "N": 3,
    "cost": {"family": "vectorfield",
             "fields": [{"type": "psd-gradient", "seed": 2}, {"type": "psd-gradient", "seed": 3}]},
    "tasks": ["duality"],
    "output_dir": ")" + dir.string() + R"("
  })";
  write_file(dir / "cfg.json", cfg);
  const auto r = run_cmd("check-monotone " + (dir / "cfg.json").string());
  CHECK(r.exit_code == 0);
  std::ifstream in(dir / "report.json");
  const json report = json::parse(in);
  CHECK(report.at("results").contains("monotone"));
  CHECK_FALSE(report.at("results").contains("duality"));
  CHECK(report.at("results").at("monotone").at("metrics").at("jointly_monotone").get<bool>());
}
