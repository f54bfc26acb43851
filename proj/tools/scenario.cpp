#include "scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include "symot/involution.hpp"
#include "symot/mmot.hpp"
#include "symot/monotone.hpp"
#include "symot/regularize.hpp"
#include "symot/rng.hpp"

namespace symot::cli {

using nlohmann::json;

// ---------------------------------------------------------------------------
// SHA-1 (for the git-style content hash of the config blob).

namespace {

struct Sha1 {
  std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
  std::uint64_t total = 0;
  unsigned char buf[64];
  std::size_t fill = 0;

  static std::uint32_t rol(std::uint32_t v, int s) { return (v << s) | (v >> (32 - s)); }

  void block(const unsigned char* p) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
             (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 80; ++i) w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      const std::uint32_t t = rol(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rol(b, 30);
      b = a;
      a = t;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
  }

  void update(const void* data, std::size_t len) {
    auto p = static_cast<const unsigned char*>(data);
    total += len;
    while (len > 0) {
      const std::size_t take = std::min(len, 64 - fill);
      std::memcpy(buf + fill, p, take);
      fill += take;
      p += take;
      len -= take;
      if (fill == 64) {
        block(buf);
        fill = 0;
      }
    }
  }

  std::string hex_digest() {
    const std::uint64_t bits = total * 8;
    unsigned char pad = 0x80;
    update(&pad, 1);
    unsigned char zero = 0;
    while (fill != 56) update(&zero, 1);
    unsigned char lenb[8];
    for (int i = 0; i < 8; ++i) lenb[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
    update(lenb, 8);
    char out[41];
    for (int i = 0; i < 5; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
    return std::string(out, 40);
  }
};

}  // namespace

std::string git_blob_sha1(const std::string& content) {
  Sha1 s;
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  s.update(header.data(), header.size());
  s.update(content.data(), content.size());
  return s.hex_digest();
}

// ---------------------------------------------------------------------------
// Config parsing.

namespace {

struct Tolerances {
  double duality = 1e-7;
  double mode_agreement = 1e-8;
  double sandwich = 1e-7;
  double residual = 1e-6;
};

struct Instance {
  SupportPtr support;
  DiscreteMeasure mu;
  CostSpec cost;
  FieldFamilyPtr fields;  // set for vectorfield costs
};

[[noreturn]] void config_error(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

Vec parse_vec(const json& a) {
  Vec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

SupportPtr parse_support(const json& inst) {
  if (inst.contains("points")) {
    std::vector<Vec> pts;
    for (const auto& p : inst.at("points")) pts.push_back(parse_vec(p));
    return make_support(std::move(pts), inst.value("radius", 1.0));
  }
  if (!inst.contains("generator")) config_error("instance needs 'points' or 'generator'");
  const json& g = inst.at("generator");
  const std::string type = g.at("type").get<std::string>();
  const int n = g.at("n").get<int>();
  const double radius = g.value("radius", 1.0);
  if (type == "uniform-grid") {
    const int d = g.value("d", 1);
    if (d != 1) config_error("uniform-grid generator is 1-dimensional");
    std::vector<Vec> pts;
    for (int k = 0; k < n; ++k) {
      Vec p(1);
      p[0] = -0.9 * radius + 1.8 * radius * (n == 1 ? 0.5 : static_cast<double>(k) / (n - 1));
      pts.push_back(std::move(p));
    }
    return make_support(std::move(pts), radius);
  }
  if (type == "random-cloud") {
    if (!g.contains("seed")) config_error("random-cloud generator requires a seed");
    const int d = g.value("d", 1);
    CounterRng rng(g.at("seed").get<std::uint64_t>());
    std::vector<Vec> pts;
    while (static_cast<int>(pts.size()) < n) {
      Vec p(d);
      for (int k = 0; k < d; ++k) p[k] = rng.next_range(-0.9 * radius, 0.9 * radius);
      if (p.norm() > 0.9 * radius) continue;
      // Coordinates rounded to 1e-12 so alternate implementations of the
      // documented generator reproduce instances bit-identically.
      for (int k = 0; k < d; ++k) p[k] = std::round(p[k] * 1e12) / 1e12;
      bool clash = false;
      for (const auto& q : pts)
        if ((q - p).norm() < 1e-6) clash = true;
      if (!clash) pts.push_back(std::move(p));
    }
    return make_support(std::move(pts), radius);
  }
  config_error("unknown generator type '" + type + "'");
}

std::vector<Vec> parse_field(const json& f, const SupportSet& sup) {
  const std::string type = f.at("type").get<std::string>();
  const int n = sup.size();
  const int d = sup.dim();
  std::vector<Vec> out;
  if (type == "zero") {
    out.assign(static_cast<std::size_t>(n), Vec::Zero(d));
  } else if (type == "values") {
    for (const auto& v : f.at("vectors")) out.push_back(parse_vec(v));
    if (static_cast<int>(out.size()) != n) config_error("field 'values' must list one vector per atom");
  } else if (type == "linear") {
    const json& rows = f.at("matrix");
    Eigen::MatrixXd A(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rows[i].size(); ++j) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
    Vec offset = Vec::Zero(d);
    if (f.contains("offset")) offset = parse_vec(f.at("offset"));
    for (int i = 0; i < n; ++i) out.push_back(A * sup.point(i) + offset);
  } else if (type == "random-bounded") {
    const double bound = f.value("bound", 1.0);
    if (!f.contains("seed")) config_error("random-bounded field requires a seed");
    CounterRng rng(f.at("seed").get<std::uint64_t>());
    for (int i = 0; i < n; ++i) {
      Vec v(d);
      do {
        for (int k = 0; k < d; ++k) v[k] = rng.next_range(-bound, bound);
      } while (v.norm() > bound);
      out.push_back(std::move(v));
    }
  } else if (type == "psd-gradient") {
    // Gradient of a seeded convex quadratic: u(x) = (M^T M + 0.1 I) x.
    if (!f.contains("seed")) config_error("psd-gradient field requires a seed");
    CounterRng rng(f.at("seed").get<std::uint64_t>());
    Eigen::MatrixXd M(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) M(i, j) = rng.next_range(-0.7, 0.7);
    const Eigen::MatrixXd A = M.transpose() * M + 0.1 * Eigen::MatrixXd::Identity(d, d);
    for (int i = 0; i < n; ++i) out.push_back(A * sup.point(i));
  } else {
    config_error("unknown field type '" + type + "'");
  }
  return out;
}

Instance parse_instance(const json& cfg) {
  SupportPtr sup = parse_support(cfg.at("instance"));
  DiscreteMeasure mu = DiscreteMeasure::uniform(sup);
  const int N = cfg.at("N").get<int>();

  const json& cost = cfg.at("cost");
  const std::string family = cost.at("family").get<std::string>();
  if (family == "quadratic") return {sup, mu, CostSpec::quadratic(N), nullptr};
  if (family == "plakhov") {
    if (N != 2) config_error("plakhov cost requires N = 2");
    return {sup, mu, CostSpec::plakhov(), nullptr};
  }
  if (family == "coulomb") return {sup, mu, CostSpec::coulomb(N), nullptr};
  if (family == "vectorfield") {
    const json& fs = cost.at("fields");
    if (static_cast<int>(fs.size()) != N - 1)
      config_error("vectorfield cost needs exactly N-1 fields");
    std::vector<std::vector<Vec>> fields;
    for (const auto& f : fs) fields.push_back(parse_field(f, *sup));
    double bound = 0.0;
    for (const auto& f : fields)
      for (const auto& v : f) bound = std::max(bound, v.norm());
    auto fam = std::make_shared<const VectorFieldFamily>(sup, std::move(fields), bound + 1e-9);
    return {sup, mu, CostSpec::vector_field(fam), fam};
  }
  if (family == "table") {
    const json& vals = cost.at("values");
    NdTable t = NdTable::cube(sup->size(), N);
    if (vals.size() != t.size()) config_error("table cost needs n^N values (flat, row-major)");
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = vals[i].get<double>();
    return {sup, mu, CostSpec::explicit_table(std::make_shared<const NdTable>(std::move(t))), nullptr};
  }
  config_error("unknown cost family '" + family + "'");
}

Tolerances parse_tolerances(const json& cfg) {
  Tolerances tol;
  if (cfg.contains("tolerances")) {
    const json& t = cfg.at("tolerances");
    tol.duality = t.value("duality", tol.duality);
    tol.mode_agreement = t.value("mode_agreement", tol.mode_agreement);
    tol.sandwich = t.value("sandwich", tol.sandwich);
    tol.residual = t.value("residual", tol.residual);
  }
  return tol;
}

// ---------------------------------------------------------------------------
// Report assembly.

struct TaskReport {
  json metrics = json::object();
  std::vector<json> assertions;

  void assert_that(const std::string& name, bool pass, double value) {
    assertions.push_back(json{{"name", name}, {"pass", pass}, {"value", value}});
  }
  bool all_pass() const {
    for (const auto& a : assertions)
      if (!a.at("pass").get<bool>()) return false;
    return true;
  }
  json to_json() const { return json{{"metrics", metrics}, {"assertions", assertions}}; }
};

std::string cycle_notation(const NInvolution& s) {
  std::string out;
  for (const auto& cyc : s.cycles()) {
    if (cyc.size() == 1) continue;
    out += '(';
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(cyc[i]);
    }
    out += ')';
  }
  if (out.empty()) out = "()";
  return out;
}

int env_threads() {
  if (const char* v = std::getenv("SYMOT_THREADS")) {
    const int t = std::atoi(v);
    if (t >= 1) return t;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

CycMethod parse_cyc_method(const json& cfg) {
  const std::string m =
      cfg.contains("method") ? cfg.at("method").value("cyc", "exact") : std::string("exact");
  if (m == "exact") return CycMethod::Exact;
  if (m == "local") return CycMethod::Local;
  config_error("method.cyc must be 'exact' or 'local'");
}

TaskReport run_duality(const Instance& inst, const json& cfg, const Tolerances& tol) {
  TaskReport rep;
  const CostTable c = build_cost_table(inst.cost, inst.support);
  // Gap violations surface as reported assertion failures (exit 2), not throws.
  const DualReport dual = duality_report(c, inst.mu, std::numeric_limits<double>::infinity());
  rep.metrics["mk_sym"] = dual.mk_sym;
  rep.metrics["dk1"] = dual.dk1;
  rep.metrics["dk2"] = dual.dk2;
  rep.metrics["mk_standard"] = dual.mk_standard;
  rep.metrics["gap_mk_dk1"] = dual.gap_mk_dk1;
  rep.metrics["gap_mk_dk2"] = dual.gap_mk_dk2;
  rep.metrics["gap_dk1_dk2"] = dual.gap_dk1_dk2;
  rep.assert_that("mk_sym_equals_dk1", dual.gap_mk_dk1 <= tol.duality, dual.gap_mk_dk1);
  rep.assert_that("mk_sym_equals_dk2", dual.gap_mk_dk2 <= tol.duality, dual.gap_mk_dk2);

  const double mode_gap = std::abs(dual.mk_standard - dual.mk_sym);
  rep.metrics["gap_orbit_vs_symmetrized"] = mode_gap;
  rep.assert_that("orbit_matches_symmetrized_mode", mode_gap <= tol.mode_agreement, mode_gap);

  std::optional<double> eps;
  if (cfg.contains("method") && cfg.at("method").contains("entropic_epsilon") &&
      !cfg.at("method").at("entropic_epsilon").is_null())
    eps = cfg.at("method").at("entropic_epsilon").get<double>();
  if (eps) {
    const auto ent = solve_entropic(symmetrize_cost(c), inst.mu, *eps);
    rep.metrics["entropic_value"] = ent.value;
    rep.metrics["entropic_iterations"] = ent.iterations;
    const double bound = dual.mk_sym +
                         *eps * c.order() * std::log(static_cast<double>(inst.support->size()));
    rep.assert_that("entropic_value_within_entropy_bound", ent.value <= bound + 1e-9,
                    ent.value - bound);
  }
  return rep;
}

TaskReport run_cyc(const Instance& inst, const json& cfg, const Tolerances& tol) {
  TaskReport rep;
  if (parse_cyc_method(cfg) == CycMethod::Exact &&
      count_involutions(inst.support->size(), cfg.at("N").get<int>()) > 10'000'000ull)
    throw std::length_error("enumeration guard exceeded (use method.cyc = 'local')");
  const CostTable c = build_cost_table(inst.cost, inst.support);
  const auto mk = solve_mk_sym(c, inst.mu, SymMode::Orbit);
  LocalSearchOptions lopts;
  lopts.threads = env_threads();
  if (cfg.contains("method")) lopts.restarts = cfg.at("method").value("restarts", 20);
  const std::uint64_t seed = cfg.contains("method") ? cfg.at("method").value("seed", 0) : 0;
  const auto cyc = solve_mk_cyc(c, inst.mu, parse_cyc_method(cfg), seed, mk.value, lopts);
  rep.metrics["mk_sym"] = mk.value;
  rep.metrics["mk_cyc"] = cyc.value;
  rep.metrics["gap_vs_sym"] = *cyc.gap_vs_sym;
  rep.metrics["involution"] = cycle_notation(cyc.involution);
  rep.metrics["method"] = cyc.method == CycMethod::Exact ? "exact" : "local";
  rep.assert_that("mk_cyc_below_mk_sym", *cyc.gap_vs_sym >= -tol.sandwich, *cyc.gap_vs_sym);
  return rep;
}

TaskReport run_decompose(const Instance& inst, const json& cfg, const Tolerances& tol) {
  if (!inst.fields) config_error("'decompose' task requires a vectorfield cost");
  TaskReport rep;
  PolarDecomposeOptions opts;
  opts.method = parse_cyc_method(cfg);
  opts.seed = cfg.contains("method") ? cfg.at("method").value("seed", 0) : 0;
  opts.local.threads = env_threads();
  opts.grid_m = cfg.value("grid_m", 9);
  opts.gap_tol = tol.sandwich;
  opts.residual_tol = tol.residual;
  const auto cert = polar_decompose(*inst.fields, inst.mu, opts);
  rep.metrics["mk_sym"] = cert.duality.mk_sym;
  rep.metrics["mk_cyc"] = cert.cyc.value;
  rep.metrics["gap"] = cert.gap;
  rep.metrics["involution"] = cycle_notation(cert.cyc.involution);
  rep.metrics["tail_residual"] = cert.tail_residual;
  rep.metrics["head_residual"] = cert.head_residual;
  rep.metrics["jointly_monotone"] = cert.flags.jointly;
  rep.metrics["strictly_jointly_monotone"] = cert.flags.strictly;
  rep.metrics["each_field_n_monotone"] = cert.flags.each_field_n_monotone;
  rep.metrics["lower_bound_only"] = cert.lower_bound_only;
  rep.assert_that("mk_cyc_below_mk_sym", cert.gap >= -tol.sandwich, cert.gap);
  if (cert.residuals_asserted) {
    rep.assert_that("tail_subgradient_residual", cert.tail_residual <= tol.residual,
                    cert.tail_residual);
    rep.assert_that("head_subgradient_residual", cert.head_residual <= tol.residual,
                    cert.head_residual);
  }
  if (cert.single_field) {
    const auto& sf = *cert.single_field;
    rep.metrics["single_field"] =
        json{{"diag_max_abs", sf.diag_max_abs},
             {"cycle_max_sum", sf.cycle_max_sum},
             {"head_residual", sf.head_residual},
             {"tail_residual", sf.tail_residual},
             {"tau", sf.tau}};
    // F comes from ball-grid sups, so away from grid-aligned supports its
    // identities hold at the grid tolerance, not exactly.
    rep.assert_that("single_field_diag_within_tau", sf.diag_max_abs <= sf.tau, sf.diag_max_abs);
    rep.assert_that("single_field_cyclic_sums", sf.cycle_max_sum <= sf.tau, sf.cycle_max_sum);
    if (cert.residuals_asserted) {
      const double incl_tol = std::max(tol.residual, sf.tau);
      rep.assert_that("single_field_inclusion_head", sf.head_residual <= incl_tol,
                      sf.head_residual);
      rep.assert_that("single_field_inclusion_tail", sf.tail_residual <= incl_tol,
                      sf.tail_residual);
    }
  }
  return rep;
}

TaskReport run_regularize(const Instance& inst, const json& cfg, const Tolerances&) {
  TaskReport rep;
  const CostTable c = build_cost_table(inst.cost, inst.support);
  const DualReport dual = duality_report(c, inst.mu, std::numeric_limits<double>::infinity());
  const EvalGrid grid = make_eval_grid(inst.support, cfg.value("grid_m", 9));
  const auto audit = audit_pipeline(dual.hamiltonian, grid);
  rep.metrics["tau"] = audit.tau;
  rep.metrics["measured_subantisymmetry"] = audit.measured_subanti;
  rep.metrics["empirical_tau_coefficient"] = audit.empirical_coeff;
  const std::pair<const char*, const AuditItem*> items[] = {
      {"concavity_slot1", &audit.concavity_slot1}, {"convexity_tail", &audit.convexity_tail},
      {"h2_antisymmetry", &audit.h2_antisym},      {"domination", &audit.domination},
      {"l_ordering", &audit.l_ordering},           {"l_growth_bound", &audit.l_bound},
      {"h1_growth_bound", &audit.h1_bound},        {"lipschitz_4NR", &audit.lipschitz}};
  for (const auto& [name, item] : items) {
    rep.metrics[name] = item->worst;
    rep.assert_that(name, item->pass, item->worst);
  }
  return rep;
}

TaskReport run_monotone(const Instance& inst, const Tolerances&) {
  if (!inst.fields) config_error("'monotone' task requires a vectorfield cost");
  TaskReport rep;
  const auto joint = check_jointly_n_monotone(*inst.fields);
  const auto strict = check_strict_jointly_n_monotone(*inst.fields);
  rep.metrics["jointly_monotone"] = joint.ok;
  rep.metrics["min_cycle_sum"] = joint.min_sum;
  rep.metrics["strictly_jointly_monotone"] = strict.strict;
  const auto pol = polarity_value(*inst.fields, inst.mu);
  rep.metrics["polarity_value"] = pol.value;
  rep.metrics["polarity_argmin"] = cycle_notation(pol.argmin);
  rep.metrics["polarity_num_optima"] = pol.num_optima;
  if (joint.ok) {
    rep.assert_that("monotone_implies_zero_polarity", std::abs(pol.value) <= 1e-9, pol.value);
    rep.assert_that("monotone_implies_identity_argmin", pol.argmin.is_identity(),
                    pol.argmin.is_identity() ? 1.0 : 0.0);
  }
  if (strict.strict)
    rep.assert_that("strict_implies_unique_argmin", pol.num_optima == 1,
                    static_cast<double>(pol.num_optima));
  return rep;
}

TaskReport run_sce_task(int n, int N, const Tolerances& tol, json* detail) {
  TaskReport rep;
  if (n < 1 || N < 2) config_error("sce requires n >= 1 and N >= 2");
  std::vector<Vec> pts;
  for (int k = 0; k < n; ++k) {
    Vec p(1);
    p[0] = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    pts.push_back(std::move(p));
  }
  auto sup = make_support(std::move(pts), 1.0);
  const auto mu = DiscreteMeasure::uniform(sup);
  const CostTable c = build_cost_table(CostSpec::coulomb(N), sup);
  const auto mk = solve_mk_sym(c, mu, SymMode::Orbit);
  const auto cyc = solve_mk_cyc(c, mu, CycMethod::Exact, 0, mk.value);

  rep.metrics["n"] = n;
  rep.metrics["N"] = N;
  rep.metrics["v_ee_sce"] = -cyc.value;
  rep.metrics["mk_cyc"] = cyc.value;
  rep.metrics["mk_sym"] = mk.value;
  rep.metrics["gap_vs_sym"] = *cyc.gap_vs_sym;
  rep.metrics["co_motion"] = cycle_notation(cyc.involution);

  // Co-motion functions are the powers f_i = S^i of one involution.
  json powers = json::array();
  std::vector<std::vector<int>> maps;
  for (int k = 1; k < N; ++k) {
    std::vector<int> fk(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) fk[static_cast<std::size_t>(i)] = cyc.involution.apply_power(i, k);
    powers.push_back(fk);
    maps.push_back(std::move(fk));
  }
  rep.metrics["co_motion_powers"] = powers;
  const auto magic = magic_test(maps, mu, 25, 2024);
  rep.metrics["magic_test_pass"] = magic.pass;
  if (magic.witness)
    rep.metrics["magic_witness"] = json{{"family", magic.witness->family},
                                        {"index", magic.witness->index},
                                        {"atom", magic.witness->atom},
                                        {"integral", magic.witness->integral}};
  rep.assert_that("co_motion_powers_magic_test", magic.pass, magic.max_random_residual);
  rep.assert_that("mk_cyc_below_mk_sym", *cyc.gap_vs_sym >= -tol.sandwich, *cyc.gap_vs_sym);
  if (detail) *detail = rep.metrics;
  return rep;
}

// ---------------------------------------------------------------------------

void write_report_files(const std::string& output_dir, const json& report,
                        const std::string& scenario_name) {
  namespace fs = std::filesystem;
  fs::create_directories(output_dir);
  {
    std::ofstream out(fs::path(output_dir) / "report.json", std::ios::binary);
    out << report.dump(2) << '\n';
  }
  {
    std::ofstream out(fs::path(output_dir) / "tables.csv", std::ios::binary);
    out << "scenario,task,metric,value\r\n";
    for (const auto& [task, body] : report.at("results").items()) {
      for (const auto& [metric, value] : body.at("metrics").items()) {
        std::string sv;
        if (value.is_number_float()) {
          char b[40];
          std::snprintf(b, sizeof b, "%.17g", value.get<double>());
          sv = b;
        } else if (value.is_string()) {
          sv = "\"" + value.get<std::string>() + "\"";
        } else {
          sv = value.dump();
          if (sv.find(',') != std::string::npos) sv = "\"" + sv + "\"";
        }
        out << scenario_name << ',' << task << ',' << metric << ',' << sv << "\r\n";
      }
    }
  }
}

int run_one_scenario(const json& cfg, const std::string& config_blob, const std::string& out_dir) {
  const std::string name = cfg.value("name", "scenario");
  const Tolerances tol = parse_tolerances(cfg);

  std::vector<std::string> tasks;
  if (cfg.contains("tasks"))
    for (const auto& t : cfg.at("tasks")) tasks.push_back(t.get<std::string>());
  if (tasks.empty()) config_error("no tasks requested");

  const bool needs_instance = std::any_of(tasks.begin(), tasks.end(),
                                          [](const std::string& t) { return t != "sce"; });
  std::optional<Instance> inst;
  if (needs_instance) inst = parse_instance(cfg);

  json results = json::object();
  json timings = json::object();
  bool all_pass = true;
  for (const auto& task : tasks) {
    const auto t0 = std::chrono::steady_clock::now();
    TaskReport tr;
    if (task == "duality") tr = run_duality(*inst, cfg, tol);
    else if (task == "cyc") tr = run_cyc(*inst, cfg, tol);
    else if (task == "decompose") tr = run_decompose(*inst, cfg, tol);
    else if (task == "regularize") tr = run_regularize(*inst, cfg, tol);
    else if (task == "monotone") tr = run_monotone(*inst, tol);
    else if (task == "sce") {
      if (!cfg.contains("sce")) config_error("'sce' task needs an 'sce' block with n and N");
      tr = run_sce_task(cfg.at("sce").at("n").get<int>(), cfg.at("sce").at("N").get<int>(), tol,
                        nullptr);
    } else {
      config_error("unknown task '" + task + "'");
    }
    const auto t1 = std::chrono::steady_clock::now();
    timings[task] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    results[task] = tr.to_json();
    all_pass = all_pass && tr.all_pass();
  }

  json report;
  report["scenario"] = name;
  report["version"] = kVersion;
  report["config"] = cfg;
  report["config_hash"] = git_blob_sha1(config_blob);
  report["results"] = results;
  report["timings_ms"] = timings;
  write_report_files(out_dir, report, name);

  std::cout << name << ": " << (all_pass ? "PASS" : "FAIL") << " (report: " << out_dir
            << "/report.json)\n";
  return all_pass ? kOk : kAssertionFailure;
}

}  // namespace

int run_scenarios(const json& config, const std::string& config_path) {
  std::string blob;
  {
    std::ifstream in(config_path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    blob = ss.str();
  }
  int worst = kOk;
  if (config.is_array()) {
    for (const auto& cfg : config) {
      const std::string dir =
          cfg.value("output_dir", std::string("out")) + "/" + cfg.value("name", "scenario");
      worst = std::max(worst, run_one_scenario(cfg, blob, dir));
    }
  } else {
    worst = run_one_scenario(config, blob, config.value("output_dir", std::string("out")));
  }
  return worst;
}

int run_sce(int n, int N, const std::string& output_dir) {
  Tolerances tol;
  json detail;
  TaskReport tr = run_sce_task(n, N, tol, &detail);
  std::cout << "SCE co-motion experiment (n=" << n << ", N=" << N << ")\n";
  std::cout << "  V_ee^SCE estimate : " << detail.at("v_ee_sce").get<double>() << '\n';
  std::cout << "  co-motion map S   : " << detail.at("co_motion").get<std::string>() << '\n';
  std::cout << "  gap vs MK_sym     : " << detail.at("gap_vs_sym").get<double>() << '\n';
  std::cout << "  magic test        : "
            << (detail.at("magic_test_pass").get<bool>() ? "PASS" : "FAIL") << '\n';
  if (!output_dir.empty()) {
    json report;
    report["scenario"] = "sce";
    report["version"] = kVersion;
    report["config"] = json{{"n", n}, {"N", N}};
    report["config_hash"] = git_blob_sha1(json{{"n", n}, {"N", N}}.dump());
    report["results"] = json{{"sce", tr.to_json()}};
    report["timings_ms"] = json::object();
    write_report_files(output_dir, report, "sce");
  }
  return tr.all_pass() ? kOk : kAssertionFailure;
}

int run_check_monotone(const json& config, const std::string& config_path) {
  json cfg = config;
  cfg["tasks"] = json::array({"monotone"});
  return run_scenarios(cfg, config_path);
}

}  // namespace symot::cli
