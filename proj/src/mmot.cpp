#include "symot/mmot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "symot/simplex.hpp"

namespace symot {

namespace {

struct Orbit {
  std::vector<std::size_t> members;  // flat indices of the distinct rotations
  std::vector<int> first_count;      // how often atom i appears in slot 1
  double cost_sum = 0.0;             // sum of c over the distinct members
  bool finite = true;
};

std::vector<Orbit> collect_orbits(const NdTable& c, int n) {
  const int N = c.order();
  std::vector<Orbit> orbits;
  std::vector<bool> seen(c.size(), false);
  std::vector<int> t, r;
  for (std::size_t f = 0; f < c.size(); ++f) {
    if (seen[f]) continue;
    c.unflatten_into(f, t);
    Orbit o;
    o.first_count.assign(static_cast<std::size_t>(n), 0);
    r = t;
    for (int k = 0; k < N; ++k) {
      const std::size_t g = c.flat_index(r);
      if (!seen[g]) {
        seen[g] = true;
        o.members.push_back(g);
        o.first_count[static_cast<std::size_t>(r[0])]++;
        if (is_neg_inf(c[g])) o.finite = false;
        else o.cost_sum += c[g];
      }
      r.push_back(r.front());
      r.erase(r.begin());
    }
    orbits.push_back(std::move(o));
  }
  return orbits;
}

void check_mu_support(const CostTable& c, const DiscreteMeasure& mu) {
  if (mu.support().size() != c.n())
    throw std::invalid_argument("mmot: measure and cost table support mismatch");
}

double dual_feasibility_violation(const Potential& u, const CostTable& c_sym) {
  const int N = c_sym.order();
  double worst = 0.0;
  std::vector<int> t;
  for (std::size_t f = 0; f < c_sym.values.size(); ++f) {
    if (is_neg_inf(c_sym.values[f])) continue;
    c_sym.values.unflatten_into(f, t);
    double s = 0.0;
    for (int j = 0; j < N; ++j) s += u.values[t[static_cast<std::size_t>(j)]];
    worst = std::max(worst, c_sym.values[f] - s);
  }
  return worst;
}

}  // namespace

MkSymResult solve_mk_sym(const CostTable& c, const DiscreteMeasure& mu, SymMode mode) {
  check_mu_support(c, mu);
  const int n = c.n();
  const int N = c.order();

  if (mode == SymMode::Symmetrized) {
    const CostTable csym = symmetrize_cost(c);
    StandardMmResult std_res = solve_standard_mm(csym, std::vector<DiscreteMeasure>(
                                                           static_cast<std::size_t>(N), mu));
    Coupling plan = symmetrize_plan(std_res.plan);
    // Slot-averaged potential: one shared u across the N marginals.
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    for (const auto& uj : std_res.duals) u += uj.values;
    u /= static_cast<double>(N);
    return MkSymResult{std_res.value, std::move(plan), Potential{u, c.support}};
  }

  const auto orbits = collect_orbits(c.values, n);
  std::vector<const Orbit*> cols;
  for (const auto& o : orbits)
    if (o.finite) cols.push_back(&o);
  if (cols.empty()) throw std::runtime_error("solve_mk_sym: no finite-cost symmetric coupling");

  const int K = static_cast<int>(cols.size());
  Eigen::MatrixXd A(n, K);
  Eigen::VectorXd obj(K);
  for (int k = 0; k < K; ++k) {
    obj[k] = cols[static_cast<std::size_t>(k)]->cost_sum;
    for (int i = 0; i < n; ++i)
      A(i, k) = static_cast<double>(cols[static_cast<std::size_t>(k)]->first_count[static_cast<std::size_t>(i)]);
  }
  const LpSolution lp = simplex_max(A, mu.weights(), obj);
  if (!lp.feasible) throw std::runtime_error("solve_mk_sym: no finite-cost symmetric coupling");

  NdTable mass = NdTable::cube(n, N);
  for (int k = 0; k < K; ++k)
    for (std::size_t g : cols[static_cast<std::size_t>(k)]->members) mass[g] = lp.x[k];
  // Duals v of the orbit LP scale to a DK^1-feasible potential u = v/N.
  Potential u{lp.y / static_cast<double>(N), c.support};
  return MkSymResult{lp.value, Coupling(std::move(mass), c.support), std::move(u)};
}

StandardMmResult solve_standard_mm(const CostTable& c,
                                   const std::vector<DiscreteMeasure>& marginals) {
  const int n = c.n();
  const int N = c.order();
  if (static_cast<int>(marginals.size()) != N)
    throw std::invalid_argument("solve_standard_mm: need one marginal per slot");
  for (const auto& m : marginals)
    if (m.support().size() != n)
      throw std::invalid_argument("solve_standard_mm: marginal support mismatch");

  // Columns: finite-cost tuples. Rows: (slot j, atom i) marginal constraints.
  std::vector<std::size_t> col_flat;
  for (std::size_t f = 0; f < c.values.size(); ++f)
    if (!is_neg_inf(c.values[f])) col_flat.push_back(f);
  if (col_flat.empty()) throw std::runtime_error("solve_standard_mm: no finite-cost coupling");

  const int K = static_cast<int>(col_flat.size());
  const int m_rows = N * n;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m_rows, K);
  Eigen::VectorXd obj(K);
  std::vector<int> t;
  for (int k = 0; k < K; ++k) {
    const std::size_t f = col_flat[static_cast<std::size_t>(k)];
    c.values.unflatten_into(f, t);
    obj[k] = c.values[f];
    for (int j = 0; j < N; ++j) A(j * n + t[static_cast<std::size_t>(j)], k) = 1.0;
  }
  Eigen::VectorXd b(m_rows);
  for (int j = 0; j < N; ++j) b.segment(j * n, n) = marginals[static_cast<std::size_t>(j)].weights();

  const LpSolution lp = simplex_max(A, b, obj);
  if (!lp.feasible) throw std::runtime_error("solve_standard_mm: no finite-cost coupling");

  NdTable mass = NdTable::cube(n, N);
  for (int k = 0; k < K; ++k) mass[col_flat[static_cast<std::size_t>(k)]] = lp.x[k];

  // One potential per slot; remove the additive gauge freedom by balancing
  // the slot means so the later slot average is well defined.
  std::vector<Potential> duals;
  Eigen::VectorXd slot_mean(N);
  for (int j = 0; j < N; ++j) {
    Eigen::VectorXd uj = lp.y.segment(j * n, n);
    slot_mean[j] = marginals[static_cast<std::size_t>(j)].weights().dot(uj);
    duals.push_back(Potential{std::move(uj), c.support});
  }
  const double mean_of_means = slot_mean.mean();
  for (int j = 0; j < N; ++j)
    duals[static_cast<std::size_t>(j)].values.array() -= (slot_mean[j] - mean_of_means);

  return StandardMmResult{lp.value, Coupling(std::move(mass), c.support), std::move(duals)};
}

Potential refine_potential(const Potential& u, const CostTable& c_sym, double step_tol,
                           int max_iters) {
  const int n = c_sym.n();
  const int N = c_sym.order();
  if (u.values.size() != n) throw std::invalid_argument("refine_potential: potential size mismatch");
  if (dual_feasibility_violation(u, c_sym) > 1e-9)
    throw std::invalid_argument("refine_potential: input potential is not DK^1-feasible");

  Eigen::VectorXd v = u.values;
  Eigen::VectorXd vbar(n);
  const std::vector<int> tail_dims(static_cast<std::size_t>(N - 1), n);
  std::vector<int> full(static_cast<std::size_t>(N));
  for (int iter = 0; iter < max_iters; ++iter) {
    for (int x = 0; x < n; ++x) {
      double best = -std::numeric_limits<double>::infinity();
      full[0] = x;
      for_each_tuple(tail_dims, [&](const std::vector<int>& ys) {
        for (int i = 0; i + 1 < N; ++i) full[static_cast<std::size_t>(i) + 1] = ys[static_cast<std::size_t>(i)];
        const double cv = c_sym.values.at(full);
        if (is_neg_inf(cv)) return;
        double s = cv;
        for (int i = 0; i + 1 < N; ++i) s -= v[ys[static_cast<std::size_t>(i)]];
        best = std::max(best, s);
      });
      if (!std::isfinite(best))
        throw std::runtime_error("refine_potential: c-transform undefined at atom");
      vbar[x] = best;
    }
    const Eigen::VectorXd next = (vbar + (static_cast<double>(N) - 1.0) * v) / static_cast<double>(N);
    const double delta = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (delta < step_tol) return Potential{v, c_sym.support};
  }
  throw std::runtime_error("refine_potential: fixed point not reached within iteration budget");
}

Potential c_legendre(const HamiltonianTable& H, const CostTable& c) {
  const int n = c.n();
  const int N = c.order();
  if (H.values.dims() != c.values.dims())
    throw std::invalid_argument("c_legendre: H and c shapes differ");
  Eigen::VectorXd ell(n);
  const std::vector<int> tail_dims(static_cast<std::size_t>(N - 1), n);
  std::vector<int> full(static_cast<std::size_t>(N));
  for (int x = 0; x < n; ++x) {
    double best = -std::numeric_limits<double>::infinity();
    full[0] = x;
    for_each_tuple(tail_dims, [&](const std::vector<int>& ys) {
      for (int i = 0; i + 1 < N; ++i) full[static_cast<std::size_t>(i) + 1] = ys[static_cast<std::size_t>(i)];
      const double cv = c.values.at(full);
      if (is_neg_inf(cv)) return;
      best = std::max(best, cv - H.values.at(full));
    });
    if (!std::isfinite(best)) throw std::runtime_error("c_legendre: c-transform undefined at atom");
    ell[x] = best;
  }
  return Potential{ell, c.support};
}

DualReport duality_report(const CostTable& c, const DiscreteMeasure& mu, double tol) {
  check_mu_support(c, mu);
  const int N = c.order();
  const CostTable csym = symmetrize_cost(c);

  MkSymResult mk = solve_mk_sym(c, mu, SymMode::Orbit);
  Potential u0 = refine_potential(mk.potential, csym);
  const double dk1 = static_cast<double>(N) * mu.weights().dot(u0.values);

  HamiltonianTable h_inf = hamiltonian_from_potential(u0, c);
  const Potential ell = c_legendre(h_inf, c);
  const double dk2 = mu.weights().dot(ell.values);

  const StandardMmResult std_res =
      solve_standard_mm(csym, std::vector<DiscreteMeasure>(static_cast<std::size_t>(N), mu));

  DualReport rep{mk.value,
                 dk1,
                 dk2,
                 std_res.value,
                 std::move(mk.plan),
                 std::move(u0),
                 std::move(h_inf),
                 std::abs(mk.value - dk1),
                 std::abs(mk.value - dk2),
                 std::abs(dk1 - dk2)};
  if (rep.gap_mk_dk1 > tol || rep.gap_mk_dk2 > tol)
    throw std::runtime_error("duality_report: Kantorovich duality gap exceeds tolerance");
  return rep;
}

EntropicResult solve_entropic(const CostTable& c_sym, const DiscreteMeasure& mu, double epsilon,
                              double step_tol, int max_iters) {
  check_mu_support(c_sym, mu);
  if (!(epsilon > 0)) throw std::invalid_argument("solve_entropic: epsilon must be positive");
  const int n = c_sym.n();
  const int N = c_sym.order();
  {
    // The smoothing is defined for symmetric costs only.
    std::vector<int> t;
    for (std::size_t f = 0; f < c_sym.values.size(); ++f) {
      c_sym.values.unflatten_into(f, t);
      const double a = c_sym.values[f];
      const double b = c_sym.values.at(cyclic_shift(t, 1));
      if (is_neg_inf(a) != is_neg_inf(b) || (!is_neg_inf(a) && std::abs(a - b) > 1e-12))
        throw std::invalid_argument("solve_entropic: cost must be symmetric (apply symmetrize_cost)");
    }
  }

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd ubar(n);
  const std::vector<int> tail_dims(static_cast<std::size_t>(N - 1), n);
  std::vector<int> full(static_cast<std::size_t>(N));
  Eigen::VectorXd log_mu = mu.weights().array().max(1e-300).log();
  int iter = 0;
  for (; iter < max_iters; ++iter) {
    for (int x = 0; x < n; ++x) {
      full[0] = x;
      double max_e = -std::numeric_limits<double>::infinity();
      std::vector<double> exps;
      for_each_tuple(tail_dims, [&](const std::vector<int>& ys) {
        for (int i = 0; i + 1 < N; ++i) full[static_cast<std::size_t>(i) + 1] = ys[static_cast<std::size_t>(i)];
        const double cv = c_sym.values.at(full);
        if (is_neg_inf(cv)) return;
        double e = cv;
        for (int i = 0; i + 1 < N; ++i) {
          e -= u[ys[static_cast<std::size_t>(i)]];
          e += epsilon * log_mu[ys[static_cast<std::size_t>(i)]];
        }
        e /= epsilon;
        exps.push_back(e);
        max_e = std::max(max_e, e);
      });
      if (exps.empty()) throw std::runtime_error("solve_entropic: no finite-cost tuple at atom");
      double s = 0.0;
      for (double e : exps) s += std::exp(e - max_e);
      ubar[x] = epsilon * (max_e + std::log(s));
    }
    const Eigen::VectorXd next = (ubar + (static_cast<double>(N) - 1.0) * u) / static_cast<double>(N);
    const double delta = (next - u).cwiseAbs().maxCoeff();
    u = next;
    if (delta < step_tol) break;
  }
  if (iter >= max_iters) throw std::runtime_error("solve_entropic: no convergence");

  // Gibbs coupling proportional to exp((c~ - sum u)/eps) * prod mu.
  NdTable mass = NdTable::cube(n, N);
  std::vector<int> t;
  double max_l = -std::numeric_limits<double>::infinity();
  std::vector<double> logw(c_sym.values.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t f = 0; f < c_sym.values.size(); ++f) {
    c_sym.values.unflatten_into(f, t);
    const double cv = c_sym.values[f];
    if (is_neg_inf(cv)) continue;
    double e = cv;
    double lmu = 0.0;
    for (int j = 0; j < N; ++j) {
      e -= u[t[static_cast<std::size_t>(j)]];
      lmu += log_mu[t[static_cast<std::size_t>(j)]];
    }
    logw[f] = e / epsilon + lmu;
    max_l = std::max(max_l, logw[f]);
  }
  double z = 0.0;
  for (std::size_t f = 0; f < logw.size(); ++f)
    if (std::isfinite(logw[f])) z += std::exp(logw[f] - max_l);
  double value = 0.0;
  for (std::size_t f = 0; f < logw.size(); ++f) {
    if (!std::isfinite(logw[f])) continue;
    mass[f] = std::exp(logw[f] - max_l) / z;
    value += mass[f] * c_sym.values[f];
  }
  return EntropicResult{value, Coupling(std::move(mass), c_sym.support), Potential{u, c_sym.support},
                        iter};
}

}  // namespace symot
