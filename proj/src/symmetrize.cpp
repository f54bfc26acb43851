#include "symot/symmetrize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace symot {

namespace {

// Visit each sigma-orbit once: calls fn(members) where members are the flat
// indices of the distinct rotations of one representative.
template <class F>
void for_each_orbit(const NdTable& table, F&& fn) {
  const int N = table.order();
  std::vector<bool> seen(table.size(), false);
  std::vector<int> t, r;
  std::vector<std::size_t> members;
  for (std::size_t f = 0; f < table.size(); ++f) {
    if (seen[f]) continue;
    table.unflatten_into(f, t);
    members.clear();
    r = t;
    for (int k = 0; k < N; ++k) {
      const std::size_t g = table.flat_index(r);
      if (!seen[g]) {
        seen[g] = true;
        members.push_back(g);
      }
      r.push_back(r.front());
      r.erase(r.begin());
    }
    fn(members);
  }
}

}  // namespace

CostTable symmetrize_cost(const CostTable& c) {
  NdTable out = c.values;
  for_each_orbit(c.values, [&](const std::vector<std::size_t>& members) {
    bool poisoned = false;
    double sum = 0.0;
    const int N = c.values.order();
    const double repeat = static_cast<double>(N) / static_cast<double>(members.size());
    for (std::size_t g : members) {
      if (is_neg_inf(c.values[g])) poisoned = true;
      sum += c.values[g];
    }
    // Orbits shorter than N repeat each member N/|orbit| times in the average.
    const double avg = poisoned ? kNegInf : repeat * sum / static_cast<double>(N);
    for (std::size_t g : members) out[g] = avg;
  });
  return CostTable{std::move(out), c.support};
}

Coupling symmetrize_plan(const Coupling& plan) {
  NdTable out = plan.mass();
  const int N = plan.order();
  for_each_orbit(plan.mass(), [&](const std::vector<std::size_t>& members) {
    double sum = 0.0;
    for (std::size_t g : members) sum += plan.mass()[g];
    // Equal mass on each distinct rotation; short orbits absorb the repeats.
    const double repeat = static_cast<double>(N) / static_cast<double>(members.size());
    const double avg = repeat * sum / static_cast<double>(N);
    for (std::size_t g : members) out[g] = avg;
  });
  return Coupling(std::move(out), plan.support_ptr());
}

AntisymReport check_antisymmetric(const NdTable& H, double tol) {
  AntisymReport rep;
  rep.ok = true;
  const int N = H.order();
  std::vector<int> t, r;
  for (std::size_t f = 0; f < H.size(); ++f) {
    H.unflatten_into(f, t);
    double s = 0.0;
    r = t;
    for (int k = 0; k < N; ++k) {
      s += H.at(r);
      r.push_back(r.front());
      r.erase(r.begin());
    }
    if (std::abs(s) > rep.max_residual) {
      rep.max_residual = std::abs(s);
      rep.worst_tuple = t;
    }
  }
  rep.ok = rep.max_residual <= tol;
  return rep;
}

SubantisymReport check_subantisymmetric(const NdTable& H, double tol) {
  SubantisymReport rep;
  const int N = H.order();
  const int n = H.dims()[0];
  std::vector<int> t, r;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < H.size(); ++f) {
    H.unflatten_into(f, t);
    double s = 0.0;
    r = t;
    for (int k = 0; k < N; ++k) {
      s += H.at(r);
      r.push_back(r.front());
      r.erase(r.begin());
    }
    if (s > worst) {
      worst = s;
      rep.worst_tuple = t;
    }
  }
  rep.max_sum = worst;
  for (int i = 0; i < n; ++i) {
    const std::vector<int> diag(static_cast<std::size_t>(N), i);
    rep.max_diag_abs = std::max(rep.max_diag_abs, std::abs(H.at(diag)));
  }
  rep.ok = rep.max_sum <= tol && rep.max_diag_abs <= tol;
  return rep;
}

HamiltonianTable hamiltonian_from_potential(const Potential& u0, const CostTable& c) {
  if (u0.values.size() != c.n())
    throw std::invalid_argument("hamiltonian_from_potential: potential/support mismatch");
  const CostTable csym = symmetrize_cost(c);
  const int N = c.order();
  NdTable H = NdTable::cube(c.n(), N);
  std::vector<int> t;
  for (std::size_t f = 0; f < H.size(); ++f) {
    H.unflatten_into(f, t);
    double pot = -(static_cast<double>(N) - 1.0) * u0.values[t[0]];
    for (int i = 1; i < N; ++i) pot += u0.values[t[static_cast<std::size_t>(i)]];
    const double cv = c.values[f];
    H[f] = is_neg_inf(cv) ? pot : pot + cv - csym.values[f];
  }
  return HamiltonianTable{std::move(H), c.support};
}

HamiltonianTable hamiltonian_from_pairwise(const Eigen::MatrixXd& F, int N, SupportPtr support) {
  if (N < 2) throw std::invalid_argument("hamiltonian_from_pairwise: N must be >= 2");
  const int n = support->size();
  if (F.rows() != n || F.cols() != n)
    throw std::invalid_argument("hamiltonian_from_pairwise: F must be n x n");
  NdTable H = NdTable::cube(n, N);
  std::vector<int> t;
  for (std::size_t f = 0; f < H.size(); ++f) {
    H.unflatten_into(f, t);
    double v = (static_cast<double>(N) - 1.0) * F(t[0], t[1]);
    for (int i = 1; i + 1 < N; ++i)
      v -= F(t[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(i) + 1]);
    H[f] = v / static_cast<double>(N);
  }
  return HamiltonianTable{std::move(H), std::move(support)};
}

}  // namespace symot
