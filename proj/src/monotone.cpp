#include "symot/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace symot {

namespace {

void guard_cycles(int n, int N, std::size_t guard) {
  std::size_t total = 1;
  for (int i = 0; i < N; ++i) {
    total *= static_cast<std::size_t>(n);
    if (total > guard) throw std::length_error("monotone: cycle enumeration guard exceeded");
  }
}

double joint_cycle_sum(const VectorFieldFamily& fam, const std::vector<int>& cyc) {
  const int N = fam.order();
  const auto& sup = fam.support();
  double s = 0.0;
  for (int i = 0; i < N; ++i)
    for (int l = 1; l < N; ++l) {
      const int xi = cyc[static_cast<std::size_t>(i)];
      const int xil = cyc[static_cast<std::size_t>((i + l) % N)];
      s += fam.field(l - 1, xi).dot(sup.point(xi) - sup.point(xil));
    }
  return s;
}

}  // namespace

CycleCheck check_n_cyclically_monotone(const std::vector<Vec>& field, const SupportSet& support,
                                       int N, std::size_t guard) {
  const int n = support.size();
  if (static_cast<int>(field.size()) != n)
    throw std::invalid_argument("check_n_cyclically_monotone: field not defined on every atom");
  guard_cycles(n, N, guard);
  CycleCheck out;
  out.min_sum = std::numeric_limits<double>::infinity();
  for_each_cube_tuple(n, N, [&](const std::vector<int>& cyc) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) {
      const int a = cyc[static_cast<std::size_t>(i)];
      const int b = cyc[static_cast<std::size_t>((i + 1) % N)];
      s += field[static_cast<std::size_t>(a)].dot(support.point(a) - support.point(b));
    }
    if (s < out.min_sum) {
      out.min_sum = s;
      out.worst_cycle = cyc;
    }
  });
  out.ok = out.min_sum >= -1e-10;
  return out;
}

CycleCheck check_jointly_n_monotone(const VectorFieldFamily& family, std::size_t guard) {
  const int n = family.support().size();
  const int N = family.order();
  guard_cycles(n, N, guard);
  CycleCheck out;
  out.min_sum = std::numeric_limits<double>::infinity();
  for_each_cube_tuple(n, N, [&](const std::vector<int>& cyc) {
    const double s = joint_cycle_sum(family, cyc);
    if (s < out.min_sum) {
      out.min_sum = s;
      out.worst_cycle = cyc;
    }
  });
  out.ok = out.min_sum >= -1e-10;
  return out;
}

StrictCheck check_strict_jointly_n_monotone(const VectorFieldFamily& family, std::size_t guard) {
  const int n = family.support().size();
  const int N = family.order();
  guard_cycles(n, N, guard);
  StrictCheck out;
  out.min_offdiag_sum = std::numeric_limits<double>::infinity();
  for_each_cube_tuple(n, N, [&](const std::vector<int>& cyc) {
    if (cyc[0] == cyc[1]) return;
    const double s = joint_cycle_sum(family, cyc);
    if (s < out.min_offdiag_sum) {
      out.min_offdiag_sum = s;
      out.worst_cycle = cyc;
    }
  });
  out.strict = out.min_offdiag_sum > 1e-10;
  return out;
}

PolarityResult polarity_value(const VectorFieldFamily& family, const DiscreteMeasure& mu,
                              std::uint64_t guard) {
  if (!mu.is_uniform())
    throw std::invalid_argument("polarity_value: requires uniform atom weights");
  const int n = family.support().size();
  const int N = family.order();
  const auto& sup = family.support();

  std::vector<NInvolution> all;
  enumerate_involutions(
      n, N, [&](const NInvolution& S) { all.push_back(S); }, guard);
  std::vector<double> values(all.size());
  for (std::size_t k = 0; k < all.size(); ++k) {
    const auto& S = all[k];
    double v = 0.0;
    for (int x = 0; x < n; ++x) {
      int j = x;
      for (int l = 1; l < N; ++l) {
        j = S.apply(j);
        v += mu.weight(x) * family.field(l - 1, x).dot(sup.point(x) - sup.point(j));
      }
    }
    values[k] = v;
  }
  const double best_value = *std::min_element(values.begin(), values.end());
  int optima = 0;
  std::optional<NInvolution> best;
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (values[k] > best_value + 1e-9) continue;
    ++optima;
    if (!best || all[k].perm() < best->perm()) best = all[k];
  }
  return PolarityResult{best_value, *best, optima};
}

namespace {

// w(x) = sum_l u_l(S^{N-l} x): the slot-1 gradient of the Hamiltonian along
// the involution orbit.
Vec head_gradient(const VectorFieldFamily& fam, const NInvolution& S, int x) {
  const int N = fam.order();
  Vec w = Vec::Zero(fam.support().dim());
  for (int l = 1; l < N; ++l) w += fam.field(l - 1, S.apply_power(x, N - l));
  return w;
}

int detect_single_field(const VectorFieldFamily& fam) {
  // Returns the active slot if exactly one field is nonzero, else -1.
  int active = -1;
  for (int l = 0; l < fam.num_fields(); ++l) {
    bool zero = true;
    for (int i = 0; i < fam.support().size(); ++i)
      if (fam.field(l, i).norm() > 0) {
        zero = false;
        break;
      }
    if (!zero) {
      if (active >= 0) return -1;
      active = l;
    }
  }
  return active;
}

}  // namespace

CertificateReport polar_decompose(const VectorFieldFamily& family, const DiscreteMeasure& mu,
                                  const PolarDecomposeOptions& opts) {
  if (!mu.is_uniform())
    throw std::invalid_argument("polar_decompose: requires uniform atom weights");
  const int n = family.support().size();
  const int N = family.order();
  const auto& sup = family.support();

  const auto fam_ptr = std::make_shared<const VectorFieldFamily>(family);
  const CostSpec spec = CostSpec::vector_field(fam_ptr);
  const CostTable c = build_cost_table(spec, mu.support_ptr());

  DualReport duality = duality_report(c, mu);
  // Above the enumeration guard the search falls back to local restarts and
  // the certificate is marked lower-bound-only.
  CycMethod method = opts.method;
  if (method == CycMethod::Exact && count_involutions(n, N) > 10'000'000ull)
    method = CycMethod::Local;
  const bool exact_ok = method == CycMethod::Exact;
  CycSolution cyc = solve_mk_cyc(c, mu, method, opts.seed, duality.mk_sym, opts.local);
  const NInvolution& S = cyc.involution;

  CertificateReport rep{std::move(duality), cyc, 0.0, 0.0, 0.0, false, !exact_ok, {}, std::nullopt};
  rep.gap = rep.duality.mk_sym - cyc.value;

  const auto& Hinf = rep.duality.hamiltonian.values;

  // (4) slots 2..N: H(x, y) >= H(x, Sx..S^{N-1}x) + sum_l <u_l(x), y_l - S^l x>.
  {
    double worst = 0.0;
    std::vector<int> orbit(static_cast<std::size_t>(N));
    const std::vector<int> y_dims(static_cast<std::size_t>(N - 1), n);
    std::vector<int> full(static_cast<std::size_t>(N));
    for (int x = 0; x < n; ++x) {
      orbit[0] = x;
      for (int k = 1; k < N; ++k) orbit[static_cast<std::size_t>(k)] = S.apply_power(x, k);
      const double h_orbit = Hinf.at(orbit);
      full[0] = x;
      for_each_tuple(y_dims, [&](const std::vector<int>& ys) {
        double rhs = h_orbit;
        for (int l = 1; l < N; ++l) {
          const int yl = ys[static_cast<std::size_t>(l - 1)];
          full[static_cast<std::size_t>(l)] = yl;
          rhs += family.field(l - 1, x).dot(sup.point(yl) - sup.point(orbit[static_cast<std::size_t>(l)]));
        }
        worst = std::max(worst, rhs - Hinf.at(full));
      });
    }
    rep.tail_residual = worst;
  }

  // (5) slot 1: H(z, Sx..) <= H(x, Sx..) + <-w(x), z - x>.
  {
    double worst = 0.0;
    std::vector<int> t(static_cast<std::size_t>(N));
    for (int x = 0; x < n; ++x) {
      t[0] = x;
      for (int k = 1; k < N; ++k) t[static_cast<std::size_t>(k)] = S.apply_power(x, k);
      const double h_orbit = Hinf.at(t);
      const Vec w = head_gradient(family, S, x);
      for (int z = 0; z < n; ++z) {
        t[0] = z;
        const double lhs = Hinf.at(t);
        worst = std::max(worst, lhs - h_orbit + w.dot(sup.point(z) - sup.point(x)));
      }
      t[0] = x;
    }
    rep.head_residual = worst;
  }

  rep.residuals_asserted = std::abs(rep.gap) <= opts.gap_tol;

  rep.flags.jointly = check_jointly_n_monotone(family).ok;
  rep.flags.strictly = check_strict_jointly_n_monotone(family).strict;
  rep.flags.each_field_n_monotone = true;
  for (int l = 0; l < family.num_fields() && rep.flags.each_field_n_monotone; ++l) {
    std::vector<Vec> field(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) field[static_cast<std::size_t>(i)] = family.field(l, i);
    rep.flags.each_field_n_monotone = check_n_cyclically_monotone(field, sup, N).ok;
  }

  // (6) single-field mode: emit the two-variable saddle function F.
  const int active = detect_single_field(family);
  if (active == 0 || active == family.num_fields() - 1) {
    std::vector<Vec> u(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = family.field(active, i);

    // Canonical orientation (u, 0, ..., 0): cost <u(x_1), x_2>, the trailing
    // N-2 momenta are pinned to zero by regularize_h0. A leading-zeros family
    // (0,...,0,u) reduces to it by reversing the tuple; the optimal involution
    // maps to its inverse power, so F pairs x with Tx, T = S^{N-1}.
    NInvolution T = S;
    HamiltonianTable h_for_f = rep.duality.hamiltonian;
    if (active == family.num_fields() - 1 && N > 2) {
      std::vector<int> inv_perm(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        inv_perm[static_cast<std::size_t>(i)] = S.apply_power(i, N - 1);
      T = NInvolution(std::move(inv_perm), N);
      std::vector<std::vector<Vec>> fields(static_cast<std::size_t>(N - 1),
                                           std::vector<Vec>(static_cast<std::size_t>(n),
                                                            Vec::Zero(sup.dim())));
      fields[0] = u;
      const auto rev_fam = std::make_shared<const VectorFieldFamily>(mu.support_ptr(), fields,
                                                                     family.bound());
      const CostTable rc = build_cost_table(CostSpec::vector_field(rev_fam), mu.support_ptr());
      h_for_f = duality_report(rc, mu).hamiltonian;
    }

    const EvalGrid grid = make_eval_grid(mu.support_ptr(), opts.grid_m);
    H0Result h0 = regularize_h0(h_for_f, grid, N - 2);

    SingleFieldCertificate sf;
    sf.F = h0.F;
    sf.tau = h0.tau;
    for (int i = 0; i < n; ++i) sf.diag_max_abs = std::max(sf.diag_max_abs, std::abs(sf.F(i, i)));
    {
      double worst = -std::numeric_limits<double>::infinity();
      for_each_cube_tuple(n, N, [&](const std::vector<int>& cyc_t) {
        double s = 0.0;
        for (int i = 0; i < N; ++i)
          s += sf.F(cyc_t[static_cast<std::size_t>(i)], cyc_t[static_cast<std::size_t>((i + 1) % N)]);
        worst = std::max(worst, s);
      });
      sf.cycle_max_sum = worst;
    }
    // (-u(Tx), u(x)) in dF(x, Tx): superdifferential in the first slot,
    // subdifferential in the second.
    for (int x = 0; x < n; ++x) {
      const int tx = T.apply(x);
      const double f_orbit = sf.F(x, tx);
      const Vec& ux = u[static_cast<std::size_t>(x)];
      const Vec& utx = u[static_cast<std::size_t>(tx)];
      for (int z = 0; z < n; ++z) {
        sf.head_residual = std::max(
            sf.head_residual, sf.F(z, tx) - f_orbit + utx.dot(sup.point(z) - sup.point(x)));
        sf.tail_residual = std::max(
            sf.tail_residual, f_orbit + ux.dot(sup.point(z) - sup.point(tx)) - sf.F(x, z));
      }
    }
    rep.single_field = std::move(sf);
  }

  return rep;
}

}  // namespace symot
