#include "symot/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace symot {

namespace {

constexpr double kExactTol = 1e-9;

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Flat iteration over ball^(arity) tuples; fn(flat, tuple).
template <class F>
void for_each_ball_tuple(int nb, int arity, F&& fn) {
  std::vector<int> t(static_cast<std::size_t>(arity), 0);
  std::size_t flat = 0;
  if (arity == 0) {
    fn(flat, t);
    return;
  }
  for (;;) {
    fn(flat, t);
    ++flat;
    int i = arity - 1;
    while (i >= 0 && ++t[static_cast<std::size_t>(i)] == nb) {
      t[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
  }
}

}  // namespace

EvalGrid make_eval_grid(SupportPtr support, int m) {
  if (!support) throw std::invalid_argument("make_eval_grid: null support");
  const int d = support->dim();
  if (d > 2) throw std::invalid_argument("make_eval_grid: ball grid limited to d <= 2");
  if (m < 3 || m % 2 == 0)
    throw std::invalid_argument("make_eval_grid: m must be odd and >= 3 (origin must be a node)");

  EvalGrid g;
  g.support = std::move(support);
  g.radius = g.support->radius();
  g.m = m;

  const double h = 2.0 * g.radius / static_cast<double>(m - 1);
  std::map<std::array<int, 2>, int> index_of;
  std::vector<std::array<int, 2>> coords;
  auto push_node = [&](int i, int j) {
    Vec p(d);
    p[0] = -g.radius + h * static_cast<double>(i);
    if (d == 2) p[1] = -g.radius + h * static_cast<double>(j);
    if (p.norm() <= g.radius + 1e-12) {
      index_of[{i, j}] = static_cast<int>(g.ball.size());
      coords.push_back({i, j});
      g.ball.push_back(std::move(p));
    }
  };
  if (d == 1) {
    for (int i = 0; i < m; ++i) push_node(i, 0);
  } else {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) push_node(i, j);
  }

  for (int id = 0; id < static_cast<int>(coords.size()); ++id) {
    const auto [i, j] = coords[static_cast<std::size_t>(id)];
    for (int axis = 0; axis < d; ++axis) {
      const int di = axis == 0 ? 1 : 0, dj = axis == 0 ? 0 : 1;
      auto lo = index_of.find({i - di, j - dj});
      auto hi = index_of.find({i + di, j + dj});
      if (hi != index_of.end()) g.ball_adjacent.push_back({id, hi->second});
      if (lo != index_of.end() && hi != index_of.end())
        g.ball_triples.push_back({lo->second, id, hi->second});
    }
  }
  return g;
}

double grid_tolerance(const EvalGrid& grid, double coeff) {
  return coeff * grid.radius / static_cast<double>(grid.m);
}

int domain_size(const EvalGrid& grid, SlotDomain d) {
  switch (d) {
    case SlotDomain::Support: return grid.n();
    case SlotDomain::Ball: return grid.nb();
    case SlotDomain::Combined: return grid.n() + grid.nb();
  }
  return 0;
}

const Vec& grid_point(const EvalGrid& grid, SlotDomain d, int idx) {
  switch (d) {
    case SlotDomain::Support: return grid.support->point(idx);
    case SlotDomain::Ball: return grid.ball[static_cast<std::size_t>(idx)];
    case SlotDomain::Combined:
      return idx < grid.n() ? grid.support->point(idx)
                            : grid.ball[static_cast<std::size_t>(idx - grid.n())];
  }
  throw std::logic_error("grid_point: bad domain");
}

GridFunction to_grid_function(const HamiltonianTable& H) {
  return GridFunction{std::vector<SlotDomain>(static_cast<std::size_t>(H.order()),
                                              SlotDomain::Support),
                      H.values};
}

namespace {

// <support_i, ball_j> etc., precomputed once per transform.
Eigen::MatrixXd dots_support_ball(const EvalGrid& g) {
  Eigen::MatrixXd M(g.n(), g.nb());
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.nb(); ++j)
      M(i, j) = g.support->point(i).dot(g.ball[static_cast<std::size_t>(j)]);
  return M;
}

Eigen::MatrixXd dots_ball_ball(const EvalGrid& g) {
  Eigen::MatrixXd M(g.nb(), g.nb());
  for (int i = 0; i < g.nb(); ++i)
    for (int j = 0; j < g.nb(); ++j)
      M(i, j) = g.ball[static_cast<std::size_t>(i)].dot(g.ball[static_cast<std::size_t>(j)]);
  return M;
}

Eigen::MatrixXd dots_support_support(const EvalGrid& g) {
  Eigen::MatrixXd M(g.n(), g.n());
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) M(i, j) = g.support->point(i).dot(g.support->point(j));
  return M;
}

void check_budget(const EvalGrid& g, int tail) {
  const std::size_t nbt = ipow(static_cast<std::size_t>(g.nb()), tail);
  if (nbt * nbt * static_cast<std::size_t>(g.n()) > 4'000'000'000ull)
    throw std::length_error("regularize: ball-grid tuple budget exceeded (reduce m, n or N)");
}

}  // namespace

GridFunction legendre_LH(const GridFunction& H, const EvalGrid& grid) {
  const int N = H.values.order();
  const int n = grid.n(), nb = grid.nb();
  for (auto s : H.slots)
    if (s != SlotDomain::Support)
      throw std::invalid_argument("legendre_LH: H must be tabulated on support tuples");
  const int tail = N - 1;
  const Eigen::MatrixXd SB = dots_support_ball(grid);

  std::vector<int> dims{n};
  for (int i = 0; i < tail; ++i) dims.push_back(nb);
  GridFunction L{std::vector<SlotDomain>{SlotDomain::Support}, NdTable(dims)};
  for (int i = 0; i < tail; ++i) L.slots.push_back(SlotDomain::Ball);

  const std::vector<int> y_dims(static_cast<std::size_t>(tail), n);
  std::vector<int> full(static_cast<std::size_t>(N));
  for (int x = 0; x < n; ++x) {
    full[0] = x;
    for_each_ball_tuple(nb, tail, [&](std::size_t pf, const std::vector<int>& p) {
      double best = -std::numeric_limits<double>::infinity();
      for_each_tuple(y_dims, [&](const std::vector<int>& y) {
        double s = 0.0;
        for (int i = 0; i < tail; ++i) {
          s += SB(y[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(i)]);
          full[static_cast<std::size_t>(i) + 1] = y[static_cast<std::size_t>(i)];
        }
        best = std::max(best, s - H.values.at(full));
      });
      L.values[static_cast<std::size_t>(x) * ipow(static_cast<std::size_t>(nb), tail) + pf] = best;
    });
  }
  return L;
}

GridFunction restricted_star(const GridFunction& L, const EvalGrid& grid) {
  const int N = L.values.order();
  const int tail = N - 1;
  const int n = grid.n(), nb = grid.nb();
  check_budget(grid, tail);
  const Eigen::MatrixXd BB = dots_ball_ball(grid);
  const Eigen::MatrixXd SS = dots_support_support(grid);
  const std::size_t nbt = ipow(static_cast<std::size_t>(nb), tail);

  // M(p, q) = max_{y in ball^{tail}} sum BB(p_i, y_i) - L(q, y).
  Eigen::MatrixXd M(static_cast<Eigen::Index>(nbt), n);
  for_each_ball_tuple(nb, tail, [&](std::size_t pf, const std::vector<int>& p) {
    for (int q = 0; q < n; ++q) {
      double best = -std::numeric_limits<double>::infinity();
      for_each_ball_tuple(nb, tail, [&](std::size_t yf, const std::vector<int>& y) {
        double s = 0.0;
        for (int i = 0; i < tail; ++i)
          s += BB(p[static_cast<std::size_t>(i)], y[static_cast<std::size_t>(i)]);
        best = std::max(best, s - L.values[static_cast<std::size_t>(q) * nbt + yf]);
      });
      M(static_cast<Eigen::Index>(pf), q) = best;
    }
  });

  std::vector<int> dims(static_cast<std::size_t>(tail), nb);
  dims.push_back(n);
  GridFunction Ls{std::vector<SlotDomain>(static_cast<std::size_t>(tail), SlotDomain::Ball),
                  NdTable(dims)};
  Ls.slots.push_back(SlotDomain::Support);
  for_each_ball_tuple(nb, tail, [&](std::size_t pf, const std::vector<int>&) {
    for (int x = 0; x < n; ++x) {
      double best = -std::numeric_limits<double>::infinity();
      for (int q = 0; q < n; ++q) best = std::max(best, SS(q, x) + M(static_cast<Eigen::Index>(pf), q));
      Ls.values[pf * static_cast<std::size_t>(n) + static_cast<std::size_t>(x)] = best;
    }
  });
  return Ls;
}

double DoubleStar::eval(const Vec& x, std::size_t ball_tuple_flat) const {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < support_points.size(); ++q)
    best = std::max(best, x.dot(support_points[q]) + T(static_cast<Eigen::Index>(ball_tuple_flat),
                                                       static_cast<Eigen::Index>(q)));
  return best;
}

DoubleStar restricted_double_star(const GridFunction& Lstar, const EvalGrid& grid) {
  const int N = Lstar.values.order();
  const int tail = N - 1;
  const int n = grid.n(), nb = grid.nb();
  check_budget(grid, tail);
  const Eigen::MatrixXd BB = dots_ball_ball(grid);
  const std::size_t nbt = ipow(static_cast<std::size_t>(nb), tail);

  DoubleStar out;
  out.support_points = grid.support->points();
  out.T.resize(static_cast<Eigen::Index>(nbt), n);
  for_each_ball_tuple(nb, tail, [&](std::size_t pf, const std::vector<int>& p) {
    for (int q = 0; q < n; ++q) {
      double best = -std::numeric_limits<double>::infinity();
      for_each_ball_tuple(nb, tail, [&](std::size_t xf, const std::vector<int>& xs) {
        double s = 0.0;
        for (int i = 0; i < tail; ++i)
          s += BB(p[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(i)]);
        best = std::max(best, s - Lstar.values[xf * static_cast<std::size_t>(n) +
                                               static_cast<std::size_t>(q)]);
      });
      out.T(static_cast<Eigen::Index>(pf), q) = best;
    }
  });

  std::vector<int> dims{n + nb};
  for (int i = 0; i < tail; ++i) dims.push_back(nb);
  out.table = GridFunction{std::vector<SlotDomain>{SlotDomain::Combined}, NdTable(dims)};
  for (int i = 0; i < tail; ++i) out.table.slots.push_back(SlotDomain::Ball);
  for (int xc = 0; xc < n + nb; ++xc) {
    const Vec& x = grid_point(grid, SlotDomain::Combined, xc);
    for (std::size_t pf = 0; pf < nbt; ++pf)
      out.table.values[static_cast<std::size_t>(xc) * nbt + pf] = out.eval(x, pf);
  }
  return out;
}

GridFunction ball_hamiltonian(const GridFunction& L, const EvalGrid& grid) {
  const int N = L.values.order();
  const int tail = N - 1;
  const int n = grid.n(), nb = grid.nb();
  for (int i = 1; i < N; ++i)
    if (L.slots[static_cast<std::size_t>(i)] != SlotDomain::Ball)
      throw std::invalid_argument("ball_hamiltonian: momentum slots must range over the ball grid");
  const int d0 = domain_size(grid, L.slots[0]);
  const Eigen::MatrixXd SB = dots_support_ball(grid);
  const std::size_t nbt = ipow(static_cast<std::size_t>(nb), tail);

  std::vector<int> dims{d0};
  for (int i = 0; i < tail; ++i) dims.push_back(n);
  GridFunction H{std::vector<SlotDomain>{L.slots[0]}, NdTable(dims)};
  for (int i = 0; i < tail; ++i) H.slots.push_back(SlotDomain::Support);

  const std::vector<int> y_dims(static_cast<std::size_t>(tail), n);
  const std::size_t y_count = ipow(static_cast<std::size_t>(n), tail);
  for (int xc = 0; xc < d0; ++xc) {
    std::size_t yi = 0;
    for_each_tuple(y_dims, [&](const std::vector<int>& y) {
      double best = -std::numeric_limits<double>::infinity();
      for_each_ball_tuple(nb, tail, [&](std::size_t pf, const std::vector<int>& p) {
        double s = 0.0;
        for (int i = 0; i < tail; ++i)
          s += SB(y[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(i)]);
        best = std::max(best, s - L.values[static_cast<std::size_t>(xc) * nbt + pf]);
      });
      H.values[static_cast<std::size_t>(xc) * y_count + yi] = best;
      ++yi;
    });
  }
  return H;
}

double RegPipeline::h1_eval(const Vec& x, const std::vector<Vec>& ys) const {
  const int tail = static_cast<int>(ys.size());
  const int nb = grid.nb();
  // L**(x, p) for this x, all p: max_q <x, q> + T(p, q).
  Eigen::VectorXd xdots(grid.n());
  for (int q = 0; q < grid.n(); ++q) xdots[q] = x.dot(grid.support->point(q));
  std::vector<Eigen::VectorXd> ydots(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    ydots[i].resize(nb);
    for (int p = 0; p < nb; ++p) ydots[i][p] = ys[i].dot(grid.ball[static_cast<std::size_t>(p)]);
  }
  double best = -std::numeric_limits<double>::infinity();
  for_each_ball_tuple(nb, tail, [&](std::size_t pf, const std::vector<int>& p) {
    double lin = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) lin += ydots[i][p[i]];
    double lss = -std::numeric_limits<double>::infinity();
    for (int q = 0; q < grid.n(); ++q)
      lss = std::max(lss, xdots[q] + Lss.T(static_cast<Eigen::Index>(pf), q));
    best = std::max(best, lin - lss);
  });
  return best;
}

RegPipeline run_reg_pipeline(const HamiltonianTable& H, const EvalGrid& grid) {
  RegPipeline pipe{grid, to_grid_function(H), {}, {}, {}, {}, {}, {}, 0.0, {}};
  pipe.L = legendre_LH(pipe.H, grid);
  pipe.Lstar = restricted_star(pipe.L, grid);
  pipe.Lss = restricted_double_star(pipe.Lstar, grid);
  pipe.H1 = ball_hamiltonian(pipe.Lss.table, grid);

  const int N = H.order();
  const int n = grid.n();
  pipe.H1_support = NdTable::cube(n, N);
  std::vector<int> t;
  const std::size_t y_count = ipow(static_cast<std::size_t>(n), N - 1);
  for (std::size_t f = 0; f < pipe.H1_support.size(); ++f) {
    pipe.H1_support.unflatten_into(f, t);
    std::size_t yflat = 0;
    for (int i = 1; i < N; ++i)
      yflat = yflat * static_cast<std::size_t>(n) + static_cast<std::size_t>(t[static_cast<std::size_t>(i)]);
    pipe.H1_support[f] =
        pipe.H1.values[static_cast<std::size_t>(t[0]) * y_count + yflat];
  }
  pipe.H2_support = regularize_h2(pipe.H1_support);
  pipe.tau = grid_tolerance(grid);
  pipe.h1_subanti = check_subantisymmetric(pipe.H1_support, pipe.tau);
  return pipe;
}

RegPipeline regularize_h1(const HamiltonianTable& H, const EvalGrid& grid) {
  return run_reg_pipeline(H, grid);
}

NdTable regularize_h2(const NdTable& H1_support) {
  const int N = H1_support.order();
  NdTable H2(H1_support.dims());
  std::vector<int> t, r;
  for (std::size_t f = 0; f < H1_support.size(); ++f) {
    H1_support.unflatten_into(f, t);
    double v = (static_cast<double>(N) - 1.0) * H1_support[f];
    r = t;
    for (int k = 1; k < N; ++k) {
      r.push_back(r.front());
      r.erase(r.begin());
      v -= H1_support.at(r);
    }
    H2[f] = v / static_cast<double>(N);
  }
  return H2;
}

H0Result regularize_h0(const HamiltonianTable& H, const EvalGrid& grid, int zero_tail) {
  const int N = H.order();
  if (zero_tail < 0 || zero_tail >= N)
    throw std::invalid_argument("regularize_h0: zero_tail must lie in [0, N)");
  const int n = grid.n(), nb = grid.nb();
  const int tail = N - 1;
  const int head = tail - zero_tail;  // momenta that remain free

  GridFunction L = legendre_LH(to_grid_function(H), grid);
  GridFunction Ls = restricted_star(L, grid);
  const Eigen::MatrixXd BB = dots_ball_ball(grid);
  const Eigen::MatrixXd SS = dots_support_support(grid);
  const Eigen::MatrixXd SB = dots_support_ball(grid);
  const std::size_t nbh = ipow(static_cast<std::size_t>(nb), head);

  // U(p_head, q) = max over full ball tuples of sum_head BB - L*(x, q):
  // the pinned momenta contribute nothing.
  Eigen::MatrixXd U(static_cast<Eigen::Index>(nbh), n);
  for_each_ball_tuple(nb, head, [&](std::size_t pf, const std::vector<int>& p) {
    for (int q = 0; q < n; ++q) {
      double best = -std::numeric_limits<double>::infinity();
      for_each_ball_tuple(nb, tail, [&](std::size_t xf, const std::vector<int>& xs) {
        double s = 0.0;
        for (int i = 0; i < head; ++i)
          s += BB(p[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(i)]);
        best = std::max(best, s - Ls.values[xf * static_cast<std::size_t>(n) +
                                            static_cast<std::size_t>(q)]);
      });
      U(static_cast<Eigen::Index>(pf), q) = best;
    }
  });

  // F0(x_1..x_{N-zero_tail}) = max_{p_head} sum <p_i, x_{i+1}> - L**(x_1, p_head, 0..0).
  H0Result out;
  out.F0 = NdTable::cube(n, N - zero_tail);
  std::vector<int> t;
  for (std::size_t f = 0; f < out.F0.size(); ++f) {
    out.F0.unflatten_into(f, t);
    double best = -std::numeric_limits<double>::infinity();
    for_each_ball_tuple(nb, head, [&](std::size_t pf, const std::vector<int>& p) {
      double lin = 0.0;
      for (int i = 0; i < head; ++i)
        lin += SB(t[static_cast<std::size_t>(i) + 1], p[static_cast<std::size_t>(i)]);
      double lss = -std::numeric_limits<double>::infinity();
      for (int q = 0; q < n; ++q)
        lss = std::max(lss, SS(t[0], q) + U(static_cast<Eigen::Index>(pf), q));
      best = std::max(best, lin - lss);
    });
    out.F0[f] = best;
  }

  out.h0_support = NdTable::cube(n, N);
  std::vector<int> core(static_cast<std::size_t>(N - zero_tail));
  for (std::size_t f = 0; f < out.h0_support.size(); ++f) {
    out.h0_support.unflatten_into(f, t);
    for (int i = 0; i < N - zero_tail; ++i) core[static_cast<std::size_t>(i)] = t[static_cast<std::size_t>(i)];
    out.h0_support[f] = out.F0.at(core);
  }
  if (N - zero_tail == 2) {
    out.F.resize(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) out.F(a, b) = out.F0.at({a, b});
  }
  out.tau = grid_tolerance(grid);
  out.subanti = check_subantisymmetric(out.h0_support, out.tau);
  return out;
}

namespace {

AuditItem make_item(double worst, double tol, std::string note = {}, std::vector<int> witness = {}) {
  return AuditItem{worst <= tol, worst, std::move(witness), std::move(note)};
}

}  // namespace

PipelineAuditReport audit_pipeline(const HamiltonianTable& H, const EvalGrid& grid) {
  return audit_pipeline(run_reg_pipeline(H, grid));
}

PipelineAuditReport audit_pipeline(const RegPipeline& pipe) {
  const EvalGrid& grid = pipe.grid;
  const int N = pipe.H.values.order();
  const int n = grid.n(), nb = grid.nb();
  const double R = grid.radius;
  const double tau = pipe.tau;

  PipelineAuditReport rep;
  rep.tau = tau;
  rep.measured_subanti = std::max(0.0, std::max(pipe.h1_subanti.max_sum, pipe.h1_subanti.max_diag_abs));
  rep.empirical_coeff = rep.measured_subanti * static_cast<double>(grid.m) / R;

  const std::size_t y_count = ipow(static_cast<std::size_t>(n), N - 1);
  const std::vector<int> y_dims(static_cast<std::size_t>(N - 1), n);

  // (i) H1 concave in x along ball grid lines and in H_N^- on support tuples
  // (both grid-limited), convex in each trailing slot (exact: max of affine
  // functions).
  {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& tri : grid.ball_triples) {
      const std::size_t a = static_cast<std::size_t>(n + tri[0]) * y_count;
      const std::size_t b = static_cast<std::size_t>(n + tri[1]) * y_count;
      const std::size_t c = static_cast<std::size_t>(n + tri[2]) * y_count;
      for (std::size_t yf = 0; yf < y_count; ++yf) {
        const double gap = 0.5 * (pipe.H1.values[a + yf] + pipe.H1.values[c + yf]) -
                           pipe.H1.values[b + yf];
        worst = std::max(worst, gap);
      }
    }
    worst = std::max(worst, rep.measured_subanti);
    rep.concavity_slot1 =
        make_item(worst, tau, "slot-1 midpoint excess and H_N^- membership residual");
  }
  {
    double worst = -std::numeric_limits<double>::infinity();
    std::vector<Vec> ys(static_cast<std::size_t>(N - 1));
    const std::vector<int> other_dims(static_cast<std::size_t>(N - 2), n);
    for (int slot = 0; slot + 1 < N; ++slot) {
      for (const auto& tri : grid.ball_triples) {
        for (int x = 0; x < n; ++x) {
          for_each_tuple(other_dims, [&](const std::vector<int>& rest) {
            int r = 0;
            for (int i = 0; i + 1 < N; ++i) {
              if (i == slot) continue;
              ys[static_cast<std::size_t>(i)] = grid.support->point(rest[static_cast<std::size_t>(r)]);
              ++r;
            }
            const Vec& xp = grid.support->point(x);
            ys[static_cast<std::size_t>(slot)] = grid.ball[static_cast<std::size_t>(tri[0])];
            const double fa = pipe.h1_eval(xp, ys);
            ys[static_cast<std::size_t>(slot)] = grid.ball[static_cast<std::size_t>(tri[1])];
            const double fb = pipe.h1_eval(xp, ys);
            ys[static_cast<std::size_t>(slot)] = grid.ball[static_cast<std::size_t>(tri[2])];
            const double fc = pipe.h1_eval(xp, ys);
            worst = std::max(worst, fb - 0.5 * (fa + fc));
          });
        }
      }
    }
    rep.convexity_tail = make_item(worst, kExactTol, "midpoint excess over ball triples, tail slots");
  }

  // (ii) H2 in H_N and H2 >= H1.
  {
    const auto anti = check_antisymmetric(pipe.H2_support, 1e-10);
    rep.h2_antisym = make_item(anti.max_residual, 1e-10, "max |orbit sum| of H2", anti.worst_tuple);
    double worst = -std::numeric_limits<double>::infinity();
    std::vector<int> where, t;
    for (std::size_t f = 0; f < pipe.H1_support.size(); ++f)
      if (pipe.H1_support[f] - pipe.H2_support[f] > worst) {
        worst = pipe.H1_support[f] - pipe.H2_support[f];
        pipe.H1_support.unflatten_into(f, t);
        where = t;
      }
    rep.domination = make_item(worst, tau, "max H1 - H2", where);
  }

  // (iii) L_{H2} <= L_{H1} <= L_H on support x ball^{N-1}.
  GridFunction LH1 = legendre_LH(
      GridFunction{std::vector<SlotDomain>(static_cast<std::size_t>(N), SlotDomain::Support),
                   pipe.H1_support},
      grid);
  {
    GridFunction LH2 = legendre_LH(
        GridFunction{std::vector<SlotDomain>(static_cast<std::size_t>(N), SlotDomain::Support),
                     pipe.H2_support},
        grid);
    // L_{H1} <= L_H is an exact discrete inequality; L_{H2} <= L_{H1} inherits
    // the grid error of H2 >= H1 and is checked at tau.
    double worst_exact = -std::numeric_limits<double>::infinity();
    double worst_grid = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < LH1.values.size(); ++f) {
      worst_grid = std::max(worst_grid, LH2.values[f] - LH1.values[f]);
      worst_exact = std::max(worst_exact, LH1.values[f] - pipe.L.values[f]);
    }
    rep.l_ordering = AuditItem{worst_exact <= kExactTol && worst_grid <= tau,
                               std::max(worst_exact, worst_grid),
                               {},
                               "max violation of L_{H2} <= L_{H1} (tau) and L_{H1} <= L_H (exact)"};
  }

  // (iv) |L_{H1}| <= R|x| + R sum|p_i| + (2N+1) R^2.
  {
    const std::size_t nbt = ipow(static_cast<std::size_t>(nb), N - 1);
    double worst = -std::numeric_limits<double>::infinity();
    for (int x = 0; x < n; ++x) {
      const double nx = grid.support->point(x).norm();
      for_each_ball_tuple(nb, N - 1, [&](std::size_t pf, const std::vector<int>& p) {
        double bound = R * nx + (2.0 * N + 1.0) * R * R;
        for (int i = 0; i + 1 < N; ++i)
          bound += R * grid.ball[static_cast<std::size_t>(p[static_cast<std::size_t>(i)])].norm();
        worst = std::max(worst, std::abs(LH1.values[static_cast<std::size_t>(x) * nbt + pf]) - bound);
      });
    }
    rep.l_bound = make_item(worst, kExactTol, "growth bound excess for L_{H1}");
  }

  // (v) |H1| <= R|x| + R sum|y_i| + 2N R^2 on the tabulated tuples.
  {
    double worst = -std::numeric_limits<double>::infinity();
    std::vector<int> t, where;
    for (std::size_t f = 0; f < pipe.H1.values.size(); ++f) {
      pipe.H1.values.unflatten_into(f, t);
      double bound = R * grid_point(grid, SlotDomain::Combined, t[0]).norm() + 2.0 * N * R * R;
      for (int i = 1; i < N; ++i) bound += R * grid.support->point(t[static_cast<std::size_t>(i)]).norm();
      if (std::abs(pipe.H1.values[f]) - bound > worst) {
        worst = std::abs(pipe.H1.values[f]) - bound;
        where = t;
      }
    }
    rep.h1_bound = make_item(worst, kExactTol, "growth bound excess", where);
  }

  // (vi) difference quotients of H2 and L_{H2} bounded by 4NR.
  {
    const double lip = 4.0 * N * R;
    double worst = -std::numeric_limits<double>::infinity();
    std::vector<int> t, s;
    for (std::size_t f = 0; f < pipe.H2_support.size(); ++f) {
      pipe.H2_support.unflatten_into(f, t);
      s = t;
      for (int slot = 0; slot < N; ++slot) {
        for (int j = t[static_cast<std::size_t>(slot)] + 1; j < n; ++j) {
          s[static_cast<std::size_t>(slot)] = j;
          const double dist = (grid.support->point(t[static_cast<std::size_t>(slot)]) -
                               grid.support->point(j)).norm();
          worst = std::max(worst, std::abs(pipe.H2_support[f] - pipe.H2_support.at(s)) / dist - lip);
        }
        s[static_cast<std::size_t>(slot)] = t[static_cast<std::size_t>(slot)];
      }
    }
    GridFunction LH2 = legendre_LH(
        GridFunction{std::vector<SlotDomain>(static_cast<std::size_t>(N), SlotDomain::Support),
                     pipe.H2_support},
        grid);
    const std::size_t nbt = ipow(static_cast<std::size_t>(nb), N - 1);
    // x-direction quotients over support pairs.
    for (std::size_t pf = 0; pf < nbt; ++pf)
      for (int x = 0; x < n; ++x)
        for (int x2 = x + 1; x2 < n; ++x2) {
          const double dist = (grid.support->point(x) - grid.support->point(x2)).norm();
          const double dv = std::abs(LH2.values[static_cast<std::size_t>(x) * nbt + pf] -
                                     LH2.values[static_cast<std::size_t>(x2) * nbt + pf]);
          worst = std::max(worst, dv / dist - lip);
        }
    // p-direction quotients over adjacent ball nodes, one slot at a time.
    std::vector<int> p;
    for (int x = 0; x < n; ++x) {
      for_each_ball_tuple(nb, N - 1, [&](std::size_t pf, const std::vector<int>& pt) {
        for (int slot = 0; slot + 1 < N; ++slot) {
          for (const auto& adj : grid.ball_adjacent) {
            if (pt[static_cast<std::size_t>(slot)] != adj[0]) continue;
            p = pt;
            p[static_cast<std::size_t>(slot)] = adj[1];
            std::size_t pf2 = 0;
            for (int i = 0; i + 1 < N; ++i)
              pf2 = pf2 * static_cast<std::size_t>(nb) + static_cast<std::size_t>(p[static_cast<std::size_t>(i)]);
            const double dist = (grid.ball[static_cast<std::size_t>(adj[0])] -
                                 grid.ball[static_cast<std::size_t>(adj[1])]).norm();
            const double dv = std::abs(LH2.values[static_cast<std::size_t>(x) * nbt + pf] -
                                       LH2.values[static_cast<std::size_t>(x) * nbt + pf2]);
            worst = std::max(worst, dv / dist - lip);
          }
        }
      });
    }
    rep.lipschitz = make_item(worst, kExactTol, "difference quotient excess over 4NR");
  }

  rep.all_pass = rep.concavity_slot1.pass && rep.convexity_tail.pass && rep.h2_antisym.pass &&
                 rep.domination.pass && rep.l_ordering.pass && rep.l_bound.pass &&
                 rep.h1_bound.pass && rep.lipschitz.pass;
  return rep;
}

PartialConvexReport partial_convexification(const NdTable& H_support, int x, const EvalGrid& grid) {
  const int N = H_support.order();
  const int tail = N - 1;
  const int n = grid.n(), nb = grid.nb();
  const Eigen::MatrixXd SB = dots_support_ball(grid);
  const std::size_t nbt = ipow(static_cast<std::size_t>(nb), tail);
  const std::vector<int> z_dims(static_cast<std::size_t>(tail), n);

  std::vector<int> full(static_cast<std::size_t>(N));
  full[0] = x;

  // f*(y) over the ball grid; the +infinity extension restricts the sup to
  // support tuples.
  std::vector<double> fstar(nbt);
  for_each_ball_tuple(nb, tail, [&](std::size_t yf, const std::vector<int>& y) {
    double best = -std::numeric_limits<double>::infinity();
    for_each_tuple(z_dims, [&](const std::vector<int>& z) {
      double s = 0.0;
      for (int i = 0; i < tail; ++i) {
        s += SB(z[static_cast<std::size_t>(i)], y[static_cast<std::size_t>(i)]);
        full[static_cast<std::size_t>(i) + 1] = z[static_cast<std::size_t>(i)];
      }
      best = std::max(best, s - H_support.at(full));
    });
    fstar[yf] = best;
  });

  auto fss_at = [&](const std::vector<const Vec*>& zs) {
    double best = -std::numeric_limits<double>::infinity();
    for_each_ball_tuple(nb, tail, [&](std::size_t yf, const std::vector<int>& y) {
      double s = 0.0;
      for (int i = 0; i < tail; ++i)
        s += zs[static_cast<std::size_t>(i)]->dot(grid.ball[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])]);
      best = std::max(best, s - fstar[yf]);
    });
    return best;
  };

  PartialConvexReport rep;
  rep.biconjugate = NdTable::cube(n, tail);
  std::vector<const Vec*> zs(static_cast<std::size_t>(tail));
  for_each_tuple(z_dims, [&](const std::vector<int>& z) {
    for (int i = 0; i < tail; ++i) {
      zs[static_cast<std::size_t>(i)] = &grid.support->point(z[static_cast<std::size_t>(i)]);
      full[static_cast<std::size_t>(i) + 1] = z[static_cast<std::size_t>(i)];
    }
    const double fss = fss_at(zs);
    rep.biconjugate.at(z) = fss;
    rep.max_residual = std::max(rep.max_residual, std::abs(H_support.at(full) - fss));
  });

  // The two Legendre expressions agree: the sup over support tuples matches
  // the sup over the enlarged grid.
  const std::vector<int> comb_dims(static_cast<std::size_t>(tail), n + nb);
  std::vector<double> fss_comb(ipow(static_cast<std::size_t>(n + nb), tail));
  Eigen::MatrixXd CB(n + nb, nb);
  for (int z = 0; z < n + nb; ++z)
    for (int p = 0; p < nb; ++p)
      CB(z, p) = grid_point(grid, SlotDomain::Combined, z).dot(grid.ball[static_cast<std::size_t>(p)]);
  {
    std::size_t i = 0;
    for_each_tuple(comb_dims, [&](const std::vector<int>& z) {
      for (int k = 0; k < tail; ++k)
        zs[static_cast<std::size_t>(k)] = &grid_point(grid, SlotDomain::Combined, z[static_cast<std::size_t>(k)]);
      fss_comb[i++] = fss_at(zs);
    });
  }
  for_each_ball_tuple(nb, tail, [&](std::size_t, const std::vector<int>& p) {
    double sup_supp = -std::numeric_limits<double>::infinity();
    double sup_comb = -std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    for_each_tuple(comb_dims, [&](const std::vector<int>& z) {
      double s = 0.0;
      bool all_supp = true;
      for (int k = 0; k < tail; ++k) {
        if (z[static_cast<std::size_t>(k)] >= n) all_supp = false;
        s += CB(z[static_cast<std::size_t>(k)], p[static_cast<std::size_t>(k)]);
      }
      s -= fss_comb[i];
      sup_comb = std::max(sup_comb, s);
      if (all_supp) sup_supp = std::max(sup_supp, s);
      ++i;
    });
    rep.also_gap = std::max(rep.also_gap, std::abs(sup_comb - sup_supp));
  });
  return rep;
}

}  // namespace symot
