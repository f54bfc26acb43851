#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "symot/core.hpp"
#include "symot/rng.hpp"

namespace tu {

inline symot::Vec v1(double x) {
  symot::Vec v(1);
  v << x;
  return v;
}

inline symot::Vec v2(double x, double y) {
  symot::Vec v(2);
  v << x, y;
  return v;
}

// Independent oracle helper: every permutation of {0..n-1}.
inline std::vector<std::vector<int>> all_permutations(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

inline bool perm_power_is_identity(const std::vector<int>& perm, int N) {
  for (int i = 0; i < static_cast<int>(perm.size()); ++i) {
    int j = i;
    for (int k = 0; k < N; ++k) j = perm[static_cast<std::size_t>(j)];
    if (j != i) return false;
  }
  return true;
}

// Seeded sub-antisymmetric Hamiltonian: antisymmetrized noise plus a
// nonpositive sigma-invariant part with zero diagonal.
inline symot::HamiltonianTable random_subantisym(symot::SupportPtr sup, int N, std::uint64_t seed,
                                                 double noise = 0.5) {
  using namespace symot;
  const int n = sup->size();
  CounterRng rng(seed);
  NdTable T = NdTable::cube(n, N);
  for (auto& v : T.data()) v = rng.next_range(-noise, noise);
  NdTable H = NdTable::cube(n, N);
  std::vector<int> t, r;
  for (std::size_t f = 0; f < H.size(); ++f) {
    H.unflatten_into(f, t);
    double avg = 0.0;
    r = t;
    for (int k = 0; k < N; ++k) {
      avg += T.at(r);
      r = cyclic_shift(r, 1);
    }
    double spread = 0.0;
    for (int i = 0; i < N; ++i)
      spread += (sup->point(t[static_cast<std::size_t>(i)]) -
                 sup->point(t[static_cast<std::size_t>((i + 1) % N)]))
                    .squaredNorm();
    H[f] = T[f] - avg / static_cast<double>(N) - 0.25 * spread;
  }
  return HamiltonianTable{std::move(H), std::move(sup)};
}

// Seeded cloud of pairwise-distinct points in the ball of radius 0.9 R,
// coordinates rounded to 1e-12.
inline symot::SupportPtr random_cloud(int n, int d, std::uint64_t seed, double radius = 1.0) {
  symot::CounterRng rng(seed);
  std::vector<symot::Vec> pts;
  while (static_cast<int>(pts.size()) < n) {
    symot::Vec p(d);
    for (int k = 0; k < d; ++k) p[k] = rng.next_range(-0.9 * radius, 0.9 * radius);
    if (p.norm() > 0.9 * radius) continue;
    for (int k = 0; k < d; ++k) p[k] = std::round(p[k] * 1e12) / 1e12;
    bool clash = false;
    for (const auto& q : pts)
      if ((q - p).norm() < 1e-6) clash = true;
    if (!clash) pts.push_back(std::move(p));
  }
  return symot::make_support(std::move(pts), radius);
}

}  // namespace tu
