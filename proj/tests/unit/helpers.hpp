#pragma once

#include <cmath>
#include <vector>

#include "rlsvi/mdp.hpp"
#include "rlsvi/random.hpp"

namespace testing {

// Random MDP with dense Dirichlet(1) rows, per-period tables and random
// transition and terminal rewards in [-1, 1].
inline rlsvi::FiniteHorizonMDP random_mdp(int S, int A, int H, rlsvi::Rng& rng) {
  std::vector<rlsvi::TransitionTable> tables;
  const std::vector<double> ones(static_cast<std::size_t>(S), 1.0);
  for (int h = 0; h < H; ++h) {
    rlsvi::TransitionTable t(S, A);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const auto p = rlsvi::sample_dirichlet(ones, rng);
        std::vector<rlsvi::Outcome> row;
        double total = 0.0;
        for (int n = 0; n < S; ++n) {
          row.push_back({n, p[n], 2.0 * rlsvi::uniform01(rng) - 1.0});
          total += p[n];
        }
        row.back().prob += 1.0 - total;
        t.set(s, a, row);
      }
    tables.push_back(std::move(t));
  }
  std::vector<double> terminal, pi(static_cast<std::size_t>(S), 1.0 / S);
  for (int s = 0; s < S; ++s) terminal.push_back(2.0 * rlsvi::uniform01(rng) - 1.0);
  double total = 0.0;
  for (double p : pi) total += p;
  pi.back() += 1.0 - total;
  return {S, A, H, std::move(tables), std::move(terminal), std::move(pi)};
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

inline Moments moments(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= static_cast<double>(xs.size() - 1);
  return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

// Standard error of a Bernoulli frequency estimate.
inline double binomial_se(double p, long long n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

}  // namespace testing
