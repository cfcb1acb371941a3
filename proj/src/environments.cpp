#include "rlsvi/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rlsvi {

FiniteHorizonMDP make_chain(int num_states) {
  if (num_states < 2) throw std::invalid_argument("chain needs N >= 2");
  const int N = num_states;
  const int green = N - 1;
  TransitionTable table(N, 2);
  for (int s = 0; s < green; ++s) {
    table.set(s, 0, {{std::max(s - 1, 0), 1.0, 0.0}});
    table.set(s, 1, {{s + 1, 1.0, 0.0}});
  }
  table.set(green, 0, {{green, 1.0, 1.0}});
  table.set(green, 1, {{green, 1.0, 1.0}});

  std::vector<double> initial(static_cast<std::size_t>(N), 0.0);
  initial[0] = 1.0;
  return FiniteHorizonMDP(N, 2, N, {std::move(table)}, std::vector<double>(N, 0.0),
                          std::move(initial));
}

double chain_regret_lower_bound(int num_states, long long total_steps, int horizon) {
  if (horizon < 1 || total_steps % horizon != 0)
    throw std::invalid_argument("T must be a multiple of H");
  const double episodes = static_cast<double>(total_steps / horizon);
  const double hit = std::ldexp(1.0, -(num_states - 1));
  // 1 - (1 - p)^L computed without cancellation for tiny p.
  const double reached = -std::expm1(episodes * std::log1p(-hit));
  return (std::ldexp(1.0, num_states - 1) - 1.0) * reached;
}

double RecommendationModel::like_probability(std::span<const std::int8_t> context,
                                             int product) const {
  double logit = beta[product];
  for (int n = 0; n < num_products(); ++n) logit += gamma(product, n) * context[n];
  return 1.0 / (1.0 + std::exp(-logit));
}

std::uint64_t RecommendationMDP::encode(std::span<const std::int8_t> context) {
  std::uint64_t code = 0;
  for (std::int8_t x : context) code = code * 3 + static_cast<std::uint64_t>(x + 1);
  return code;
}

RecommendationMDP::Layout RecommendationMDP::enumerate_states(int N, int J) {
  Layout layout;
  layout.layer_offsets.push_back(0);
  std::vector<std::int8_t> x(static_cast<std::size_t>(N));
  for (int k = 0; k <= J; ++k) {
    // Observed sets of size k in lexicographic order.
    std::vector<int> subset(static_cast<std::size_t>(k));
    std::iota(subset.begin(), subset.end(), 0);
    while (true) {
      for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << k); ++pattern) {
        std::fill(x.begin(), x.end(), std::int8_t{0});
        for (int i = 0; i < k; ++i) x[subset[i]] = (pattern >> (k - 1 - i)) & 1U ? 1 : -1;
        layout.index.emplace(encode(x), static_cast<int>(layout.contexts.size() / N));
        layout.contexts.insert(layout.contexts.end(), x.begin(), x.end());
      }
      int i = k - 1;
      while (i >= 0 && subset[i] == N - k + i) --i;
      if (i < 0) break;
      ++subset[i];
      for (int j = i + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
    }
    layout.layer_offsets.push_back(static_cast<int>(layout.contexts.size() / N));
  }
  return layout;
}

FiniteHorizonMDP RecommendationMDP::build_mdp() const {
  const int N = num_products();
  const int S = layout_.layer_offsets.back();
  TransitionTable table(S, N);
  std::vector<std::int8_t> next(static_cast<std::size_t>(N));
  for (int s = 0; s < S; ++s) {
    const auto x = context(s);
    const bool full = layer_of(s) >= num_recommendations_;
    for (int a = 0; a < N; ++a) {
      if (full || x[a] != 0) {
        table.set(s, a, {{s, 1.0, 0.0}});
        continue;
      }
      const double p = model_.like_probability(x, a);
      std::copy(x.begin(), x.end(), next.begin());
      next[a] = 1;
      const int liked = index_of(next);
      next[a] = -1;
      const int disliked = index_of(next);
      table.set(s, a, {{liked, p, 1.0}, {disliked, 1.0 - p, 0.0}});
    }
  }
  std::vector<double> initial(static_cast<std::size_t>(S), 0.0);
  initial[0] = 1.0;
  return FiniteHorizonMDP(S, N, num_recommendations_, {std::move(table)},
                          std::vector<double>(static_cast<std::size_t>(S), 0.0),
                          std::move(initial));
}

namespace {

RecommendationModel checked(int J, RecommendationModel model) {
  const int N = model.num_products();
  if (N < 1 || N > 40) throw std::invalid_argument("recommendation model needs 1 <= N <= 40");
  if (model.gamma.rows() != N || model.gamma.cols() != N)
    throw std::invalid_argument("gamma must be N x N");
  if (J < 1 || J > N) throw std::invalid_argument("need 1 <= J <= N");
  return model;
}

}  // namespace

RecommendationMDP::RecommendationMDP(int num_recommendations, RecommendationModel model)
    : num_recommendations_(num_recommendations),
      model_(checked(num_recommendations, std::move(model))),
      layout_(enumerate_states(model_.num_products(), num_recommendations)),
      mdp_(build_mdp()) {}

int RecommendationMDP::index_of(std::span<const std::int8_t> context) const {
  const auto it = layout_.index.find(encode(context));
  if (it == layout_.index.end()) throw std::out_of_range("context is not a materialized state");
  return it->second;
}

int RecommendationMDP::layer_of(int state) const {
  const auto& off = layout_.layer_offsets;
  return static_cast<int>(std::upper_bound(off.begin(), off.end(), state) - off.begin()) - 1;
}

std::vector<long long> RecommendationMDP::reachable_states_per_period() const {
  std::vector<long long> counts;
  for (int h = 0; h < num_recommendations_; ++h)
    counts.push_back(layout_.layer_offsets[h + 1] - layout_.layer_offsets[h]);
  return counts;
}

long long RecommendationMDP::num_decision_states() const {
  const auto counts = reachable_states_per_period();
  return std::accumulate(counts.begin(), counts.end(), 0LL);
}

RecommendationMDP make_recommendation(int num_products, int num_recommendations,
                                      const Eigen::MatrixXd& gamma, const Eigen::VectorXd& beta) {
  if (beta.size() != num_products) throw std::invalid_argument("beta must have N entries");
  if (num_recommendations > num_products) throw std::invalid_argument("J must not exceed N");
  return RecommendationMDP(num_recommendations, RecommendationModel{gamma, beta});
}

RecommendationModel sample_recommendation_instance(int num_products, double scale, Rng& rng) {
  RecommendationModel model{Eigen::MatrixXd::Zero(num_products, num_products),
                            Eigen::VectorXd::Zero(num_products)};
  for (int a = 0; a < num_products; ++a)
    for (int n = 0; n < num_products; ++n) model.gamma(a, n) = scale * standard_normal(rng);
  return model;
}

std::vector<double> sample_zero_sum_terminal_rewards(int num_states, Rng& rng) {
  std::vector<double> r(static_cast<std::size_t>(num_states));
  for (double& x : r) x = uniform01(rng) - 0.5;
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / num_states;
  double largest = 0.0;
  for (double& x : r) {
    x -= mean;
    largest = std::max(largest, std::abs(x));
  }
  if (largest > 0.5)
    for (double& x : r) x /= 2.0 * largest;
  return r;
}

FiniteHorizonMDP sample_dirichlet_mdp(int num_states, int num_actions, int horizon, Rng& rng) {
  if (num_states < 2) throw std::invalid_argument("Dirichlet MDP needs S >= 2");
  const std::vector<double> ones(static_cast<std::size_t>(num_states), 1.0);
  std::vector<TransitionTable> tables;
  tables.reserve(static_cast<std::size_t>(horizon));
  for (int h = 0; h < horizon; ++h) {
    TransitionTable table(num_states, num_actions);
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) {
        const auto p = sample_dirichlet(ones, rng);
        std::vector<Outcome> row;
        row.reserve(p.size());
        for (int next = 0; next < num_states; ++next) row.push_back({next, p[next], 0.0});
        table.set(s, a, std::move(row));
      }
    }
    tables.push_back(std::move(table));
  }
  auto terminal = sample_zero_sum_terminal_rewards(num_states, rng);
  return FiniteHorizonMDP(num_states, num_actions, horizon, std::move(tables), std::move(terminal),
                          std::vector<double>(static_cast<std::size_t>(num_states),
                                              1.0 / num_states));
}

}  // namespace rlsvi
