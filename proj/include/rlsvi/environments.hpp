#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "rlsvi/mdp.hpp"
#include "rlsvi/random.hpp"

namespace rlsvi {

/// Deterministic chain with N states and H = N periods. Action 0 steps left
/// (floored at 0), action 1 steps right; the last state is absorbing and pays
/// 1 per transition out of it. Every episode starts in state 0.
FiniteHorizonMDP make_chain(int num_states);

/// Closed-form regret lower bound for dithering exploration on the chain:
/// (2^{S-1} - 1) * (1 - (1 - 2^{-(S-1)})^{T/H}).
double chain_regret_lower_bound(int num_states, long long total_steps, int horizon);

/// Logistic customer-preference model over N products.
struct RecommendationModel {
  Eigen::MatrixXd gamma;  // N x N interaction weights
  Eigen::VectorXd beta;   // N intercepts

  int num_products() const { return static_cast<int>(beta.size()); }
  /// P(like a | x) = sigmoid(beta_a + sum_n gamma_{a n} x_n).
  double like_probability(std::span<const std::int8_t> context, int product) const;
};

/// The recommendation MDP together with its state encoding.
///
/// A state is a ternary vector x in {-1, 0, +1}^N; states with k observed
/// products form layer k. Indices are assigned layer by layer, and within a
/// layer by (observed set in lexicographic order, then like pattern). Layers
/// 0..J are materialized so s_H has an index; only layer h is reachable at
/// period h. Recommending an already observed product is a reward-0 self-loop.
class RecommendationMDP {
 public:
  RecommendationMDP(int num_recommendations, RecommendationModel model);

  const FiniteHorizonMDP& mdp() const { return mdp_; }
  const RecommendationModel& model() const { return model_; }
  int num_products() const { return model_.num_products(); }
  int num_recommendations() const { return num_recommendations_; }

  std::span<const std::int8_t> context(int state) const {
    return {layout_.contexts.data() + static_cast<std::size_t>(state) * num_products(),
            static_cast<std::size_t>(num_products())};
  }
  int index_of(std::span<const std::int8_t> context) const;
  int layer_of(int state) const;

  /// Number of states reachable at each period h = 0..H-1.
  std::vector<long long> reachable_states_per_period() const;
  long long num_decision_states() const;

 private:
  struct Layout {
    std::vector<std::int8_t> contexts;
    std::vector<int> layer_offsets;  // J + 2 entries
    std::unordered_map<std::uint64_t, int> index;
  };

  static Layout enumerate_states(int num_products, int num_recommendations);
  static std::uint64_t encode(std::span<const std::int8_t> context);
  FiniteHorizonMDP build_mdp() const;

  int num_recommendations_;
  RecommendationModel model_;
  Layout layout_;
  FiniteHorizonMDP mdp_;
};

RecommendationMDP make_recommendation(int num_products, int num_recommendations,
                                      const Eigen::MatrixXd& gamma, const Eigen::VectorXd& beta);

/// beta = 0 and gamma_{an} ~ N(0, c^2) i.i.d.
RecommendationModel sample_recommendation_instance(int num_products, double scale, Rng& rng);

/// Random MDP with uniform-on-simplex transition rows, zero transition rewards
/// and zero-sum terminal rewards in [-0.5, 0.5]. The initial state is uniform.
FiniteHorizonMDP sample_dirichlet_mdp(int num_states, int num_actions, int horizon, Rng& rng);

/// Terminal-reward recipe used by `sample_dirichlet_mdp`: uniform draws,
/// recentered to sum to zero, rescaled into [-0.5, 0.5] when needed.
std::vector<double> sample_zero_sum_terminal_rewards(int num_states, Rng& rng);

}  // namespace rlsvi
