#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rlsvi/random.hpp"

namespace rlsvi {

/// One possible successor of a state-action pair: next state, its probability
/// and the expected transition reward collected on the way there.
struct Outcome {
  int next = 0;
  double prob = 0.0;
  double reward = 0.0;
};

/// Transition law P(.|s,a) plus expected rewards for one period, stored as a
/// sparse successor list per (s, a).
class TransitionTable {
 public:
  TransitionTable(int num_states, int num_actions);

  void set(int state, int action, std::vector<Outcome> outcomes);
  std::span<const Outcome> outcomes(int state, int action) const {
    return rows_[static_cast<std::size_t>(state) * num_actions_ + action];
  }

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

 private:
  int num_states_;
  int num_actions_;
  std::vector<std::vector<Outcome>> rows_;
};

/// Draws a transition reward given (h, s, a, s') and its mean.
using TransitionRewardSampler =
    std::function<double(int period, int state, int action, int next, double mean, Rng&)>;
/// Draws a terminal reward given s_H and its mean.
using TerminalRewardSampler = std::function<double(int state, double mean, Rng&)>;

/// Finite-horizon MDP (S, A, H, P, R, pi) with exact access to its laws.
///
/// `tables` holds either one table per period or a single table shared by all
/// periods (time-homogeneous dynamics). Rewards are stored as expectations; the
/// optional samplers default to returning the mean.
class FiniteHorizonMDP {
 public:
  FiniteHorizonMDP(int num_states, int num_actions, int horizon,
                   std::vector<TransitionTable> tables, std::vector<double> terminal_rewards,
                   std::vector<double> initial_dist);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int horizon() const { return horizon_; }

  std::span<const Outcome> outcomes(int period, int state, int action) const {
    return table(period).outcomes(state, action);
  }
  const TransitionTable& table(int period) const {
    return tables_.size() == 1 ? tables_.front() : tables_[static_cast<std::size_t>(period)];
  }
  double terminal_reward(int state) const { return terminal_rewards_[static_cast<std::size_t>(state)]; }
  std::span<const double> terminal_rewards() const { return terminal_rewards_; }
  std::span<const double> initial_dist() const { return initial_dist_; }

  void set_transition_reward_sampler(TransitionRewardSampler sampler) {
    transition_sampler_ = std::move(sampler);
  }
  void set_terminal_reward_sampler(TerminalRewardSampler sampler) {
    terminal_sampler_ = std::move(sampler);
  }

  double sample_transition_reward(int period, int state, int action, int next, double mean,
                                  Rng& rng) const;
  double sample_terminal_reward(int state, Rng& rng) const;

 private:
  int num_states_;
  int num_actions_;
  int horizon_;
  std::vector<TransitionTable> tables_;
  std::vector<double> terminal_rewards_;
  std::vector<double> initial_dist_;
  TransitionRewardSampler transition_sampler_;
  TerminalRewardSampler terminal_sampler_;
};

/// Deterministic Markov policy: actions[h][s].
struct Policy {
  std::vector<std::vector<int>> actions;
};

/// Exact Q*_h(s,a) for h < H and V*_h(s) for h <= H.
class ValueFunctions {
 public:
  ValueFunctions(int num_states, int num_actions, int horizon);

  double q(int period, int state, int action) const { return q_[q_index(period, state, action)]; }
  double& q(int period, int state, int action) { return q_[q_index(period, state, action)]; }
  double v(int period, int state) const { return v_[v_index(period, state)]; }
  double& v(int period, int state) { return v_[v_index(period, state)]; }

  /// Q*_h flattened over (s, a) with row index s*A + a.
  std::span<const double> q_period(int period) const {
    return {q_.data() + static_cast<std::size_t>(period) * num_states_ * num_actions_,
            static_cast<std::size_t>(num_states_) * num_actions_};
  }
  std::span<const double> v_period(int period) const {
    return {v_.data() + static_cast<std::size_t>(period) * num_states_,
            static_cast<std::size_t>(num_states_)};
  }

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int horizon() const { return horizon_; }

 private:
  std::size_t q_index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * num_states_ + s) * num_actions_ + a;
  }
  std::size_t v_index(int h, int s) const { return static_cast<std::size_t>(h) * num_states_ + s; }

  int num_states_;
  int num_actions_;
  int horizon_;
  std::vector<double> q_;
  std::vector<double> v_;
};

/// One episode: H+1 states, H actions, H transition rewards and the terminal reward.
struct EpisodeLog {
  std::vector<int> states;
  std::vector<int> actions;
  std::vector<double> rewards;
  double terminal_reward = 0.0;

  double total_reward() const;
};

/// Episodic decision maker. `begin_episode` runs once before s_0 is revealed,
/// `act` once per period, `observe` once with the completed episode.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual void begin_episode() {}
  virtual int act(int period, int state) = 0;
  virtual void observe(const EpisodeLog& /*episode*/) {}
};

ValueFunctions solve_optimal(const FiniteHorizonMDP& mdp);

/// Greedy policy w.r.t. Q*, ties broken toward the lowest action index.
Policy greedy_policy(const ValueFunctions& values);

/// V^mu_h(s) for h = 0..H, stored with row index h*S + s.
std::vector<double> evaluate_policy(const FiniteHorizonMDP& mdp, const Policy& policy);

EpisodeLog simulate_episode(const FiniteHorizonMDP& mdp, Agent& agent, Rng& rng);

double regret_of_episode(std::span<const double> v_star_0, const EpisodeLog& log);

}  // namespace rlsvi
