#include "rlsvi/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rlsvi {
namespace {

constexpr double kProbTolerance = 1e-12;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

TransitionTable::TransitionTable(int num_states, int num_actions)
    : num_states_(num_states),
      num_actions_(num_actions),
      rows_(static_cast<std::size_t>(num_states) * num_actions) {
  require(num_states > 0 && num_actions > 0, "transition table needs S, A >= 1");
}

void TransitionTable::set(int state, int action, std::vector<Outcome> outcomes) {
  require(state >= 0 && state < num_states_, "state out of range");
  require(action >= 0 && action < num_actions_, "action out of range");
  rows_[static_cast<std::size_t>(state) * num_actions_ + action] = std::move(outcomes);
}

FiniteHorizonMDP::FiniteHorizonMDP(int num_states, int num_actions, int horizon,
                                   std::vector<TransitionTable> tables,
                                   std::vector<double> terminal_rewards,
                                   std::vector<double> initial_dist)
    : num_states_(num_states),
      num_actions_(num_actions),
      horizon_(horizon),
      tables_(std::move(tables)),
      terminal_rewards_(std::move(terminal_rewards)),
      initial_dist_(std::move(initial_dist)) {
  require(num_states >= 1 && num_actions >= 1, "MDP needs S, A >= 1");
  require(horizon >= 1, "horizon must be >= 1");
  require(tables_.size() == 1 || tables_.size() == static_cast<std::size_t>(horizon),
          "need one transition table or one per period");
  require(terminal_rewards_.size() == static_cast<std::size_t>(num_states),
          "terminal reward vector must have S entries");
  require(initial_dist_.size() == static_cast<std::size_t>(num_states),
          "initial distribution must have S entries");

  double pi_sum = 0.0;
  for (double p : initial_dist_) {
    require(p >= 0.0, "initial distribution has a negative entry");
    pi_sum += p;
  }
  require(std::abs(pi_sum - 1.0) <= kProbTolerance, "initial distribution does not sum to 1");

  for (const auto& t : tables_) {
    require(t.num_states() == num_states && t.num_actions() == num_actions,
            "transition table shape mismatch");
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) {
        double sum = 0.0;
        for (const Outcome& o : t.outcomes(s, a)) {
          require(o.next >= 0 && o.next < num_states, "successor state out of range");
          require(o.prob >= 0.0, "negative transition probability");
          require(std::isfinite(o.reward), "non-finite reward");
          sum += o.prob;
        }
        require(std::abs(sum - 1.0) <= kProbTolerance,
                "transition row (" + std::to_string(s) + "," + std::to_string(a) +
                    ") does not sum to 1");
      }
    }
  }
}

double FiniteHorizonMDP::sample_transition_reward(int period, int state, int action, int next,
                                                  double mean, Rng& rng) const {
  return transition_sampler_ ? transition_sampler_(period, state, action, next, mean, rng) : mean;
}

double FiniteHorizonMDP::sample_terminal_reward(int state, Rng& rng) const {
  const double mean = terminal_reward(state);
  return terminal_sampler_ ? terminal_sampler_(state, mean, rng) : mean;
}

ValueFunctions::ValueFunctions(int num_states, int num_actions, int horizon)
    : num_states_(num_states),
      num_actions_(num_actions),
      horizon_(horizon),
      q_(static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0),
      v_(static_cast<std::size_t>(horizon + 1) * num_states, 0.0) {}

double EpisodeLog::total_reward() const {
  double total = terminal_reward;
  for (double r : rewards) total += r;
  return total;
}

ValueFunctions solve_optimal(const FiniteHorizonMDP& mdp) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int H = mdp.horizon();
  ValueFunctions values(S, A, H);
  for (int s = 0; s < S; ++s) values.v(H, s) = mdp.terminal_reward(s);

  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      double best = 0.0;
      for (int a = 0; a < A; ++a) {
        double q = 0.0;
        for (const Outcome& o : mdp.outcomes(h, s, a)) q += o.prob * (o.reward + values.v(h + 1, o.next));
        values.q(h, s, a) = q;
        if (a == 0 || q > best) best = q;
      }
      values.v(h, s) = best;
    }
  }
  return values;
}

Policy greedy_policy(const ValueFunctions& values) {
  Policy policy;
  policy.actions.assign(static_cast<std::size_t>(values.horizon()),
                        std::vector<int>(static_cast<std::size_t>(values.num_states()), 0));
  for (int h = 0; h < values.horizon(); ++h) {
    for (int s = 0; s < values.num_states(); ++s) {
      int best = 0;
      for (int a = 1; a < values.num_actions(); ++a)
        if (values.q(h, s, a) > values.q(h, s, best)) best = a;
      policy.actions[h][s] = best;
    }
  }
  return policy;
}

std::vector<double> evaluate_policy(const FiniteHorizonMDP& mdp, const Policy& policy) {
  const int S = mdp.num_states();
  const int H = mdp.horizon();
  require(policy.actions.size() == static_cast<std::size_t>(H), "policy must cover every period");
  std::vector<double> value(static_cast<std::size_t>(H + 1) * S, 0.0);
  auto at = [S](int h, int s) { return static_cast<std::size_t>(h) * S + s; };
  for (int s = 0; s < S; ++s) value[at(H, s)] = mdp.terminal_reward(s);

  for (int h = H - 1; h >= 0; --h) {
    require(policy.actions[h].size() == static_cast<std::size_t>(S), "policy must cover every state");
    for (int s = 0; s < S; ++s) {
      const int a = policy.actions[h][s];
      require(a >= 0 && a < mdp.num_actions(), "policy action out of range");
      double v = 0.0;
      for (const Outcome& o : mdp.outcomes(h, s, a)) v += o.prob * (o.reward + value[at(h + 1, o.next)]);
      value[at(h, s)] = v;
    }
  }
  return value;
}

namespace {

int draw_successor(std::span<const Outcome> outcomes, Rng& rng) {
  if (outcomes.size() == 1) return 0;
  double u = uniform01(rng);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    u -= outcomes[i].prob;
    if (u < 0.0) return static_cast<int>(i);
  }
  for (std::size_t i = outcomes.size(); i-- > 0;)
    if (outcomes[i].prob > 0.0) return static_cast<int>(i);
  return 0;
}

}  // namespace

EpisodeLog simulate_episode(const FiniteHorizonMDP& mdp, Agent& agent, Rng& rng) {
  const int H = mdp.horizon();
  EpisodeLog log;
  log.states.reserve(static_cast<std::size_t>(H) + 1);
  log.actions.reserve(static_cast<std::size_t>(H));
  log.rewards.reserve(static_cast<std::size_t>(H));

  agent.begin_episode();
  int state = sample_categorical(mdp.initial_dist(), rng);
  log.states.push_back(state);
  for (int h = 0; h < H; ++h) {
    const int action = agent.act(h, state);
    if (action < 0 || action >= mdp.num_actions())
      throw std::logic_error("agent returned out-of-range action " + std::to_string(action));
    const auto outcomes = mdp.outcomes(h, state, action);
    const Outcome& o = outcomes[static_cast<std::size_t>(draw_successor(outcomes, rng))];
    log.actions.push_back(action);
    log.rewards.push_back(mdp.sample_transition_reward(h, state, action, o.next, o.reward, rng));
    state = o.next;
    log.states.push_back(state);
  }
  log.terminal_reward = mdp.sample_terminal_reward(state, rng);
  agent.observe(log);
  return log;
}

double regret_of_episode(std::span<const double> v_star_0, const EpisodeLog& log) {
  return v_star_0[static_cast<std::size_t>(log.states.front())] - log.total_reward();
}

}  // namespace rlsvi
