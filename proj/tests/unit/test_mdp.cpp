#include <doctest.h>

#include <functional>

#include "helpers.hpp"
#include "rlsvi/agents.hpp"
#include "rlsvi/environments.hpp"
#include "rlsvi/mdp.hpp"

using namespace rlsvi;

namespace {

// Expected return of a deterministic policy by summing over every trajectory.
double enumerate_return(const FiniteHorizonMDP& mdp, const Policy& policy, int h, int s) {
  if (h == mdp.horizon()) return mdp.terminal_reward(s);
  double total = 0.0;
  for (const Outcome& o : mdp.outcomes(h, s, policy.actions[h][s]))
    total += o.prob * (o.reward + enumerate_return(mdp, policy, h + 1, o.next));
  return total;
}

// Best value over all A^(S*H) deterministic policies, per initial state.
std::vector<double> brute_force_optimum(const FiniteHorizonMDP& mdp) {
  const int S = mdp.num_states(), A = mdp.num_actions(), H = mdp.horizon();
  const int cells = S * H;
  long long count = 1;
  for (int i = 0; i < cells; ++i) count *= A;
  std::vector<double> best(static_cast<std::size_t>(S), -1e300);
  Policy policy;
  policy.actions.assign(static_cast<std::size_t>(H), std::vector<int>(static_cast<std::size_t>(S)));
  for (long long code = 0; code < count; ++code) {
    long long c = code;
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s) {
        policy.actions[h][s] = static_cast<int>(c % A);
        c /= A;
      }
    for (int s = 0; s < S; ++s) best[s] = std::max(best[s], enumerate_return(mdp, policy, 0, s));
  }
  return best;
}

struct ScriptedAgent : Agent {
  std::vector<int> script;
  int act(int h, int) override { return script[h]; }
};

}  // namespace

TEST_CASE("solve_optimal on an all-zero MDP is zero") {
  TransitionTable t(3, 2);
  for (int s = 0; s < 3; ++s)
    for (int a = 0; a < 2; ++a) t.set(s, a, {{(s + a) % 3, 1.0, 0.0}});
  FiniteHorizonMDP mdp(3, 2, 4, {t}, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0});
  const auto values = solve_optimal(mdp);
  for (int h = 0; h < 4; ++h)
    for (int s = 0; s < 3; ++s) {
      CHECK(values.v(h, s) == 0.0);
      for (int a = 0; a < 2; ++a) CHECK(values.q(h, s, a) == 0.0);
    }
}

TEST_CASE("solve_optimal matches brute-force policy enumeration") {
  Rng rng(11);
  for (int S = 1; S <= 3; ++S)
    for (int A = 1; A <= 2; ++A)
      for (int H = 1; H <= 3; ++H) {
        const auto mdp = testing::random_mdp(S, A, H, rng);
        const auto values = solve_optimal(mdp);
        const auto best = brute_force_optimum(mdp);
        for (int s = 0; s < S; ++s) CHECK(values.v(0, s) == doctest::Approx(best[s]).epsilon(1e-12));
      }
}

TEST_CASE("evaluate_policy of the greedy policy reproduces V*") {
  Rng rng(3);
  const auto mdp = testing::random_mdp(4, 3, 5, rng);
  const auto values = solve_optimal(mdp);
  const auto v = evaluate_policy(mdp, greedy_policy(values));
  for (int h = 0; h <= 5; ++h)
    for (int s = 0; s < 4; ++s) CHECK(std::abs(v[h * 4 + s] - values.v(h, s)) <= 1e-12);
}

TEST_CASE("evaluate_policy agrees with trajectory enumeration") {
  Rng rng(5);
  const auto mdp = testing::random_mdp(2, 2, 4, rng);
  for (int fixed = 0; fixed < 2; ++fixed) {
    Policy policy;
    policy.actions.assign(4, std::vector<int>(2, fixed));
    const auto v = evaluate_policy(mdp, policy);
    for (int s = 0; s < 2; ++s) CHECK(v[s] == doctest::Approx(enumerate_return(mdp, policy, 0, s)).epsilon(1e-12));
  }
}

TEST_CASE("chain: always stepping left earns nothing") {
  const auto chain = make_chain(6);
  Policy left;
  left.actions.assign(6, std::vector<int>(6, 0));
  CHECK(evaluate_policy(chain, left)[0] == 0.0);
}

TEST_CASE("greedy_policy breaks ties toward the lowest index") {
  ValueFunctions values(1, 3, 1);
  values.q(0, 0, 0) = 1.0;
  values.q(0, 0, 1) = 2.0;
  values.q(0, 0, 2) = 2.0;
  CHECK(greedy_policy(values).actions[0][0] == 1);
}

TEST_CASE("simulate_episode: shapes, determinism and action validation") {
  Rng rng(9);
  const auto mdp = testing::random_mdp(3, 2, 1, rng);
  UniformRandomAgent agent(2, 4);
  Rng r1(21);
  const auto log = simulate_episode(mdp, agent, r1);
  CHECK(log.actions.size() == 1);
  CHECK(log.rewards.size() == 1);
  CHECK(log.states.size() == 2);

  const auto big = testing::random_mdp(4, 3, 6, rng);
  UniformRandomAgent a1(3, 77), a2(3, 77);
  Rng s1(5), s2(5);
  for (int i = 0; i < 20; ++i) {
    const auto x = simulate_episode(big, a1, s1);
    const auto y = simulate_episode(big, a2, s2);
    CHECK(x.states == y.states);
    CHECK(x.actions == y.actions);
    CHECK(x.rewards == y.rewards);
    CHECK(x.terminal_reward == y.terminal_reward);
  }

  ScriptedAgent bad;
  bad.script = {5};
  CHECK_THROWS_AS(simulate_episode(mdp, bad, r1), std::logic_error);
}

TEST_CASE("regret_of_episode on the chain") {
  const auto chain = make_chain(5);
  const auto values = solve_optimal(chain);
  Rng rng(1);
  PolicyAgent optimal(greedy_policy(values));
  CHECK(regret_of_episode(values.v_period(0), simulate_episode(chain, optimal, rng)) == 0.0);
  ScriptedAgent left;
  left.script.assign(5, 0);
  CHECK(regret_of_episode(values.v_period(0), simulate_episode(chain, left, rng)) == 1.0);
}

TEST_CASE("optimal play has zero mean regret on a stochastic MDP") {
  Rng rng(17);
  const auto mdp = testing::random_mdp(3, 2, 3, rng);
  const auto values = solve_optimal(mdp);
  PolicyAgent optimal(greedy_policy(values));
  std::vector<double> regrets;
  for (int i = 0; i < 100000; ++i) regrets.push_back(regret_of_episode(values.v_period(0), simulate_episode(mdp, optimal, rng)));
  const auto m = testing::moments(regrets);
  CHECK(std::abs(m.mean) <= 3.0 * m.se);
}

TEST_CASE("MDP constructor rejects malformed laws") {
  TransitionTable bad(2, 1);
  bad.set(0, 0, {{0, 0.5, 0.0}});
  bad.set(1, 0, {{1, 1.0, 0.0}});
  CHECK_THROWS_AS(FiniteHorizonMDP(2, 1, 1, {bad}, {0.0, 0.0}, {1.0, 0.0}), std::invalid_argument);
  TransitionTable good(2, 1);
  good.set(0, 0, {{0, 1.0, 0.0}});
  good.set(1, 0, {{1, 1.0, 0.0}});
  CHECK_THROWS_AS(FiniteHorizonMDP(2, 1, 1, {good}, {0.0, 0.0}, {0.7, 0.7}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteHorizonMDP(2, 1, 2, {good, good, good}, {0.0, 0.0}, {1.0, 0.0}), std::invalid_argument);
}
