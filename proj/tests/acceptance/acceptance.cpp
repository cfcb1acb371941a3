// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>

#include "rlsvi/harness.hpp"

using namespace rlsvi;

namespace {

constexpr std::uint64_t kSeed = 1;

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

// 1. Chain separation
Verdict chain_separation() {
  auto c = default_config(Experiment::kChainCoherent);
  c.num_states = 8;
  c.num_features = 8;
  c.agent.lambda = 1.0;
  c.agent.sigma = std::sqrt(1e-4);
  c.runs = 30;
  c.episodes = 400;
  c.algorithms = {"rlsvi", "lsvi-boltzmann", "lsvi-egreedy"};
  c.etas = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  c.epsilons = {0.1, 0.5, 1.0};
  c.seed = kSeed;
  c.workers = workers();
  const auto result = run_study(c);

  std::map<std::string, std::pair<double, int>> window;
  std::vector<std::string> order;
  for (const auto& r : result.records) {
    if (r.episode < 300) continue;
    if (!window.count(r.algorithm)) order.push_back(r.algorithm);
    window[r.algorithm].first += r.reward;
    window[r.algorithm].second += 1;
  }
  bool pass = true;
  std::ostringstream detail;
  for (const auto& name : order) {
    const double mean = window[name].first / window[name].second;
    const bool ok = name == "rlsvi" ? mean >= 0.8 : mean <= 0.05;
    pass = pass && ok;
    detail << name << "=" << fmt("%.4f", mean) << (ok ? "" : "(!)") << " ";
  }
  return {pass, detail.str()};
}

// 2. Uniform-action success probability on the N = 6 chain
Verdict chain_lower_bound() {
  const auto chain = make_chain(6);
  UniformRandomAgent agent(2, seed_schedule(kSeed, 0, SeedStream::kAgent));
  Rng rng(seed_schedule(kSeed, 0, SeedStream::kTrajectory));
  const int n = 100000;
  int successes = 0;
  long long gap_sum = 0;
  int gaps = 0, since = 0;
  for (int l = 0; l < n; ++l) {
    ++since;
    if (simulate_episode(chain, agent, rng).total_reward() > 0.5) {
      ++successes;
      gap_sum += since;
      ++gaps;
      since = 0;
    }
  }
  const double p = std::pow(2.0, -5.0);
  const double p_hat = static_cast<double>(successes) / n;
  const double se = std::sqrt(p * (1.0 - p) / n);
  const double first = static_cast<double>(gap_sum) / gaps;
  const bool pass = std::abs(p_hat - p) <= 3.0 * se && std::abs(first - 32.0) <= 3.2;
  return {pass, "p=" + fmt("%.5f", p_hat) + " (|d|/se=" + fmt("%.2f", std::abs(p_hat - p) / se) +
                    ") mean first success=" + fmt("%.2f", first)};
}

// 3. Tabular posterior against the count-based closed form
Verdict tabular_posterior() {
  Rng rng(seed_schedule(kSeed, 3, SeedStream::kEnvironment));
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int S = 2 + uniform_index(5, rng), K = S * 2;
    const double lambda = S;
    std::vector<int> counts(K);
    std::vector<double> sums(K, 0.0);
    std::vector<std::pair<int, double>> rows;
    for (int k = 0; k < K; ++k) {
      counts[k] = uniform_index(8, rng);
      for (int i = 0; i < counts[k]; ++i) {
        const double y = 2.0 * uniform01(rng) - 1.0;
        rows.emplace_back(k, y);
        sums[k] += y;
      }
    }
    RegressionData data{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), K),
                        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.size()))};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      data.design(static_cast<Eigen::Index>(i), rows[i].first) = 1.0;
      data.targets[static_cast<Eigen::Index>(i)] = rows[i].second;
    }
    const auto post = ridge_posterior(data, 1.0, lambda);
    for (int k = 0; k < K; ++k) {
      worst = std::max(worst, std::abs(post.mean[k] - sums[k] / (counts[k] + lambda)));
      worst = std::max(worst, std::abs(post.covariance(k, k) - 1.0 / (counts[k] + lambda)));
      for (int j = 0; j < K; ++j)
        if (j != k) worst = std::max(worst, std::abs(post.covariance(k, j)));
    }
  }
  return {worst <= 1e-10, "max error " + fmt("%.2e", worst)};
}

// 4. Regret sublinearity on Dirichlet MDPs
Verdict regret_sublinearity() {
  auto c = default_config(Experiment::kTabularRegret);
  c.num_states = 5;
  c.num_actions = 2;
  c.horizon = 4;
  c.episodes = 2000;
  c.instances = 20;
  c.runs = 1;
  c.agent.lambda = 5.0;
  c.agent.sigma = 1.0;
  c.algorithms = {"rlsvi"};
  c.seed = kSeed;
  c.workers = workers();
  const auto result = run_study(c);
  const double exponent = result.details["fits"][0]["regret_exponent"].get<double>();
  const auto regret = mean_by_episode(result.records, &RunRecord::regret);
  const std::size_t tenth = regret.size() / 10;
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < tenth; ++i) {
    first += regret[i];
    last += regret[regret.size() - 1 - i];
  }
  first /= tenth;
  last /= tenth;
  const bool pass = exponent <= 0.8 && last <= 0.5 * first;
  return {pass, "exponent " + fmt("%.3f", exponent) + ", last/first 10% regret " + fmt("%.4f", last) + "/" +
                    fmt("%.4f", first)};
}

// 5-8. Optimism suite, filtered by check family
const OptimismReport& optimism_report() {
  static const OptimismReport report = run_optimism_suite(kSeed, 100000, workers());
  return report;
}

Verdict optimism_family(const std::vector<std::string>& families, std::size_t expected_rows) {
  std::size_t rows = 0, failed = 0;
  std::string first_failure;
  for (const auto& r : optimism_report().rows) {
    if (std::find(families.begin(), families.end(), r.check) == families.end()) continue;
    ++rows;
    if (!r.pass) {
      ++failed;
      if (first_failure.empty()) first_failure = " first failure: " + r.label;
    }
  }
  const bool pass = failed == 0 && rows == expected_rows;
  return {pass, std::to_string(rows) + " checks, " + std::to_string(failed) + " failed" + first_failure};
}

Verdict tail_lemmas() {
  auto out = optimism_family({"gaussian-tail", "truncated-mean"}, 4);
  for (const auto& r : optimism_report().rows)
    if (r.check == "gaussian-tail" && r.label.rfind("bisection", 0) == 0) out.detail += ", crossover " + fmt("%.5f", r.statistic);
  return out;
}

// 9. Recommendation study
Verdict recommendation() {
  auto c = default_config(Experiment::kRecommendation);
  c.num_states = 6;
  c.num_recommendations = 3;
  c.scale = 2.0;
  c.episodes = 300;
  c.instances = 10;
  c.runs = 3;
  c.agent.lambda = 0.2;
  c.agent.sigma = std::sqrt(1e-3);
  c.algorithms = {"rlsvi", "lsvi-boltzmann", "bernoulli-ts", "lcb"};
  c.etas = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  c.seed = kSeed;
  c.workers = workers();
  const auto result = run_study(c);

  const int last = c.episodes - 1;
  std::map<std::string, double> final_cum;
  std::map<std::string, std::map<int, double>> per_instance;
  std::map<std::string, int> count;
  for (const auto& r : result.records) {
    if (r.episode != last) continue;
    final_cum[r.algorithm] += r.cum_regret;
    count[r.algorithm] += 1;
    per_instance[r.algorithm][r.run_id / c.runs] += r.cum_regret / c.runs;
  }
  for (auto& [name, total] : final_cum) total /= count[name];
  double best_boltzmann = INFINITY;
  std::string best_name;
  for (const auto& [name, v] : final_cum)
    if (name.rfind("lsvi-boltzmann", 0) == 0 && v < best_boltzmann) {
      best_boltzmann = v;
      best_name = name;
    }
  const double rlsvi = final_cum.at("rlsvi"), ts = final_cum.at("bernoulli-ts");
  int below = 0;
  for (const auto& [inst, v] : per_instance.at("rlsvi"))
    if (v < per_instance.at("lcb").at(inst)) ++below;
  const bool pass = rlsvi < best_boltzmann && rlsvi < ts && 2 * below > c.instances;
  std::ostringstream d;
  d << "cum regret rlsvi " << fmt("%.1f", rlsvi) << ", " << best_name << " " << fmt("%.1f", best_boltzmann)
    << ", ts " << fmt("%.1f", ts) << ", lcb " << fmt("%.1f", final_cum.at("lcb")) << "; rlsvi below lcb on "
    << below << "/" << c.instances << " instances";
  return {pass, d.str()};
}

// 10. Oracle equivalences
double enumerate_value(const FiniteHorizonMDP& mdp, const Policy& pi, int h, int s) {
  if (h == mdp.horizon()) return mdp.terminal_reward(s);
  double v = 0.0;
  for (const auto& o : mdp.outcomes(h, s, pi.actions[h][s])) v += o.prob * (o.reward + enumerate_value(mdp, pi, h + 1, o.next));
  return v;
}

FiniteHorizonMDP random_mdp(int S, int A, int H, Rng& rng) {
  std::vector<TransitionTable> tables;
  const std::vector<double> ones(static_cast<std::size_t>(S), 1.0);
  for (int h = 0; h < H; ++h) {
    TransitionTable t(S, A);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        auto p = sample_dirichlet(ones, rng);
        double total = 0.0;
        std::vector<rlsvi::Outcome> row;
        for (int n = 0; n < S; ++n) {
          row.push_back({n, p[n], 2.0 * uniform01(rng) - 1.0});
          total += p[n];
        }
        row.back().prob += 1.0 - total;
        t.set(s, a, row);
      }
    tables.push_back(std::move(t));
  }
  std::vector<double> terminal;
  for (int s = 0; s < S; ++s) terminal.push_back(uniform01(rng));
  std::vector<double> pi(static_cast<std::size_t>(S), 0.0);
  pi[0] = 1.0;
  return {S, A, H, std::move(tables), std::move(terminal), std::move(pi)};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict oracle_equivalences() {
  Rng rng(seed_schedule(kSeed, 10, SeedStream::kEnvironment));
  double solver_err = 0.0;
  for (int S = 1; S <= 3; ++S)
    for (int A = 1; A <= 2; ++A)
      for (int H = 1; H <= 3; ++H) {
        const auto mdp = random_mdp(S, A, H, rng);
        const auto values = solve_optimal(mdp);
        const int cells = S * H;
        long long total = 1;
        for (int i = 0; i < cells; ++i) total *= A;
        std::vector<double> best(static_cast<std::size_t>(S), -INFINITY);
        for (long long code = 0; code < total; ++code) {
          Policy pi;
          long long c = code;
          pi.actions.assign(static_cast<std::size_t>(H), std::vector<int>(static_cast<std::size_t>(S)));
          for (int h = 0; h < H; ++h)
            for (int s = 0; s < S; ++s, c /= A) pi.actions[h][s] = static_cast<int>(c % A);
          for (int s = 0; s < S; ++s) best[s] = std::max(best[s], enumerate_value(mdp, pi, 0, s));
        }
        for (int s = 0; s < S; ++s) solver_err = std::max(solver_err, std::abs(best[s] - values.v(0, s)));
      }

  const auto mdp = random_mdp(3, 2, 3, rng);
  Rng frng(seed_schedule(kSeed, 10, SeedStream::kBasis));
  auto phi = std::make_shared<const FeatureMap>(coherent_basis(solve_optimal(mdp), 4, frng));
  AgentConfig cfg;
  cfg.sigma = 0.8;
  cfg.lambda = 1.5;
  IncrementalRlsviAgent agent(phi, cfg, seed_schedule(kSeed, 10, SeedStream::kAgent));
  std::vector<EpisodeLog> logs;
  for (int l = 0; l < 50; ++l) logs.push_back(simulate_episode(mdp, agent, rng));
  double gram_err = 0.0;
  for (int h = 0; h < 3; ++h) {
    Eigen::MatrixXd gram = cfg.lambda * Eigen::MatrixXd::Identity(4, 4);
    for (const auto& log : logs) {
      const Eigen::VectorXd row = phi->row(h, log.states[h], log.actions[h]);
      gram += row * row.transpose() / (cfg.sigma * cfg.sigma);
    }
    gram_err = std::max(gram_err, (agent.tracker(h).precision() - gram).cwiseAbs().maxCoeff());
  }

  auto c = default_config(Experiment::kChainCoherent);
  c.num_states = 6;
  c.num_features = 5;
  c.runs = 4;
  c.episodes = 50;
  c.algorithms = {"rlsvi", "lsvi-boltzmann"};
  c.etas = {0.1};
  c.seed = kSeed;
  const auto a = (std::filesystem::temp_directory_path() / "rlsvi_accept_a.csv").string();
  const auto b = (std::filesystem::temp_directory_path() / "rlsvi_accept_b.csv").string();
  write_csv(run_study(c).records, a);
  c.workers = workers();
  write_csv(run_study(c).records, b);
  const std::string first = slurp(a), second = slurp(b);
  const bool identical = !first.empty() && first == second;
  std::filesystem::remove(a);
  std::filesystem::remove(b);

  const bool pass = solver_err <= 1e-12 && gram_err <= 1e-10 && identical;
  return {pass, "solver " + fmt("%.1e", solver_err) + ", gram " + fmt("%.1e", gram_err) +
                    ", csv " + (identical ? "identical" : "DIFFERENT")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {"chain-separation", 300, chain_separation},
      {"chain-lower-bound", 600, chain_lower_bound},
      {"tabular-posterior", 600, tabular_posterior},
      {"regret-sublinearity", 600, regret_sublinearity},
      {"optimism-gaussian-dirichlet", 900, [] { return optimism_family({"gaussian-dirichlet"}, 60); }},
      {"beta-projection", 900, [] { return optimism_family({"beta-projection", "beta-projection-mc"}, 12); }},
      {"single-crossing", 900, [] { return optimism_family({"single-crossing"}, 49); }},
      {"tail-lemmas", 900, tail_lemmas},
      {"recommendation", 900, recommendation},
      {"oracle-equivalences", 600, oracle_equivalences},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= criteria[i].budget_seconds;
    const bool pass = out.pass && in_time;
    failures += !pass;
    std::printf("%s %2zu %-28s %s [%.1fs%s]\n", pass ? "PASS" : "FAIL", i + 1, criteria[i].name, out.detail.c_str(),
                seconds, in_time ? "" : " over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
