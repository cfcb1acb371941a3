// rlsvi-lab: runs the regret studies and the optimism verification suite.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "rlsvi/harness.hpp"

namespace {

struct Flags {
  int N = 0, H = 0, J = 0, K = 0, A = 0;
  std::vector<double> rho;
  double c = 0.0;
  int episodes = 0, runs = 0, instances = 0, n_mc = 0, workers = 0;
  double sigma2 = 0.0, lambda = 0.0, decay = 0.0;
  std::vector<double> eta, epsilon;
  std::vector<std::string> algo;
  std::uint64_t seed = 0;
  std::string out, config;
};

struct Bound {
  CLI::App* app;
  std::map<std::string, CLI::Option*> options;
  bool given(const std::string& name) const {
    const auto it = options.find(name);
    return it != options.end() && it->second->count() > 0;
  }
};

Bound add_experiment(CLI::App& root, rlsvi::Experiment experiment, const std::string& help, Flags& f) {
  Bound b{root.add_subcommand(rlsvi::to_string(experiment), help), {}};
  auto& o = b.options;
  CLI::App* app = b.app;
  o["config"] = app->add_option("--config", f.config, "JSON config; command-line flags override it");
  o["seed"] = app->add_option("--seed", f.seed, "master seed");
  o["out"] = app->add_option("--out", f.out, "output CSV path");
  o["workers"] = app->add_option("--workers", f.workers, "worker threads");
  if (experiment == rlsvi::Experiment::kVerifyOptimism) {
    o["n_mc"] = app->add_option("--n-mc", f.n_mc, "Monte-Carlo replicates per check");
    return b;
  }
  o["N"] = app->add_option("--N", f.N, "chain length / product count / tabular states");
  o["H"] = app->add_option("--H", f.H, "horizon");
  o["episodes"] = app->add_option("--episodes", f.episodes, "episodes per run");
  o["runs"] = app->add_option("--runs", f.runs, "repetitions");
  o["sigma2"] = app->add_option("--sigma2", f.sigma2, "RLSVI noise variance");
  o["lambda"] = app->add_option("--lambda", f.lambda, "prior precision");
  o["decay"] = app->add_option("--decay", f.decay, "incremental RLSVI forgetting rate");
  o["algo"] = app->add_option("--algo", f.algo, "algorithms to run")->delimiter(',');
  o["eta"] = app->add_option("--eta", f.eta, "Boltzmann temperatures")->delimiter(',');
  o["epsilon"] = app->add_option("--epsilon", f.epsilon, "epsilon-greedy rates")->delimiter(',');
  switch (experiment) {
    case rlsvi::Experiment::kChainCoherent:
    case rlsvi::Experiment::kChainAgnostic:
      o["K"] = app->add_option("--K", f.K, "basis size");
      o["rho"] = app->add_option("--rho", f.rho, "misspecification levels")->delimiter(',');
      break;
    case rlsvi::Experiment::kRecommendation:
      o["J"] = app->add_option("--J", f.J, "recommendations per customer");
      o["c"] = app->add_option("--c", f.c, "prior scale of the interaction weights");
      o["instances"] = app->add_option("--instances", f.instances, "sampled environments");
      break;
    case rlsvi::Experiment::kTabularRegret:
      o["A"] = app->add_option("--A", f.A, "actions");
      o["instances"] = app->add_option("--instances", f.instances, "Dirichlet draws");
      break;
    default:
      break;
  }
  return b;
}

rlsvi::ExperimentConfig resolve(rlsvi::Experiment experiment, const Bound& b, const Flags& f) {
  rlsvi::ExperimentConfig c = rlsvi::default_config(experiment);
  if (b.given("config")) {
    std::ifstream in(f.config);
    if (!in) throw rlsvi::ConfigError("cannot read config file '" + f.config + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw rlsvi::ConfigError(std::string("bad config file: ") + e.what());
    }
    rlsvi::merge_json(c, j);
    c.experiment = experiment;
  }
  if (b.given("N")) c.num_states = f.N;
  if (b.given("H")) c.horizon = f.H;
  if (b.given("J")) c.num_recommendations = f.J;
  if (b.given("K")) c.num_features = f.K;
  if (b.given("A")) c.num_actions = f.A;
  if (b.given("rho")) c.rho = f.rho;
  if (b.given("c")) c.scale = f.c;
  if (b.given("episodes")) c.episodes = f.episodes;
  if (b.given("runs")) c.runs = f.runs;
  if (b.given("instances")) c.instances = f.instances;
  if (b.given("n_mc")) c.n_mc = f.n_mc;
  if (b.given("workers")) c.workers = f.workers;
  if (b.given("sigma2")) {
    if (!(f.sigma2 > 0.0)) throw rlsvi::ConfigError("sigma2 must be positive");
    c.agent.sigma = std::sqrt(f.sigma2);
  }
  if (b.given("lambda")) c.agent.lambda = f.lambda;
  if (b.given("decay")) c.agent.decay = f.decay;
  if (b.given("algo")) c.algorithms = f.algo;
  if (b.given("eta")) c.etas = f.eta;
  if (b.given("epsilon")) c.epsilons = f.epsilon;
  if (b.given("seed")) c.seed = f.seed;
  if (b.given("out")) c.output = f.out;
  c.validate();
  return c;
}

std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

int run_verify(const rlsvi::ExperimentConfig& c) {
  const auto report = rlsvi::run_optimism_suite(c.seed, c.n_mc, c.workers);
  std::printf("%-20s %-12s %-14s %-4s  %s\n", "check", "statistic", "threshold", "ok", "case");
  for (const auto& r : report.rows)
    std::printf("%-20s %-12.4g %-14.4g %-4s  %s\n", r.check.c_str(), r.statistic, r.threshold,
                r.pass ? "yes" : "NO", r.label.c_str());
  rlsvi::write_optimism_csv(report, c.output);
  std::printf("%zu checks, %s; wrote %s\n", report.rows.size(), report.all_pass() ? "all passed" : "FAILURES",
              c.output.c_str());
  return report.all_pass() ? 0 : 2;
}

int run_regret(const rlsvi::ExperimentConfig& c) {
  const auto result = rlsvi::run_study(c);
  rlsvi::write_csv(result.records, c.output);
  const std::string summary_path = sibling(c.output, "_summary.csv");
  rlsvi::write_summary_csv(result.summary, summary_path);
  const std::string manifest_path = sibling(c.output, "_manifest.json");
  std::ofstream(manifest_path) << rlsvi::build_manifest(c, result).dump(2) << '\n';

  // final-episode line per (algorithm, rho) group
  for (std::size_t i = 0; i < result.summary.size(); ++i) {
    const auto& row = result.summary[i];
    const bool last = i + 1 == result.summary.size() || result.summary[i + 1].algorithm != row.algorithm ||
                      result.summary[i + 1].rho != row.rho;
    if (!last) continue;
    std::printf("%-28s", row.algorithm.c_str());
    if (row.rho) std::printf(" rho=%-6.3g", *row.rho);
    std::printf(" episode %d: cum regret %.4g +/- %.3g, last reward %.4g\n", row.episode + 1, row.mean_cum_regret,
                row.cum_regret_half_width, row.mean_reward);
  }
  std::printf("wrote %s, %s, %s\n", c.output.c_str(), summary_path.c_str(), manifest_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized least-squares value iteration experiments"};
  app.set_version_flag("--version", rlsvi::kLibraryVersion);
  app.require_subcommand(1);

  Flags flags;
  std::vector<std::pair<rlsvi::Experiment, Bound>> commands;
  const std::pair<rlsvi::Experiment, const char*> table[] = {
      {rlsvi::Experiment::kChainCoherent, "chain with a coherent random basis"},
      {rlsvi::Experiment::kChainAgnostic, "chain with a misspecified basis"},
      {rlsvi::Experiment::kRecommendation, "recommendation engine"},
      {rlsvi::Experiment::kTabularRegret, "regret scaling on random tabular MDPs"},
      {rlsvi::Experiment::kVerifyOptimism, "stochastic-optimism checks"},
  };
  for (const auto& [experiment, help] : table)
    commands.emplace_back(experiment, add_experiment(app, experiment, help, flags));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (const auto& [experiment, bound] : commands) {
    if (!bound.app->parsed()) continue;
    rlsvi::ExperimentConfig config;
    try {
      config = resolve(experiment, bound, flags);
    } catch (const rlsvi::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return 1;
    }
    try {
      return experiment == rlsvi::Experiment::kVerifyOptimism ? run_verify(config) : run_regret(config);
    } catch (const rlsvi::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    }
  }
  return 1;
}
