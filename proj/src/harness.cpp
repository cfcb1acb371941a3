#include "rlsvi/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string_view>
#include <thread>

#include "rlsvi/environments.hpp"
#include "rlsvi/features.hpp"
#include "rlsvi/optimism.hpp"

namespace rlsvi {

namespace {

const std::vector<std::pair<Experiment, std::string>> kExperimentNames = {
    {Experiment::kChainCoherent, "chain-coherent"},
    {Experiment::kChainAgnostic, "chain-agnostic"},
    {Experiment::kRecommendation, "recommendation"},
    {Experiment::kTabularRegret, "tabular-regret"},
    {Experiment::kVerifyOptimism, "verify-optimism"},
};

const std::vector<std::pair<Algorithm, std::string>> kAlgorithmNames = {
    {Algorithm::kRlsvi, "rlsvi"},
    {Algorithm::kIncrementalRlsvi, "incremental-rlsvi"},
    {Algorithm::kLsviBoltzmann, "lsvi-boltzmann"},
    {Algorithm::kLsviEpsilonGreedy, "lsvi-egreedy"},
    {Algorithm::kLsviGreedy, "lsvi"},
    {Algorithm::kLinearBandit, "lcb"},
    {Algorithm::kBernoulliTs, "bernoulli-ts"},
    {Algorithm::kMyopicOracle, "myopic"},
    {Algorithm::kUniformRandom, "uniform"},
};

// Shortest %g text that reads back to the same double.
std::string format_double(double x) {
  std::string best;
  char buf[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x && (best.empty() || std::string_view(buf).size() < best.size())) best = buf;
  }
  return best;
}

// Fixed 17 significant digits for data columns.
std::string csv_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string to_string(Experiment experiment) {
  for (const auto& [e, name] : kExperimentNames)
    if (e == experiment) return name;
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  for (const auto& [e, n] : kExperimentNames)
    if (n == name) return e;
  throw ConfigError("unknown experiment '" + name + "'");
}

std::string to_string(Algorithm algorithm) {
  for (const auto& [a, name] : kAlgorithmNames)
    if (a == algorithm) return name;
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  for (const auto& [a, n] : kAlgorithmNames)
    if (n == name) return a;
  throw ConfigError("unknown algorithm '" + name + "'");
}

std::string AlgorithmSpec::label() const {
  std::string out = to_string(kind);
  if (eta) out += "(eta=" + format_double(*eta) + ")";
  if (epsilon) out += "(epsilon=" + format_double(*epsilon) + ")";
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

int ExperimentConfig::resolved_horizon() const {
  switch (experiment) {
    case Experiment::kChainCoherent:
    case Experiment::kChainAgnostic:
      return num_states;
    case Experiment::kRecommendation:
      return num_recommendations;
    default:
      return horizon;
  }
}

std::vector<AlgorithmSpec> ExperimentConfig::algorithm_specs() const {
  std::vector<AlgorithmSpec> specs;
  for (const auto& name : algorithms) {
    const Algorithm kind = parse_algorithm(name);
    if (kind == Algorithm::kLsviBoltzmann) {
      for (double eta : etas) specs.push_back({kind, eta, std::nullopt});
    } else if (kind == Algorithm::kLsviEpsilonGreedy) {
      for (double eps : epsilons) specs.push_back({kind, std::nullopt, eps});
    } else {
      specs.push_back({kind, std::nullopt, std::nullopt});
    }
  }
  return specs;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (episodes < 1) fail("episodes must be >= 1");
  if (runs < 1) fail("runs must be >= 1");
  if (workers < 1) fail("workers must be >= 1");
  if (experiment == Experiment::kVerifyOptimism) {
    if (n_mc < 10000) fail("n_mc must be >= 10000");
    return;
  }
  try {
    agent.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  for (double eta : etas)
    if (!(eta > 0.0)) fail("every eta must be positive");
  for (double eps : epsilons)
    if (!(eps >= 0.0 && eps <= 1.0)) fail("every epsilon must lie in [0, 1]");
  if (algorithms.empty()) fail("select at least one algorithm");
  const auto specs = algorithm_specs();

  const bool chain = experiment == Experiment::kChainCoherent || experiment == Experiment::kChainAgnostic;
  if (chain) {
    if (num_states < 2) fail("chain needs N >= 2");
    if (horizon != 0 && horizon != num_states) fail("the chain uses H = N");
    if (experiment == Experiment::kChainCoherent && num_features < 2) fail("coherent basis needs K >= 2");
    if (num_features < 1) fail("K must be >= 1");
    if (rho.empty()) fail("rho list must not be empty");
    for (double r : rho)
      if (!(r >= 0.0)) fail("rho must be nonnegative");
  }
  if (experiment == Experiment::kRecommendation) {
    if (num_states < 1 || num_states > 40) fail("recommendation needs 1 <= N <= 40");
    if (num_recommendations < 1 || num_recommendations > num_states) fail("need 1 <= J <= N");
    if (horizon != 0 && horizon != num_recommendations) fail("the recommendation study uses H = J");
    if (!(scale >= 0.0)) fail("c must be nonnegative");
    if (instances < 1) fail("instances must be >= 1");
  }
  if (experiment == Experiment::kTabularRegret) {
    if (num_states < 2) fail("tabular study needs S >= 2");
    if (num_actions < 1) fail("tabular study needs A >= 1");
    if (horizon < 1) fail("tabular study needs H >= 1");
    if (instances < 1) fail("instances must be >= 1");
  }
  for (const auto& spec : specs) {
    const bool needs_recommendation =
        spec.kind == Algorithm::kBernoulliTs || spec.kind == Algorithm::kMyopicOracle;
    if (needs_recommendation && experiment != Experiment::kRecommendation)
      fail(to_string(spec.kind) + " is only defined for the recommendation study");
  }
}

ExperimentConfig default_config(Experiment experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  switch (experiment) {
    case Experiment::kChainCoherent:
      c.num_states = 50;
      c.num_features = 20;
      c.agent.lambda = 1.0;
      c.agent.sigma = std::sqrt(1e-4);
      c.episodes = 400;
      c.runs = 200;
      break;
    case Experiment::kChainAgnostic:
      c.num_states = 50;
      c.num_features = 11;
      c.agent.lambda = 1.0;
      c.agent.sigma = std::sqrt(1e-3);
      c.episodes = 400;
      c.runs = 200;
      c.rho.clear();
      for (int i = 0; i <= 10; ++i) c.rho.push_back(0.01 * i);
      break;
    case Experiment::kRecommendation:
      c.num_states = 10;
      c.num_recommendations = 5;
      c.scale = 2.0;
      c.agent.lambda = 0.2;
      c.agent.sigma = std::sqrt(1e-3);
      c.episodes = 600;
      c.runs = 5;
      c.instances = 50;
      c.algorithms = {"rlsvi", "lsvi-boltzmann", "bernoulli-ts", "lcb", "myopic"};
      break;
    case Experiment::kTabularRegret:
      c.num_states = 5;
      c.num_actions = 2;
      c.horizon = 4;
      c.agent.lambda = 5.0;
      c.agent.sigma = 1.0;
      c.episodes = 2000;
      c.runs = 1;
      c.instances = 20;
      break;
    case Experiment::kVerifyOptimism:
      c.n_mc = 100000;
      c.output = "optimism.csv";
      break;
  }
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = to_string(c.experiment);
  j["N"] = c.num_states;
  j["H"] = c.resolved_horizon();
  j["J"] = c.num_recommendations;
  j["A"] = c.num_actions;
  j["K"] = c.num_features;
  j["rho"] = c.rho;
  j["c"] = c.scale;
  j["episodes"] = c.episodes;
  j["runs"] = c.runs;
  j["instances"] = c.instances;
  j["sigma2"] = c.agent.sigma * c.agent.sigma;
  j["lambda"] = c.agent.lambda;
  j["eta"] = c.etas;
  j["epsilon"] = c.epsilons;
  j["decay"] = c.agent.decay;
  j["algo"] = c.algorithms;
  j["n_mc"] = c.n_mc;
  j["seed"] = c.seed;
  j["out"] = c.output;
  j["workers"] = c.workers;
  return j;
}

namespace {

template <typename T>
std::vector<T> scalar_or_list(const nlohmann::json& value) {
  if (value.is_array()) return value.get<std::vector<T>>();
  return {value.get<T>()};
}

}  // namespace

void merge_json(ExperimentConfig& c, const nlohmann::json& j) {
  try {
    if (j.contains("experiment")) c.experiment = parse_experiment(j.at("experiment").get<std::string>());
    if (j.contains("N")) c.num_states = j.at("N").get<int>();
    if (j.contains("H")) c.horizon = j.at("H").get<int>();
    if (j.contains("J")) c.num_recommendations = j.at("J").get<int>();
    if (j.contains("A")) c.num_actions = j.at("A").get<int>();
    if (j.contains("K")) c.num_features = j.at("K").get<int>();
    if (j.contains("rho")) c.rho = scalar_or_list<double>(j.at("rho"));
    if (j.contains("c")) c.scale = j.at("c").get<double>();
    if (j.contains("episodes")) c.episodes = j.at("episodes").get<int>();
    if (j.contains("runs")) c.runs = j.at("runs").get<int>();
    if (j.contains("instances")) c.instances = j.at("instances").get<int>();
    if (j.contains("sigma2")) c.agent.sigma = std::sqrt(j.at("sigma2").get<double>());
    if (j.contains("lambda")) c.agent.lambda = j.at("lambda").get<double>();
    if (j.contains("eta")) c.etas = scalar_or_list<double>(j.at("eta"));
    if (j.contains("epsilon")) c.epsilons = scalar_or_list<double>(j.at("epsilon"));
    if (j.contains("decay")) c.agent.decay = j.at("decay").get<double>();
    if (j.contains("algo")) c.algorithms = scalar_or_list<std::string>(j.at("algo"));
    if (j.contains("n_mc")) c.n_mc = j.at("n_mc").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) c.output = j.at("out").get<std::string>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Seeding and scheduling

std::uint64_t seed_schedule(std::uint64_t master_seed, std::uint64_t run_id, SeedStream stream) {
  const std::uint64_t key = (run_id << 8) | static_cast<std::uint64_t>(stream);
  return mix64(master_seed ^ mix64(key));
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, count); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Studies

namespace {

struct AgentContext {
  FeatureMapPtr features;
  std::shared_ptr<const RecommendationMDP> recommendation;
  int num_actions = 0;
};

std::unique_ptr<Agent> make_agent(const AlgorithmSpec& spec, const AgentConfig& base, const AgentContext& ctx,
                                  std::uint64_t seed) {
  AgentConfig cfg = base;
  if (spec.eta) cfg.eta = *spec.eta;
  if (spec.epsilon) cfg.epsilon = *spec.epsilon;
  switch (spec.kind) {
    case Algorithm::kRlsvi:
      return std::make_unique<RlsviAgent>(ctx.features, cfg, seed);
    case Algorithm::kIncrementalRlsvi:
      return std::make_unique<IncrementalRlsviAgent>(ctx.features, cfg, seed);
    case Algorithm::kLsviBoltzmann:
      return std::make_unique<LsviAgent>(ctx.features, cfg, Dithering::kBoltzmann, seed);
    case Algorithm::kLsviEpsilonGreedy:
      return std::make_unique<LsviAgent>(ctx.features, cfg, Dithering::kEpsilonGreedy, seed);
    case Algorithm::kLsviGreedy:
      return std::make_unique<LsviAgent>(ctx.features, cfg, Dithering::kGreedy, seed);
    case Algorithm::kLinearBandit:
      return std::make_unique<LinearBanditAgent>(ctx.features, cfg, seed);
    case Algorithm::kBernoulliTs:
      return std::make_unique<BernoulliTsAgent>(ctx.recommendation->num_products(),
                                                ctx.recommendation->num_recommendations(), seed);
    case Algorithm::kMyopicOracle:
      return std::make_unique<MyopicOracleAgent>(ctx.recommendation);
    case Algorithm::kUniformRandom:
      return std::make_unique<UniformRandomAgent>(ctx.num_actions, seed);
  }
  throw std::logic_error("unhandled algorithm");
}

/// L episodes of one agent; fills reward, regret and cumulative regret.
std::vector<RunRecord> run_episodes(const FiniteHorizonMDP& mdp, std::span<const double> v0, Agent& agent,
                                    int episodes, Rng& trajectory, const RunRecord& prototype) {
  std::vector<RunRecord> out;
  out.reserve(static_cast<std::size_t>(episodes));
  double cumulative = 0.0;
  for (int l = 0; l < episodes; ++l) {
    const EpisodeLog log = simulate_episode(mdp, agent, trajectory);
    RunRecord rec = prototype;
    rec.episode = l;
    rec.reward = log.total_reward();
    rec.regret = regret_of_episode(v0, log);
    cumulative += rec.regret;
    rec.cum_regret = cumulative;
    out.push_back(std::move(rec));
  }
  return out;
}

nlohmann::json seed_entry(std::uint64_t master, int run_id) {
  return {{"run_id", run_id},
          {"environment", seed_schedule(master, static_cast<std::uint64_t>(run_id), SeedStream::kEnvironment)},
          {"basis", seed_schedule(master, static_cast<std::uint64_t>(run_id), SeedStream::kBasis)},
          {"agent", seed_schedule(master, static_cast<std::uint64_t>(run_id), SeedStream::kAgent)},
          {"trajectory", seed_schedule(master, static_cast<std::uint64_t>(run_id), SeedStream::kTrajectory)}};
}

}  // namespace

StudyResult run_chain_study(const ExperimentConfig& config) {
  config.validate();
  const bool coherent = config.experiment == Experiment::kChainCoherent;
  if (!coherent && config.experiment != Experiment::kChainAgnostic)
    throw ConfigError("run_chain_study needs a chain experiment");

  const FiniteHorizonMDP mdp = make_chain(config.num_states);
  const ValueFunctions values = solve_optimal(mdp);
  const auto v0 = values.v_period(0);
  const auto specs = config.algorithm_specs();
  const std::vector<double> rhos = coherent ? std::vector<double>{0.0} : config.rho;
  const auto M = static_cast<std::size_t>(config.runs);

  // Units are (rho, run, algorithm); output order follows the unit index.
  const std::size_t units = rhos.size() * M * specs.size();
  std::vector<std::vector<RunRecord>> results(units);
  std::vector<double> distances(rhos.size() * M, 0.0);

  parallel_for(units, config.workers, [&](std::size_t unit) {
    const std::size_t a = unit / (rhos.size() * M);
    const std::size_t r = (unit / M) % rhos.size();
    const std::size_t m = unit % M;
    const auto run_id = static_cast<std::uint64_t>(m);

    Rng basis_rng(seed_schedule(config.seed, run_id, SeedStream::kBasis));
    auto features = std::make_shared<const FeatureMap>(
        coherent ? coherent_basis(values, config.num_features, basis_rng)
                 : agnostic_basis(values, config.num_features, rhos[r], basis_rng));

    RunRecord proto;
    proto.run_id = static_cast<int>(m);
    proto.algorithm = specs[a].label();
    proto.eta = specs[a].eta;
    proto.epsilon = specs[a].epsilon;
    if (!coherent) {
      proto.rho = rhos[r];
      proto.distance = normalized_distance(values, *features);
      if (a == 0) distances[r * M + m] = *proto.distance;
    }
    AgentContext ctx{features, nullptr, mdp.num_actions()};
    auto agent = make_agent(specs[a], config.agent, ctx, seed_schedule(config.seed, run_id, SeedStream::kAgent));
    Rng trajectory(seed_schedule(config.seed, run_id, SeedStream::kTrajectory));
    results[unit] = run_episodes(mdp, v0, *agent, config.episodes, trajectory, proto);
  });

  StudyResult result;
  for (auto& block : results)
    for (auto& rec : block) result.records.push_back(std::move(rec));
  result.summary = summarize(result.records);

  auto& seeds = result.details["seeds"] = nlohmann::json::array();
  for (std::size_t m = 0; m < M; ++m) seeds.push_back(seed_entry(config.seed, static_cast<int>(m)));
  result.details["optimal_value"] = v0[0];
  if (!coherent) {
    auto& dist = result.details["expected_normalized_distance"] = nlohmann::json::array();
    for (std::size_t r = 0; r < rhos.size(); ++r) {
      const double mean =
          std::accumulate(distances.begin() + static_cast<long>(r * M), distances.begin() + static_cast<long>((r + 1) * M), 0.0) /
          static_cast<double>(M);
      dist.push_back({{"rho", rhos[r]}, {"distance", mean}});
    }
  }
  return result;
}

StudyResult run_recommendation_study(const ExperimentConfig& config) {
  config.validate();
  if (config.experiment != Experiment::kRecommendation)
    throw ConfigError("run_recommendation_study needs the recommendation experiment");
  const int N = config.num_states;
  const int J = config.num_recommendations;
  const auto specs = config.algorithm_specs();
  const auto reps = static_cast<std::size_t>(config.runs);

  StudyResult result;
  auto& instances = result.details["instances"] = nlohmann::json::array();
  auto& seeds = result.details["seeds"] = nlohmann::json::array();

  for (int i = 0; i < config.instances; ++i) {
    Rng env_rng(seed_schedule(config.seed, static_cast<std::uint64_t>(i), SeedStream::kEnvironment));
    const RecommendationModel model = sample_recommendation_instance(N, config.scale, env_rng);
    auto recommendation = std::make_shared<const RecommendationMDP>(J, model);
    const FiniteHorizonMDP& mdp = recommendation->mdp();
    const ValueFunctions values = solve_optimal(mdp);
    const auto v0 = values.v_period(0);
    auto features = std::make_shared<const FeatureMap>(recommendation_basis(
        N, mdp.num_states(), J, [rec = recommendation.get()](int s) { return rec->context(s); }));
    AgentContext ctx{features, recommendation, N};

    std::vector<std::vector<RunRecord>> results(specs.size() * reps);
    parallel_for(results.size(), config.workers, [&](std::size_t unit) {
      const std::size_t a = unit / reps;
      const std::size_t r = unit % reps;
      const auto run_id = static_cast<std::uint64_t>(i) * reps + r;
      RunRecord proto;
      proto.run_id = static_cast<int>(run_id);
      proto.algorithm = specs[a].label();
      proto.eta = specs[a].eta;
      proto.epsilon = specs[a].epsilon;
      auto agent = make_agent(specs[a], config.agent, ctx, seed_schedule(config.seed, run_id, SeedStream::kAgent));
      Rng trajectory(seed_schedule(config.seed, run_id, SeedStream::kTrajectory));
      results[unit] = run_episodes(mdp, v0, *agent, config.episodes, trajectory, proto);
    });
    for (auto& block : results)
      for (auto& rec : block) result.records.push_back(std::move(rec));

    std::vector<std::vector<double>> gamma(static_cast<std::size_t>(N));
    for (int a = 0; a < N; ++a)
      for (int n = 0; n < N; ++n) gamma[a].push_back(model.gamma(a, n));
    std::vector<double> beta(model.beta.data(), model.beta.data() + N);
    instances.push_back({{"instance", i},
                         {"environment_seed", seed_schedule(config.seed, static_cast<std::uint64_t>(i), SeedStream::kEnvironment)},
                         {"optimal_value", v0[0]},
                         {"decision_states", recommendation->num_decision_states()},
                         {"gamma", gamma},
                         {"beta", beta}});
    for (std::size_t r = 0; r < reps; ++r) seeds.push_back(seed_entry(config.seed, static_cast<int>(i * reps + r)));
  }
  // Canonical order: algorithm block, then run_id, then episode.
  std::map<std::string, std::size_t> rank;
  for (std::size_t a = 0; a < specs.size(); ++a) rank.emplace(specs[a].label(), a);
  std::stable_sort(result.records.begin(), result.records.end(), [&](const RunRecord& x, const RunRecord& y) {
    const auto rx = rank.at(x.algorithm), ry = rank.at(y.algorithm);
    if (rx != ry) return rx < ry;
    if (x.run_id != y.run_id) return x.run_id < y.run_id;
    return x.episode < y.episode;
  });
  result.summary = summarize(result.records);
  return result;
}

StudyResult run_tabular_regret(const ExperimentConfig& config) {
  config.validate();
  if (config.experiment != Experiment::kTabularRegret)
    throw ConfigError("run_tabular_regret needs the tabular-regret experiment");
  const int S = config.num_states;
  const int A = config.num_actions;
  const int H = config.horizon;
  const auto specs = config.algorithm_specs();
  const auto draws = static_cast<std::size_t>(config.instances);
  const auto reps = static_cast<std::size_t>(config.runs);

  auto features = std::make_shared<const FeatureMap>(identity_basis(S, A, H));
  std::vector<std::vector<RunRecord>> results(specs.size() * draws * reps);
  parallel_for(results.size(), config.workers, [&](std::size_t unit) {
    const std::size_t a = unit / (draws * reps);
    const std::size_t d = (unit / reps) % draws;
    const std::size_t r = unit % reps;
    const auto run_id = static_cast<std::uint64_t>(d * reps + r);
    Rng env_rng(seed_schedule(config.seed, d, SeedStream::kEnvironment));
    const FiniteHorizonMDP mdp = sample_dirichlet_mdp(S, A, H, env_rng);
    const ValueFunctions values = solve_optimal(mdp);
    RunRecord proto;
    proto.run_id = static_cast<int>(run_id);
    proto.algorithm = specs[a].label();
    proto.eta = specs[a].eta;
    proto.epsilon = specs[a].epsilon;
    AgentContext ctx{features, nullptr, A};
    auto agent = make_agent(specs[a], config.agent, ctx, seed_schedule(config.seed, run_id, SeedStream::kAgent));
    Rng trajectory(seed_schedule(config.seed, run_id, SeedStream::kTrajectory));
    results[unit] = run_episodes(mdp, values.v_period(0), *agent, config.episodes, trajectory, proto);
  });

  StudyResult result;
  for (auto& block : results)
    for (auto& rec : block) result.records.push_back(std::move(rec));
  result.summary = summarize(result.records);

  auto& fits = result.details["fits"] = nlohmann::json::array();
  for (const auto& spec : specs) {
    std::vector<RunRecord> subset;
    for (const auto& rec : result.records)
      if (rec.algorithm == spec.label()) subset.push_back(rec);
    const auto cum = mean_by_episode(subset, &RunRecord::cum_regret);
    fits.push_back({{"algorithm", spec.label()}, {"regret_exponent", fitted_regret_exponent(cum, H)}});
  }
  auto& seeds = result.details["seeds"] = nlohmann::json::array();
  for (std::size_t i = 0; i < draws * reps; ++i) seeds.push_back(seed_entry(config.seed, static_cast<int>(i)));
  return result;
}

StudyResult run_study(const ExperimentConfig& config) {
  switch (config.experiment) {
    case Experiment::kChainCoherent:
    case Experiment::kChainAgnostic:
      return run_chain_study(config);
    case Experiment::kRecommendation:
      return run_recommendation_study(config);
    case Experiment::kTabularRegret:
      return run_tabular_regret(config);
    case Experiment::kVerifyOptimism:
      break;
  }
  throw ConfigError("verify-optimism is not a regret study");
}

// ---------------------------------------------------------------------------
// Aggregation

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  struct Acc {
    int runs = 0;
    double reward = 0.0, regret = 0.0, cum = 0.0, cum_sq = 0.0;
  };
  // Groups keep first-appearance order; episodes are dense from 0.
  std::vector<std::pair<std::string, std::optional<double>>> groups;
  std::vector<std::vector<Acc>> acc;
  for (const auto& rec : records) {
    std::size_t g = 0;
    while (g < groups.size() && !(groups[g].first == rec.algorithm && groups[g].second == rec.rho)) ++g;
    if (g == groups.size()) {
      groups.emplace_back(rec.algorithm, rec.rho);
      acc.emplace_back();
    }
    auto& series = acc[g];
    if (series.size() <= static_cast<std::size_t>(rec.episode)) series.resize(static_cast<std::size_t>(rec.episode) + 1);
    Acc& a = series[static_cast<std::size_t>(rec.episode)];
    ++a.runs;
    a.reward += rec.reward;
    a.regret += rec.regret;
    a.cum += rec.cum_regret;
    a.cum_sq += rec.cum_regret * rec.cum_regret;
  }
  std::vector<SummaryRow> rows;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t l = 0; l < acc[g].size(); ++l) {
      const Acc& a = acc[g][l];
      if (a.runs == 0) continue;
      SummaryRow row;
      row.algorithm = groups[g].first;
      row.rho = groups[g].second;
      row.episode = static_cast<int>(l);
      row.runs = a.runs;
      row.mean_reward = a.reward / a.runs;
      row.mean_regret = a.regret / a.runs;
      row.mean_cum_regret = a.cum / a.runs;
      if (a.runs > 1) {
        const double var = std::max(0.0, (a.cum_sq - a.cum * a.cum / a.runs) / (a.runs - 1));
        row.cum_regret_half_width = 1.96 * std::sqrt(var / a.runs);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<double> mean_by_episode(const std::vector<RunRecord>& records, double RunRecord::*field) {
  std::vector<double> sum;
  std::vector<int> count;
  for (const auto& rec : records) {
    const auto l = static_cast<std::size_t>(rec.episode);
    if (sum.size() <= l) {
      sum.resize(l + 1, 0.0);
      count.resize(l + 1, 0);
    }
    sum[l] += rec.*field;
    ++count[l];
  }
  for (std::size_t l = 0; l < sum.size(); ++l)
    if (count[l] > 0) sum[l] /= count[l];
  return sum;
}

double fitted_regret_exponent(const std::vector<double>& mean_cum_regret, int horizon) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t l = mean_cum_regret.size() / 2; l < mean_cum_regret.size(); ++l) {
    if (!(mean_cum_regret[l] > 0.0)) continue;
    const double x = std::log(static_cast<double>((l + 1) * static_cast<std::size_t>(horizon)));
    const double y = std::log(mean_cum_regret[l]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::nan("");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string optional_cell(const std::optional<double>& v) { return v ? csv_double(*v) : std::string(); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string quote_csv(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void write_csv(const std::vector<RunRecord>& records, const std::string& path) {
  if (records.empty()) throw std::invalid_argument("no records to write");
  bool has_algorithm = false, has_eta = false, has_epsilon = false, has_rho = false, has_distance = false;
  for (const auto& r : records) {
    has_algorithm |= !r.algorithm.empty();
    has_eta |= r.eta.has_value();
    has_epsilon |= r.epsilon.has_value();
    has_rho |= r.rho.has_value();
    has_distance |= r.distance.has_value();
  }
  std::ofstream out = open_output(path);
  out << "run_id,episode,reward,regret,cum_regret";
  if (has_algorithm) out << ",algorithm";
  if (has_eta) out << ",eta";
  if (has_epsilon) out << ",epsilon";
  if (has_rho) out << ",rho";
  if (has_distance) out << ",distance";
  out << '\n';
  for (const auto& r : records) {
    out << r.run_id << ',' << r.episode << ',' << csv_double(r.reward) << ',' << csv_double(r.regret) << ','
        << csv_double(r.cum_regret);
    if (has_algorithm) out << ',' << quote_csv(r.algorithm);
    if (has_eta) out << ',' << optional_cell(r.eta);
    if (has_epsilon) out << ',' << optional_cell(r.epsilon);
    if (has_rho) out << ',' << optional_cell(r.rho);
    if (has_distance) out << ',' << optional_cell(r.distance);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::vector<RunRecord> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV '" + path + "'");
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
  for (const char* required : {"run_id", "episode", "reward", "regret", "cum_regret"})
    if (!column.count(required)) throw std::runtime_error(std::string("CSV lacks column ") + required);

  auto optional_value = [&](const std::vector<std::string>& cells, const char* name) -> std::optional<double> {
    const auto it = column.find(name);
    if (it == column.end() || cells[it->second].empty()) return std::nullopt;
    return std::strtod(cells[it->second].c_str(), nullptr);
  };
  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw std::runtime_error("ragged CSV row in '" + path + "'");
    RunRecord r;
    r.run_id = std::stoi(cells[column["run_id"]]);
    r.episode = std::stoi(cells[column["episode"]]);
    r.reward = std::strtod(cells[column["reward"]].c_str(), nullptr);
    r.regret = std::strtod(cells[column["regret"]].c_str(), nullptr);
    r.cum_regret = std::strtod(cells[column["cum_regret"]].c_str(), nullptr);
    if (column.count("algorithm")) r.algorithm = cells[column["algorithm"]];
    r.eta = optional_value(cells, "eta");
    r.epsilon = optional_value(cells, "epsilon");
    r.rho = optional_value(cells, "rho");
    r.distance = optional_value(cells, "distance");
    records.push_back(std::move(r));
  }
  return records;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "algorithm,rho,episode,runs,mean_reward,mean_regret,mean_cum_regret,cum_regret_ci95\n";
  for (const auto& r : rows) {
    out << quote_csv(r.algorithm) << ',' << optional_cell(r.rho) << ',' << r.episode << ',' << r.runs << ','
        << csv_double(r.mean_reward) << ',' << csv_double(r.mean_regret) << ','
        << csv_double(r.mean_cum_regret) << ',' << csv_double(r.cum_regret_half_width) << '\n';
  }
}

nlohmann::json build_manifest(const ExperimentConfig& config, const StudyResult& result) {
  nlohmann::json manifest;
  manifest["library"] = "rlsvi-lab";
  manifest["version"] = kLibraryVersion;
  manifest["config"] = to_json(config);
  manifest["details"] = result.details;
  manifest["rows"] = result.records.size();
  return manifest;
}

// ---------------------------------------------------------------------------
// Optimism suite

bool OptimismReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const OptimismCheckRow& r) { return r.pass; });
}

namespace {

DirichletSpec random_spec(int size, Rng& rng, bool sorted) {
  DirichletSpec spec;
  for (int i = 0; i < size; ++i) {
    spec.values.push_back(uniform01(rng));
    spec.concentration.push_back(1.0 + 9.0 * uniform01(rng));
  }
  if (sorted) std::sort(spec.values.begin(), spec.values.end());
  return spec;
}

std::string describe(const DirichletSpec& spec) {
  std::ostringstream os;
  os << "v=(";
  for (std::size_t i = 0; i < spec.values.size(); ++i) os << (i ? " " : "") << spec.values[i];
  os << ") alpha=(";
  for (std::size_t i = 0; i < spec.concentration.size(); ++i) os << (i ? " " : "") << spec.concentration[i];
  os << ")";
  return os.str();
}

struct ZLaw {
  std::string name;
  ScalarSampler sampler;
};

std::vector<ZLaw> z_laws() {
  return {
      {"z~N(0,1)", [](Rng& rng) { return standard_normal(rng); }},
      {"z~U[0,1]", [](Rng& rng) { return uniform01(rng); }},
      {"z~{0.3,0.7}", [](Rng& rng) { return uniform01(rng) < 0.5 ? 0.3 : 0.7; }},
  };
}

/// Samples (y, y~) under the Gamma-splitting coupling: gamma_i = g_hi + g_lo
/// with g_hi ~ Gamma(alpha_i (v_i - v_1)/(v_d - v_1)), so p~ = sum g_hi / sum gamma.
std::pair<double, double> coupled_projection_draw(const DirichletSpec& spec, Rng& rng) {
  const auto& v = spec.values;
  const double lo = v.front(), hi = v.back();
  double total = 0.0, y = 0.0, upper = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double w_hi = spec.concentration[i] * (v[i] - lo) / (hi - lo);
    const double w_lo = spec.concentration[i] - w_hi;
    const double g_hi = w_hi > 0.0 ? sample_gamma(w_hi, rng) : 0.0;
    const double g_lo = w_lo > 0.0 ? sample_gamma(w_lo, rng) : 0.0;
    total += g_hi + g_lo;
    y += (g_hi + g_lo) * v[i];
    upper += g_hi;
  }
  const double p_tilde = upper / total;
  return {y / total, p_tilde * hi + (1.0 - p_tilde) * lo};
}

}  // namespace

OptimismReport run_optimism_suite(std::uint64_t seed, int n_mc, int workers) {
  OptimismReport report;
  const auto laws = z_laws();

  // Gaussian vs Dirichlet on 20 specs (N in {2, 3, 5}) under three z laws.
  {
    constexpr int kSpecs = 20;
    const int sizes[] = {2, 3, 5};
    std::vector<OptimismCheckRow> rows(static_cast<std::size_t>(kSpecs) * laws.size());
    parallel_for(rows.size(), workers, [&](std::size_t unit) {
      const std::size_t k = unit / laws.size();
      const std::size_t z = unit % laws.size();
      Rng spec_rng(seed_schedule(seed, k, SeedStream::kEnvironment));
      const DirichletSpec spec = random_spec(sizes[k % 3], spec_rng, false);
      Rng mc_rng(seed_schedule(seed, unit, SeedStream::kTrajectory));
      const auto est = check_optimism(gaussian_dirichlet_pair(spec), laws[z].sampler, n_mc, mc_rng);
      rows[unit] = {"gaussian-dirichlet", describe(spec) + " " + laws[z].name, est.value,
                    -3.0 * est.standard_error, est.value >= -3.0 * est.standard_error};
    });
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }

  // x = y + independent zero-mean noise is optimistic for y.
  for (std::size_t z = 0; z < laws.size(); ++z) {
    OptimismPair pair{[](Rng& rng) { return uniform01(rng) + 0.2 * standard_normal(rng); },
                      [](Rng& rng) { return uniform01(rng); }, "mean-preserving spread"};
    Rng rng(seed_schedule(seed, 1000 + z, SeedStream::kTrajectory));
    const auto est = check_optimism(pair, laws[z].sampler, n_mc, rng);
    report.rows.push_back({"spread-equivalence", "y~U[0,1], x=y+N(0,0.04) " + laws[z].name, est.value,
                           -3.0 * est.standard_error, est.value >= -3.0 * est.standard_error});
  }

  // Beta projection identities on 100 specs.
  {
    double sum_err = 0.0, mean_err = 0.0;
    for (int k = 0; k < 100; ++k) {
      Rng rng(seed_schedule(seed, 2000 + static_cast<std::uint64_t>(k), SeedStream::kEnvironment));
      const DirichletSpec spec = random_spec(2 + k % 5, rng, true);
      const auto bp = beta_projection(spec);
      const double mean_tilde = (bp.alpha * spec.values.back() + bp.beta * spec.values.front()) / (bp.alpha + bp.beta);
      sum_err = std::max(sum_err, std::abs(bp.alpha + bp.beta - spec.total_concentration()));
      mean_err = std::max(mean_err, std::abs(mean_tilde - spec.mean()));
    }
    report.rows.push_back({"beta-projection", "max |a~ + b~ - sum alpha| over 100 specs", sum_err, 1e-12, sum_err <= 1e-12});
    report.rows.push_back({"beta-projection", "max |E[y~] - E[y]| over 100 specs", mean_err, 1e-12, mean_err <= 1e-12});
  }
  // Monte-Carlo mean match under the Gamma-splitting coupling.
  for (int k = 0; k < 10; ++k) {
    Rng spec_rng(seed_schedule(seed, 3000 + static_cast<std::uint64_t>(k), SeedStream::kEnvironment));
    const DirichletSpec spec = random_spec(2 + k % 4, spec_rng, true);
    Rng rng(seed_schedule(seed, 3000 + static_cast<std::uint64_t>(k), SeedStream::kTrajectory));
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < n_mc; ++i) {
      const auto [y, y_tilde] = coupled_projection_draw(spec, rng);
      const double d = y_tilde - y;
      const double delta = d - mean;
      mean += delta / (i + 1);
      m2 += delta * (d - mean);
    }
    const double se = std::sqrt(m2 / (n_mc - 1) / n_mc);
    report.rows.push_back({"beta-projection-mc", describe(spec), std::abs(mean), 3.0 * se, std::abs(mean) <= 3.0 * se});
  }

  // Single crossing over the (alpha, beta) sweep.
  {
    const double grid[] = {1.0 / 3.0, 0.5, 1.0, 4.0 / 3.0, 2.0, 5.0, 10.0};
    std::vector<OptimismCheckRow> rows(49);
    parallel_for(rows.size(), workers, [&](std::size_t unit) {
      const double a = grid[unit / 7], b = grid[unit % 7];
      const auto res = single_crossing_check(a, b, 10000);
      std::ostringstream label;
      label << "alpha=" << a << " beta=" << b;
      rows[unit] = {"single-crossing", label.str(), static_cast<double>(res.sign_changes), 1.0, res.sign_changes <= 1};
    });
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }

  // Gaussian two-sided tail bound.
  {
    std::vector<double> gammas;
    for (int i = 0; i <= 6000; ++i) gammas.push_back(0.001 * i);
    Rng rng(seed_schedule(seed, 4000, SeedStream::kTrajectory));
    const auto tail = gaussian_tail_check(gammas, n_mc, rng);
    double slack_beyond = std::numeric_limits<double>::infinity();
    for (const auto& row : tail.rows)
      if (row.gamma >= 1.6) slack_beyond = std::min(slack_beyond, row.slack());
    report.rows.push_back({"gaussian-tail", "min slack for gamma >= 1.6", slack_beyond, 0.0, slack_beyond >= 0.0});
    const double operating_point = std::sqrt(4.0 * std::log(2.0));
    report.rows.push_back({"gaussian-tail", "grid crossover below sqrt(4 log 2)", tail.crossover, operating_point,
                           tail.crossover < operating_point});
    const double exact = gaussian_tail_crossover();
    report.rows.push_back({"gaussian-tail", "bisection crossover below sqrt(4 log 2)", exact, operating_point,
                           exact < operating_point});
  }

  // Truncated-normal mean bound on [1.001, 20].
  {
    std::vector<double> lambdas;
    for (int i = 0; i <= 18999; ++i) lambdas.push_back(1.001 + 0.001 * i);
    const auto res = truncated_mean_check(lambdas);
    report.rows.push_back({"truncated-mean", "min (l + 1 - E[X | X > l]) on [1.001, 20]", res.worst_slack, 0.0,
                           res.worst_slack >= 0.0});
  }
  return report;
}

void write_optimism_csv(const OptimismReport& report, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "check,case,statistic,threshold,pass\n";
  for (const auto& r : report.rows) {
    out << r.check << ',' << quote_csv(r.label) << ',' << csv_double(r.statistic) << ','
        << csv_double(r.threshold) << ',' << (r.pass ? "true" : "false") << '\n';
  }
}

}  // namespace rlsvi
