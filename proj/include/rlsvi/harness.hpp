#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlsvi/agents.hpp"

namespace rlsvi {

inline constexpr const char* kLibraryVersion = "0.3.0";

enum class Experiment { kChainCoherent, kChainAgnostic, kRecommendation, kTabularRegret, kVerifyOptimism };

std::string to_string(Experiment experiment);
Experiment parse_experiment(const std::string& name);

enum class Algorithm {
  kRlsvi,
  kIncrementalRlsvi,
  kLsviBoltzmann,
  kLsviEpsilonGreedy,
  kLsviGreedy,
  kLinearBandit,
  kBernoulliTs,
  kMyopicOracle,
  kUniformRandom,
};

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& name);

/// One algorithm variant; eta / epsilon are set only for the dithering agents.
struct AlgorithmSpec {
  Algorithm kind = Algorithm::kRlsvi;
  std::optional<double> eta;
  std::optional<double> epsilon;

  std::string label() const;
};

/// Raised for inconsistent or out-of-range experiment settings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::kChainCoherent;
  int num_states = 50;       // N: chain length, product count, or tabular S
  int horizon = 0;           // 0 = derived (chain: N, recommendation: J)
  int num_recommendations = 5;
  int num_actions = 2;       // tabular only
  int num_features = 20;     // K
  std::vector<double> rho = {0.0};
  double scale = 2.0;        // c
  int episodes = 400;        // L
  int runs = 200;            // M: repetitions per instance
  int instances = 50;        // recommendation instances / Dirichlet draws
  AgentConfig agent;
  std::vector<std::string> algorithms = {"rlsvi"};
  std::vector<double> etas = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::vector<double> epsilons = {0.1};
  int n_mc = 100000;
  std::uint64_t seed = 1;
  std::string output = "results.csv";
  int workers = 1;

  int resolved_horizon() const;
  std::vector<AlgorithmSpec> algorithm_specs() const;
  void validate() const;
};

/// Full-scale defaults for each experiment.
ExperimentConfig default_config(Experiment experiment);

nlohmann::json to_json(const ExperimentConfig& config);
/// Overwrites the fields present in `json`.
void merge_json(ExperimentConfig& config, const nlohmann::json& json);

struct RunRecord {
  int run_id = 0;
  int episode = 0;
  double reward = 0.0;
  double regret = 0.0;
  double cum_regret = 0.0;
  std::string algorithm;
  std::optional<double> eta;
  std::optional<double> epsilon;
  std::optional<double> rho;
  std::optional<double> distance;
};

/// Mean across runs of one (algorithm, rho) group at one episode, with a 95%
/// normal-approximation half-width on the cumulative regret.
struct SummaryRow {
  std::string algorithm;
  std::optional<double> rho;
  int episode = 0;
  int runs = 0;
  double mean_reward = 0.0;
  double mean_regret = 0.0;
  double mean_cum_regret = 0.0;
  double cum_regret_half_width = 0.0;
};

struct StudyResult {
  std::vector<RunRecord> records;
  std::vector<SummaryRow> summary;
  nlohmann::json details = nlohmann::json::object();
};

enum class SeedStream : std::uint64_t { kEnvironment = 1, kBasis = 2, kAgent = 3, kTrajectory = 4 };

/// Child seed keyed on (master, run, stream); distinct (run, stream) pairs
/// under one master never collide.
std::uint64_t seed_schedule(std::uint64_t master_seed, std::uint64_t run_id, SeedStream stream);

/// Runs `body(i)` for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

StudyResult run_chain_study(const ExperimentConfig& config);
StudyResult run_recommendation_study(const ExperimentConfig& config);
StudyResult run_tabular_regret(const ExperimentConfig& config);

/// Dispatches on `config.experiment` (any experiment except verify-optimism).
StudyResult run_study(const ExperimentConfig& config);

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

/// Least-squares slope of log(mean cumulative regret) on log(T) over the
/// second half of the episodes, T = (l + 1) * H.
double fitted_regret_exponent(const std::vector<double>& mean_cum_regret, int horizon);

/// Mean per-episode regret across runs, indexed by episode.
std::vector<double> mean_by_episode(const std::vector<RunRecord>& records, double RunRecord::*field);

void write_csv(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> read_csv(const std::string& path);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);

nlohmann::json build_manifest(const ExperimentConfig& config, const StudyResult& result);

struct OptimismCheckRow {
  std::string check;
  std::string label;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct OptimismReport {
  std::vector<OptimismCheckRow> rows;
  bool all_pass() const;
};

/// The stochastic-optimism verification suite; every row is one check.
OptimismReport run_optimism_suite(std::uint64_t seed, int n_mc, int workers);
void write_optimism_csv(const OptimismReport& report, const std::string& path);

}  // namespace rlsvi
