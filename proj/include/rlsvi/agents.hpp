#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "rlsvi/environments.hpp"
#include "rlsvi/features.hpp"
#include "rlsvi/mdp.hpp"
#include "rlsvi/random.hpp"
#include "rlsvi/regression.hpp"

namespace rlsvi {

/// Hyperparameters shared by the agents. Each algorithm reads only its own.
struct AgentConfig {
  double sigma = 1.0;    // RLSVI noise scale
  double lambda = 1.0;   // ridge regularizer
  double eta = 1.0;      // Boltzmann temperature
  double epsilon = 0.1;  // epsilon-greedy rate
  double discount = 0.9; // continual RLSVI only
  double decay = 0.0;    // incremental RLSVI forgetting rate nu_l ...
  std::vector<double> decay_schedule;  // ... unless a per-episode schedule is given

  double decay_at(std::size_t episode) const {
    return episode < decay_schedule.size() ? decay_schedule[episode] : decay;
  }
  void validate() const;
};

/// Append-only history of completed episodes.
class ReplayStore {
 public:
  explicit ReplayStore(int horizon) : horizon_(horizon) {}

  void append(EpisodeLog episode);
  std::size_t size() const { return episodes_.size(); }
  int horizon() const { return horizon_; }
  const EpisodeLog& operator[](std::size_t i) const { return episodes_[i]; }

 private:
  int horizon_;
  std::vector<EpisodeLog> episodes_;
};

/// Feature rows Phi_h(s_ih, a_ih) and their Gram matrices, grown one episode
/// at a time so each plan only rebuilds the targets.
class DesignCache {
 public:
  DesignCache(const FeatureMap& features, int horizon);

  /// Appends rows for episodes not yet seen.
  void sync(const ReplayStore& store);

  std::size_t size() const { return count_; }
  /// First `size()` rows of the period-h design matrix.
  auto design(int period) const { return rows_[static_cast<std::size_t>(period)].topRows(static_cast<Eigen::Index>(count_)); }
  const Eigen::MatrixXd& gram(int period) const { return gram_[static_cast<std::size_t>(period)]; }

 private:
  const FeatureMap* features_;
  std::size_t count_ = 0;
  std::vector<Eigen::MatrixXd> rows_;
  std::vector<Eigen::MatrixXd> gram_;
};

enum class TargetRule {
  kBootstrapped,  // r_ih + max_a (Phi_{h+1} theta_{h+1})(s_{i,h+1}, a); r_ih + r_iH at h = H-1
  kImmediate,     // r_ih only
};

enum class Estimator {
  kPosteriorSample,  // theta ~ N(mean, Sigma)
  kPosteriorMean,    // theta = mean
  kPlainRidge,       // (A^T A + lambda I)^{-1} A^T b
};

struct PlanOptions {
  TargetRule targets = TargetRule::kBootstrapped;
  Estimator estimator = Estimator::kPosteriorSample;
  double sigma = 1.0;
  double lambda = 1.0;
};

/// Backward least-squares value iteration over periods H-1..0. Returns one
/// coefficient vector per period; all zeros when the store is empty.
std::vector<Eigen::VectorXd> plan_value_functions(const ReplayStore& store, const DesignCache& cache,
                                                  const FeatureMap& features, const PlanOptions& options,
                                                  Rng& rng);

/// Regression data (A, b) for one period given the next period's coefficients.
RegressionData build_regression(const ReplayStore& store, const FeatureMap& features, int period,
                                const Eigen::VectorXd* next_theta, TargetRule targets);

std::vector<Eigen::VectorXd> rlsvi_plan(const ReplayStore& store, const FeatureMap& features,
                                        const AgentConfig& config, Rng& rng);
std::vector<Eigen::VectorXd> lsvi_plan(const ReplayStore& store, const FeatureMap& features,
                                       const AgentConfig& config);
std::vector<Eigen::VectorXd> linear_contextual_bandit_plan(const ReplayStore& store,
                                                           const FeatureMap& features,
                                                           const AgentConfig& config, Rng& rng);

/// Uniform choice among the maximizers of q.
int argmax_uniform(const Eigen::VectorXd& q, Rng& rng);
/// Softmax sample with probabilities proportional to exp(q / eta).
int softmax_sample(const Eigen::VectorXd& q, double eta, Rng& rng);

int greedy_act(const Eigen::VectorXd& theta, const FeatureMap& features, int period, int state, Rng& rng);
int boltzmann_act(const Eigen::VectorXd& theta, const FeatureMap& features, int period, int state,
                  double eta, Rng& rng);
int epsilon_greedy_act(const Eigen::VectorXd& theta, const FeatureMap& features, int period, int state,
                       double epsilon, Rng& rng);

/// Backward-induction agent with a linear value function per period.
class LinearValueAgent : public Agent {
 public:
  LinearValueAgent(FeatureMapPtr features, AgentConfig config, std::uint64_t seed);

  void begin_episode() override;
  void observe(const EpisodeLog& episode) override;

  const std::vector<Eigen::VectorXd>& theta() const { return theta_; }
  const ReplayStore& store() const { return store_; }

 protected:
  virtual PlanOptions plan_options() const = 0;

  FeatureMapPtr features_;
  AgentConfig config_;
  Rng rng_;
  ReplayStore store_;
  DesignCache cache_;
  std::vector<Eigen::VectorXd> theta_;
};

/// RLSVI with greedy actions (batch form).
class RlsviAgent : public LinearValueAgent {
 public:
  using LinearValueAgent::LinearValueAgent;
  int act(int period, int state) override;

 protected:
  PlanOptions plan_options() const override;
};

enum class Dithering { kGreedy, kBoltzmann, kEpsilonGreedy };

/// LSVI point estimates with Boltzmann, epsilon-greedy or plain greedy actions.
class LsviAgent : public LinearValueAgent {
 public:
  LsviAgent(FeatureMapPtr features, AgentConfig config, Dithering dithering, std::uint64_t seed);
  int act(int period, int state) override;

 protected:
  PlanOptions plan_options() const override;

 private:
  Dithering dithering_;
};

/// Randomized linear contextual bandit: RLSVI without value propagation.
class LinearBanditAgent : public LinearValueAgent {
 public:
  using LinearValueAgent::LinearValueAgent;
  int act(int period, int state) override;

 protected:
  PlanOptions plan_options() const override;
};

/// RLSVI with constant per-episode cost: per-period precision and moment
/// recursions, bootstrapped against the previous episode's sample.
class IncrementalRlsviAgent : public Agent {
 public:
  IncrementalRlsviAgent(FeatureMapPtr features, AgentConfig config, std::uint64_t seed);

  void begin_episode() override;
  int act(int period, int state) override;
  void observe(const EpisodeLog& episode) override;

  const PrecisionTracker& tracker(int period) const { return trackers_[static_cast<std::size_t>(period)]; }
  const std::vector<Eigen::VectorXd>& theta() const { return theta_; }
  std::size_t episodes_seen() const { return episodes_; }

 private:
  FeatureMapPtr features_;
  AgentConfig config_;
  Rng rng_;
  std::vector<PrecisionTracker> trackers_;
  std::vector<Eigen::VectorXd> theta_;
  std::size_t episodes_ = 0;
};

/// Bernoulli Thompson sampling over products with Beta(alpha_n, beta_n) beliefs.
struct BetaBeliefs {
  std::vector<double> alpha;
  std::vector<double> beta;

  static BetaBeliefs uniform(int num_products);
  /// alpha += 1 on a like, beta += 1 otherwise.
  void update(int product, bool liked);
};

/// Top-J products ranked by one Beta draw each, in descending order.
std::vector<int> bernoulli_ts_act(const BetaBeliefs& beliefs, int num_recommendations, Rng& rng);

class BernoulliTsAgent : public Agent {
 public:
  BernoulliTsAgent(int num_products, int num_recommendations, std::uint64_t seed);

  void begin_episode() override;
  int act(int period, int state) override;
  void observe(const EpisodeLog& episode) override;

  const BetaBeliefs& beliefs() const { return beliefs_; }

 private:
  int num_recommendations_;
  BetaBeliefs beliefs_;
  Rng rng_;
  std::vector<int> ranking_;
};

/// Fresh product with the highest true like-probability; lowest index on ties.
int oracle_myopic_act(const RecommendationMDP& recommendation, int state);

class MyopicOracleAgent : public Agent {
 public:
  explicit MyopicOracleAgent(std::shared_ptr<const RecommendationMDP> recommendation)
      : recommendation_(std::move(recommendation)) {}
  int act(int, int state) override { return oracle_myopic_act(*recommendation_, state); }

 private:
  std::shared_ptr<const RecommendationMDP> recommendation_;
};

class PolicyAgent : public Agent {
 public:
  explicit PolicyAgent(Policy policy) : policy_(std::move(policy)) {}
  int act(int period, int state) override { return policy_.actions[period][state]; }

 private:
  Policy policy_;
};

class UniformRandomAgent : public Agent {
 public:
  UniformRandomAgent(int num_actions, std::uint64_t seed) : num_actions_(num_actions), rng_(seed) {}
  int act(int, int) override { return uniform_index(num_actions_, rng_); }

 private:
  int num_actions_;
  Rng rng_;
};

/// One step of a discounted, infinite-horizon interaction.
struct Transition {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;
};

/// w' ~ N(sqrt(1 - g^2) w, g^2 Sigma), given the lower factor of Sigma.
Eigen::VectorXd autocorrelated_perturbation(const Eigen::VectorXd& previous, const Eigen::MatrixXd& covariance_factor,
                                            double discount, Rng& rng);

/// Continual RLSVI over a single time-invariant feature matrix. Each step
/// regresses every past transition on r + g max_a (Phi theta_t)(x', a) and
/// perturbs the mean with an autocorrelated Gaussian w_t.
class ContinualRlsvi {
 public:
  /// `incremental_gram` keeps A^T A as a running sum instead of rebuilding it.
  ContinualRlsvi(FeatureMapPtr features, AgentConfig config, std::uint64_t seed,
                 bool incremental_gram = false);

  int act(int state);
  void step(const Transition& transition);

  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::VectorXd& perturbation() const { return perturbation_; }
  const GaussianPosterior& posterior() const { return posterior_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  std::size_t steps() const { return history_.size(); }

 private:
  FeatureMapPtr features_;
  AgentConfig config_;
  Rng rng_;
  bool incremental_gram_;
  std::vector<Transition> history_;
  Eigen::MatrixXd rows_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd theta_;
  Eigen::VectorXd perturbation_;
  GaussianPosterior posterior_;
};

}  // namespace rlsvi
