#include "rlsvi/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rlsvi {

void AgentConfig::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  if (!(discount > 0.0 && discount < 1.0)) throw std::invalid_argument("discount must lie in (0, 1)");
  if (!(decay >= 0.0 && decay <= 1.0)) throw std::invalid_argument("decay must lie in [0, 1]");
  for (double nu : decay_schedule)
    if (!(nu >= 0.0 && nu <= 1.0)) throw std::invalid_argument("decay schedule must lie in [0, 1]");
}

void ReplayStore::append(EpisodeLog episode) {
  const auto H = static_cast<std::size_t>(horizon_);
  if (episode.actions.size() != H || episode.rewards.size() != H || episode.states.size() != H + 1)
    throw std::invalid_argument("episode length does not match the store horizon");
  episodes_.push_back(std::move(episode));
}

DesignCache::DesignCache(const FeatureMap& features, int horizon) : features_(&features) {
  if (features.horizon() < horizon) throw std::invalid_argument("feature map does not cover every period");
  const int K = features.num_features();
  rows_.assign(static_cast<std::size_t>(horizon), Eigen::MatrixXd(16, K));
  gram_.assign(static_cast<std::size_t>(horizon), Eigen::MatrixXd::Zero(K, K));
}

void DesignCache::sync(const ReplayStore& store) {
  if (store.horizon() != static_cast<int>(rows_.size()))
    throw std::invalid_argument("store and design cache disagree on the horizon");
  Eigen::VectorXd phi(features_->num_features());
  for (; count_ < store.size(); ++count_) {
    const EpisodeLog& ep = store[count_];
    for (std::size_t h = 0; h < rows_.size(); ++h) {
      auto& rows = rows_[h];
      if (static_cast<Eigen::Index>(count_) == rows.rows()) rows.conservativeResize(2 * rows.rows(), Eigen::NoChange);
      features_->row_into(static_cast<int>(h), ep.states[h], ep.actions[h], phi);
      rows.row(static_cast<Eigen::Index>(count_)) = phi.transpose();
      gram_[h].selfadjointView<Eigen::Lower>().rankUpdate(phi);
    }
  }
  for (auto& g : gram_) g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
}

namespace {

/// max_a (Phi_h theta)(s, a), memoized per state for one period.
class NextValueMemo {
 public:
  explicit NextValueMemo(int num_states)
      : value_(static_cast<std::size_t>(num_states)), stamp_(static_cast<std::size_t>(num_states), 0) {}

  void reset() { ++epoch_; }
  double get(const FeatureMap& features, int period, int state, const Eigen::VectorXd& theta) {
    const auto i = static_cast<std::size_t>(state);
    if (stamp_[i] != epoch_) {
      value_[i] = features.q_values(period, state, theta).maxCoeff();
      stamp_[i] = epoch_;
    }
    return value_[i];
  }

 private:
  std::vector<double> value_;
  std::vector<std::size_t> stamp_;
  std::size_t epoch_ = 0;
};

double regression_target(const EpisodeLog& ep, int period, int horizon, TargetRule targets,
                         const std::function<double(int)>& next_value) {
  double target = ep.rewards[static_cast<std::size_t>(period)];
  if (targets == TargetRule::kBootstrapped) {
    target += period == horizon - 1 ? ep.terminal_reward : next_value(ep.states[static_cast<std::size_t>(period) + 1]);
  }
  return target;
}

}  // namespace

RegressionData build_regression(const ReplayStore& store, const FeatureMap& features, int period,
                                const Eigen::VectorXd* next_theta, TargetRule targets) {
  const int H = store.horizon();
  const auto n = static_cast<Eigen::Index>(store.size());
  RegressionData data{Eigen::MatrixXd(n, features.num_features()), Eigen::VectorXd(n)};
  auto next_value = [&](int state) {
    if (next_theta == nullptr) throw std::invalid_argument("bootstrapped targets need next-period coefficients");
    return features.q_values(period + 1, state, *next_theta).maxCoeff();
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    const EpisodeLog& ep = store[static_cast<std::size_t>(i)];
    data.design.row(i) = features.row(period, ep.states[period], ep.actions[period]).transpose();
    data.targets[i] = regression_target(ep, period, H, targets, next_value);
  }
  return data;
}

std::vector<Eigen::VectorXd> plan_value_functions(const ReplayStore& store, const DesignCache& cache,
                                                  const FeatureMap& features, const PlanOptions& options,
                                                  Rng& rng) {
  const int H = store.horizon();
  const int K = features.num_features();
  if (features.horizon() < H) throw std::invalid_argument("feature map does not cover every period");
  std::vector<Eigen::VectorXd> theta(static_cast<std::size_t>(H), Eigen::VectorXd::Zero(K));
  if (store.size() == 0) return theta;
  if (cache.size() != store.size()) throw std::logic_error("design cache is out of sync with the store");

  const auto n = static_cast<Eigen::Index>(store.size());
  NextValueMemo memo(features.num_states());
  Eigen::VectorXd targets(n);
  for (int h = H - 1; h >= 0; --h) {
    memo.reset();
    const Eigen::VectorXd* next = h + 1 < H ? &theta[static_cast<std::size_t>(h) + 1] : nullptr;
    auto next_value = [&](int state) { return memo.get(features, h + 1, state, *next); };
    for (Eigen::Index i = 0; i < n; ++i)
      targets[i] = regression_target(store[static_cast<std::size_t>(i)], h, H, options.targets, next_value);

    const NormalEquations stats{cache.gram(h), cache.design(h).transpose() * targets};
    auto& out = theta[static_cast<std::size_t>(h)];
    switch (options.estimator) {
      case Estimator::kPlainRidge:
        out = plain_ridge(stats, options.lambda);
        break;
      case Estimator::kPosteriorMean:
        out = ridge_posterior(stats, options.sigma, options.lambda).mean;
        break;
      case Estimator::kPosteriorSample:
        out = sample_posterior(ridge_posterior(stats, options.sigma, options.lambda), rng);
        break;
    }
  }
  return theta;
}

namespace {

std::vector<Eigen::VectorXd> plan_once(const ReplayStore& store, const FeatureMap& features,
                                       const PlanOptions& options, Rng& rng) {
  DesignCache cache(features, store.horizon());
  cache.sync(store);
  return plan_value_functions(store, cache, features, options, rng);
}

}  // namespace

std::vector<Eigen::VectorXd> rlsvi_plan(const ReplayStore& store, const FeatureMap& features,
                                        const AgentConfig& config, Rng& rng) {
  return plan_once(store, features,
                   {TargetRule::kBootstrapped, Estimator::kPosteriorSample, config.sigma, config.lambda}, rng);
}

std::vector<Eigen::VectorXd> lsvi_plan(const ReplayStore& store, const FeatureMap& features,
                                       const AgentConfig& config) {
  Rng unused(0);
  return plan_once(store, features,
                   {TargetRule::kBootstrapped, Estimator::kPlainRidge, config.sigma, config.lambda}, unused);
}

std::vector<Eigen::VectorXd> linear_contextual_bandit_plan(const ReplayStore& store,
                                                           const FeatureMap& features,
                                                           const AgentConfig& config, Rng& rng) {
  return plan_once(store, features,
                   {TargetRule::kImmediate, Estimator::kPosteriorSample, config.sigma, config.lambda}, rng);
}

int argmax_uniform(const Eigen::VectorXd& q, Rng& rng) {
  const double best = q.maxCoeff();
  int ties = 0;
  for (Eigen::Index a = 0; a < q.size(); ++a) ties += q[a] == best;
  int pick = ties == 1 ? 0 : uniform_index(ties, rng);
  for (Eigen::Index a = 0; a < q.size(); ++a) {
    if (q[a] == best && pick-- == 0) return static_cast<int>(a);
  }
  return 0;
}

int softmax_sample(const Eigen::VectorXd& q, double eta, Rng& rng) {
  if (!(eta > 0.0)) throw std::invalid_argument("temperature must be positive");
  const double top = q.maxCoeff();
  std::vector<double> weights(static_cast<std::size_t>(q.size()));
  for (Eigen::Index a = 0; a < q.size(); ++a) weights[a] = std::exp((q[a] - top) / eta);
  return sample_categorical(weights, rng);
}

int greedy_act(const Eigen::VectorXd& theta, const FeatureMap& features, int period, int state, Rng& rng) {
  return argmax_uniform(features.q_values(period, state, theta), rng);
}

int boltzmann_act(const Eigen::VectorXd& theta, const FeatureMap& features, int period, int state,
                  double eta, Rng& rng) {
  return softmax_sample(features.q_values(period, state, theta), eta, rng);
}

int epsilon_greedy_act(const Eigen::VectorXd& theta, const FeatureMap& features, int period, int state,
                       double epsilon, Rng& rng) {
  if (uniform01(rng) < epsilon) return uniform_index(features.num_actions(), rng);
  return greedy_act(theta, features, period, state, rng);
}

LinearValueAgent::LinearValueAgent(FeatureMapPtr features, AgentConfig config, std::uint64_t seed)
    : features_(std::move(features)),
      config_(std::move(config)),
      rng_(seed),
      store_(features_->horizon()),
      cache_(*features_, features_->horizon()),
      theta_(static_cast<std::size_t>(features_->horizon()), Eigen::VectorXd::Zero(features_->num_features())) {
  config_.validate();
}

void LinearValueAgent::begin_episode() {
  cache_.sync(store_);
  theta_ = plan_value_functions(store_, cache_, *features_, plan_options(), rng_);
}

void LinearValueAgent::observe(const EpisodeLog& episode) { store_.append(episode); }

int RlsviAgent::act(int period, int state) { return greedy_act(theta_[period], *features_, period, state, rng_); }

PlanOptions RlsviAgent::plan_options() const {
  return {TargetRule::kBootstrapped, Estimator::kPosteriorSample, config_.sigma, config_.lambda};
}

LsviAgent::LsviAgent(FeatureMapPtr features, AgentConfig config, Dithering dithering, std::uint64_t seed)
    : LinearValueAgent(std::move(features), std::move(config), seed), dithering_(dithering) {}

int LsviAgent::act(int period, int state) {
  const auto& theta = theta_[period];
  switch (dithering_) {
    case Dithering::kBoltzmann:
      return boltzmann_act(theta, *features_, period, state, config_.eta, rng_);
    case Dithering::kEpsilonGreedy:
      return epsilon_greedy_act(theta, *features_, period, state, config_.epsilon, rng_);
    case Dithering::kGreedy:
      break;
  }
  return greedy_act(theta, *features_, period, state, rng_);
}

PlanOptions LsviAgent::plan_options() const {
  return {TargetRule::kBootstrapped, Estimator::kPlainRidge, config_.sigma, config_.lambda};
}

int LinearBanditAgent::act(int period, int state) {
  return greedy_act(theta_[period], *features_, period, state, rng_);
}

PlanOptions LinearBanditAgent::plan_options() const {
  return {TargetRule::kImmediate, Estimator::kPosteriorSample, config_.sigma, config_.lambda};
}

IncrementalRlsviAgent::IncrementalRlsviAgent(FeatureMapPtr features, AgentConfig config, std::uint64_t seed)
    : features_(std::move(features)), config_(std::move(config)), rng_(seed) {
  config_.validate();
  const int H = features_->horizon();
  const int K = features_->num_features();
  trackers_.assign(static_cast<std::size_t>(H), PrecisionTracker(K, config_.lambda));
  theta_.assign(static_cast<std::size_t>(H), Eigen::VectorXd::Zero(K));
}

void IncrementalRlsviAgent::begin_episode() {
  if (episodes_ == 0) return;  // theta stays at zero before any data
  for (std::size_t h = 0; h < trackers_.size(); ++h) theta_[h] = sample_posterior(trackers_[h].posterior(), rng_);
}

int IncrementalRlsviAgent::act(int period, int state) {
  return greedy_act(theta_[period], *features_, period, state, rng_);
}

void IncrementalRlsviAgent::observe(const EpisodeLog& episode) {
  const int H = features_->horizon();
  const double nu = config_.decay_at(episodes_);
  for (int h = 0; h < H; ++h) {
    double target = episode.rewards[h];
    if (h == H - 1) {
      target += episode.terminal_reward;
    } else {
      target += features_->q_values(h + 1, episode.states[h + 1], theta_[h + 1]).maxCoeff();
    }
    trackers_[h].update(features_->row(h, episode.states[h], episode.actions[h]), target, config_.sigma, nu);
  }
  ++episodes_;
}

BetaBeliefs BetaBeliefs::uniform(int num_products) {
  return {std::vector<double>(static_cast<std::size_t>(num_products), 1.0),
          std::vector<double>(static_cast<std::size_t>(num_products), 1.0)};
}

void BetaBeliefs::update(int product, bool liked) {
  (liked ? alpha : beta)[static_cast<std::size_t>(product)] += 1.0;
}

std::vector<int> bernoulli_ts_act(const BetaBeliefs& beliefs, int num_recommendations, Rng& rng) {
  const auto N = beliefs.alpha.size();
  std::vector<double> draw(N);
  for (std::size_t n = 0; n < N; ++n) draw[n] = sample_beta(beliefs.alpha[n], beliefs.beta[n], rng);
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return draw[i] > draw[j]; });
  order.resize(static_cast<std::size_t>(num_recommendations));
  return order;
}

BernoulliTsAgent::BernoulliTsAgent(int num_products, int num_recommendations, std::uint64_t seed)
    : num_recommendations_(num_recommendations), beliefs_(BetaBeliefs::uniform(num_products)), rng_(seed) {
  if (num_recommendations < 1 || num_recommendations > num_products)
    throw std::invalid_argument("need 1 <= J <= N");
}

void BernoulliTsAgent::begin_episode() { ranking_ = bernoulli_ts_act(beliefs_, num_recommendations_, rng_); }

int BernoulliTsAgent::act(int period, int) { return ranking_.at(static_cast<std::size_t>(period)); }

void BernoulliTsAgent::observe(const EpisodeLog& episode) {
  for (std::size_t h = 0; h < episode.actions.size(); ++h)
    beliefs_.update(episode.actions[h], episode.rewards[h] > 0.5);
}

int oracle_myopic_act(const RecommendationMDP& recommendation, int state) {
  const auto x = recommendation.context(state);
  int best = -1;
  double best_p = -1.0;
  for (int a = 0; a < recommendation.num_products(); ++a) {
    if (x[a] != 0) continue;
    const double p = recommendation.model().like_probability(x, a);
    if (p > best_p) {
      best = a;
      best_p = p;
    }
  }
  return best < 0 ? 0 : best;
}

Eigen::VectorXd autocorrelated_perturbation(const Eigen::VectorXd& previous, const Eigen::MatrixXd& covariance_factor,
                                            double discount, Rng& rng) {
  const double keep = std::sqrt(1.0 - discount * discount);
  return keep * previous +
         discount * covariance_factor * standard_normal_vector(static_cast<int>(previous.size()), rng);
}

ContinualRlsvi::ContinualRlsvi(FeatureMapPtr features, AgentConfig config, std::uint64_t seed,
                               bool incremental_gram)
    : features_(std::move(features)), config_(std::move(config)), rng_(seed), incremental_gram_(incremental_gram) {
  config_.validate();
  const int K = features_->num_features();
  rows_.resize(0, K);
  gram_ = Eigen::MatrixXd::Zero(K, K);
  theta_ = Eigen::VectorXd::Zero(K);
  perturbation_ = Eigen::VectorXd::Zero(K);
  posterior_ = {Eigen::VectorXd::Zero(K), Eigen::MatrixXd::Identity(K, K) / config_.lambda};
}

int ContinualRlsvi::act(int state) { return greedy_act(theta_, *features_, 0, state, rng_); }

void ContinualRlsvi::step(const Transition& transition) {
  history_.push_back(transition);
  const auto n = static_cast<Eigen::Index>(history_.size());
  const Eigen::VectorXd phi = features_->row(0, transition.state, transition.action);
  rows_.conservativeResize(n, Eigen::NoChange);
  rows_.row(n - 1) = phi.transpose();
  if (incremental_gram_) {
    gram_.noalias() += phi * phi.transpose();
  } else {
    gram_ = rows_.transpose() * rows_;
  }

  Eigen::VectorXd targets(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = history_[static_cast<std::size_t>(i)];
    targets[i] = t.reward + config_.discount * features_->q_values(0, t.next_state, theta_).maxCoeff();
  }
  posterior_ = ridge_posterior(NormalEquations{gram_, rows_.transpose() * targets}, config_.sigma, config_.lambda);
  perturbation_ = autocorrelated_perturbation(perturbation_, cholesky_with_jitter(posterior_.covariance),
                                              config_.discount, rng_);
  theta_ = posterior_.mean + perturbation_;
}

}  // namespace rlsvi
