#include "rlsvi/features.hpp"

#include <cmath>
#include <stdexcept>

namespace rlsvi {

FeatureMap::FeatureMap(int num_actions, std::vector<Eigen::MatrixXd> per_period)
    : num_states_(0),
      num_actions_(num_actions),
      horizon_(static_cast<int>(per_period.size())),
      num_features_(0),
      per_period_(std::move(per_period)) {
  if (per_period_.empty()) throw std::invalid_argument("feature map needs at least one period");
  if (num_actions < 1 || per_period_.front().rows() % num_actions != 0)
    throw std::invalid_argument("feature rows must be S*A");
  num_states_ = static_cast<int>(per_period_.front().rows() / num_actions);
  num_features_ = static_cast<int>(per_period_.front().cols());
  for (const auto& phi : per_period_)
    if (phi.rows() != per_period_.front().rows() || phi.cols() != num_features_)
      throw std::invalid_argument("all periods must share the same shape");
}

FeatureMap::FeatureMap(int num_states, int num_actions, int horizon, int num_features,
                       RowGenerator generator)
    : num_states_(num_states),
      num_actions_(num_actions),
      horizon_(horizon),
      num_features_(num_features),
      generator_(std::move(generator)) {
  if (!generator_) throw std::invalid_argument("row generator must be callable");
}

void FeatureMap::row_into(int period, int state, int action, Eigen::Ref<Eigen::VectorXd> out) const {
  if (generator_) {
    generator_(period, state, action, out);
  } else {
    out = per_period_[static_cast<std::size_t>(period)].row(state * num_actions_ + action).transpose();
  }
}

Eigen::VectorXd FeatureMap::row(int period, int state, int action) const {
  Eigen::VectorXd out(num_features_);
  row_into(period, state, action, out);
  return out;
}

Eigen::VectorXd FeatureMap::q_values(int period, int state, const Eigen::VectorXd& theta) const {
  if (!generator_)
    return per_period_[static_cast<std::size_t>(period)].middleRows(state * num_actions_, num_actions_) * theta;
  Eigen::VectorXd q(num_actions_);
  Eigen::VectorXd phi(num_features_);
  for (int a = 0; a < num_actions_; ++a) {
    generator_(period, state, a, phi);
    q[a] = phi.dot(theta);
  }
  return q;
}

Eigen::MatrixXd FeatureMap::matrix(int period) const {
  if (!generator_) return per_period_[static_cast<std::size_t>(period)];
  Eigen::MatrixXd phi(num_states_ * num_actions_, num_features_);
  Eigen::VectorXd row(num_features_);
  for (int s = 0; s < num_states_; ++s) {
    for (int a = 0; a < num_actions_; ++a) {
      generator_(period, s, a, row);
      phi.row(s * num_actions_ + a) = row.transpose();
    }
  }
  return phi;
}

namespace {

Eigen::VectorXd q_column(const ValueFunctions& q_star, int period) {
  const auto q = q_star.q_period(period);
  return Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()));
}

}  // namespace

FeatureMap coherent_basis(const ValueFunctions& q_star, int num_features, Rng& rng) {
  if (num_features < 2) throw std::invalid_argument("coherent basis needs K >= 2");
  const int rows = q_star.num_states() * q_star.num_actions();
  std::vector<Eigen::MatrixXd> phis;
  for (int h = 0; h < q_star.horizon(); ++h) {
    Eigen::MatrixXd phi(rows, num_features);
    phi.col(0) = q_column(q_star, h);
    phi.col(1).setOnes();
    for (int k = 2; k < num_features; ++k)
      for (int i = 0; i < rows; ++i) phi(i, k) = standard_normal(rng);
    phis.push_back(std::move(phi));
  }
  return FeatureMap(q_star.num_actions(), std::move(phis));
}

FeatureMap agnostic_basis(const ValueFunctions& q_star, int num_features, double rho, Rng& rng) {
  if (num_features < 1) throw std::invalid_argument("agnostic basis needs K >= 1");
  if (!(rho >= 0.0)) throw std::invalid_argument("rho must be nonnegative");
  const int rows = q_star.num_states() * q_star.num_actions();
  std::vector<Eigen::MatrixXd> phis;
  for (int h = 0; h < q_star.horizon(); ++h) {
    const Eigen::VectorXd q = q_column(q_star, h);
    Eigen::MatrixXd phi(rows, num_features);
    phi.col(0).setOnes();
    for (int k = 1; k < num_features; ++k) {
      for (int i = 0; i < rows; ++i) phi(i, k) = q[i] + rho * standard_normal(rng);
    }
    phis.push_back(std::move(phi));
  }
  return FeatureMap(q_star.num_actions(), std::move(phis));
}

FeatureMap recommendation_basis(int num_products, int num_states, int horizon,
                                std::function<std::span<const std::int8_t>(int)> contexts) {
  const int N = num_products;
  return FeatureMap(num_states, N, horizon, N * N + N,
                    [N, contexts = std::move(contexts)](int, int state, int action,
                                                        Eigen::Ref<Eigen::VectorXd> out) {
                      out.setZero();
                      out[action] = 1.0;
                      const auto x = contexts(state);
                      for (int n = 0; n < N; ++n) out[N + action * N + n] = x[n];
                    });
}

FeatureMap identity_basis(int num_states, int num_actions, int horizon) {
  const int K = num_states * num_actions;
  return FeatureMap(num_actions,
                    std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(horizon),
                                                 Eigen::MatrixXd::Identity(K, K)));
}

double normalized_distance(const ValueFunctions& q_star, const FeatureMap& features) {
  if (features.horizon() < q_star.horizon())
    throw std::invalid_argument("feature map does not cover every period");
  double residual = 0.0;
  double norm = 0.0;
  for (int h = 0; h < q_star.horizon(); ++h) {
    const Eigen::VectorXd q = q_column(q_star, h);
    const Eigen::MatrixXd phi = features.matrix(h);
    const Eigen::VectorXd theta = phi.completeOrthogonalDecomposition().solve(q);
    residual += (q - phi * theta).squaredNorm();
    norm += q.squaredNorm();
  }
  if (norm == 0.0) throw std::domain_error("normalized distance undefined for Q* = 0");
  return std::sqrt(residual / norm);
}

}  // namespace rlsvi
