#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "rlsvi/mdp.hpp"
#include "rlsvi/random.hpp"

namespace rlsvi {

/// Per-period generalization matrices Phi_h with (S*A) rows and K columns.
///
/// Either materialized (one dense matrix per period) or defined by a row
/// generator shared across periods. Row lookup for (s, a) is row s*A + a.
/// Phi_H is identically zero; consumers never query it.
class FeatureMap {
 public:
  using RowGenerator = std::function<void(int period, int state, int action, Eigen::Ref<Eigen::VectorXd> out)>;

  FeatureMap(int num_actions, std::vector<Eigen::MatrixXd> per_period);
  FeatureMap(int num_states, int num_actions, int horizon, int num_features, RowGenerator generator);

  int num_features() const { return num_features_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int horizon() const { return horizon_; }
  bool is_dense() const { return !generator_; }

  Eigen::VectorXd row(int period, int state, int action) const;
  void row_into(int period, int state, int action, Eigen::Ref<Eigen::VectorXd> out) const;

  /// (Phi_h theta)(s, .) as a length-A vector.
  Eigen::VectorXd q_values(int period, int state, const Eigen::VectorXd& theta) const;

  /// Dense Phi_h; generated maps are materialized on demand.
  Eigen::MatrixXd matrix(int period) const;

 private:
  int num_states_;
  int num_actions_;
  int horizon_;
  int num_features_;
  std::vector<Eigen::MatrixXd> per_period_;
  RowGenerator generator_;
};

using FeatureMapPtr = std::shared_ptr<const FeatureMap>;

/// Column 1 = Q*_h, column 2 = ones, columns 3..K ~ N(0, I); fresh per period.
FeatureMap coherent_basis(const ValueFunctions& q_star, int num_features, Rng& rng);

/// Column 1 = ones, columns 2..K = Q*_h + rho * N(0, I).
FeatureMap agnostic_basis(const ValueFunctions& q_star, int num_features, double rho, Rng& rng);

/// phi_m(x, a) = 1{a = m} at index m, phi_mn(x, a) = x_n 1{a = m} at index
/// N + m*N + n. `contexts` maps a state index to its ternary vector.
FeatureMap recommendation_basis(int num_products, int num_states, int horizon,
                                std::function<std::span<const std::int8_t>(int)> contexts);

/// Phi_h = I for every period (K = S*A).
FeatureMap identity_basis(int num_states, int num_actions, int horizon);

/// sqrt(sum_h min_theta ||Q*_h - Phi_h theta||^2) / sqrt(sum_h ||Q*_h||^2).
double normalized_distance(const ValueFunctions& q_star, const FeatureMap& features);

}  // namespace rlsvi
