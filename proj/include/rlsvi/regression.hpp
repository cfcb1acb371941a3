#pragma once

#include <Eigen/Dense>

#include "rlsvi/random.hpp"

namespace rlsvi {

/// Design matrix A (n x K) and targets b (n). n may be zero.
struct RegressionData {
  Eigen::MatrixXd design;
  Eigen::VectorXd targets;
};

/// Sufficient statistics A^T A and A^T b of a regression problem.
struct NormalEquations {
  Eigen::MatrixXd gram;
  Eigen::VectorXd moment;

  static NormalEquations from(const RegressionData& data);
  static NormalEquations empty(int num_features);
};

/// N(mean, covariance) over value-function coefficients.
struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// mean = (1/s^2) ((1/s^2) A^T A + l I)^{-1} A^T b, covariance = ((1/s^2) A^T A + l I)^{-1}.
GaussianPosterior ridge_posterior(const RegressionData& data, double sigma, double lambda);
GaussianPosterior ridge_posterior(const NormalEquations& stats, double sigma, double lambda);

/// (A^T A + l I)^{-1} A^T b.
Eigen::VectorXd plain_ridge(const RegressionData& data, double lambda);
Eigen::VectorXd plain_ridge(const NormalEquations& stats, double lambda);

/// Lower Cholesky factor of an SPD matrix. On failure, adds
/// 1e-10 * (trace / K) * I and retries with 10x escalation, three times at most.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& spd);

/// mean + L z with L L^T = covariance and z ~ N(0, I).
Eigen::VectorXd sample_posterior(const GaussianPosterior& posterior, Rng& rng);

/// Running precision matrix and moment vector with exponential forgetting:
///   P <- (1 - nu) P + (1/s^2) phi phi^T,   y <- (1 - nu) y + (1/s^2) target phi.
/// Starts at P = lambda I, y = 0.
class PrecisionTracker {
 public:
  PrecisionTracker(int num_features, double lambda);

  void update(const Eigen::VectorXd& row, double target, double sigma, double decay);

  const Eigen::MatrixXd& precision() const { return precision_; }
  const Eigen::VectorXd& moment() const { return moment_; }

  /// mean = P^{-1} y, covariance = P^{-1}.
  GaussianPosterior posterior() const;

 private:
  Eigen::MatrixXd precision_;
  Eigen::VectorXd moment_;
};

}  // namespace rlsvi
