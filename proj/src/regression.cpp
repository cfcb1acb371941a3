#include "rlsvi/regression.hpp"

#include <stdexcept>

namespace rlsvi {
namespace {

void check_finite(const RegressionData& data) {
  if (data.design.rows() != data.targets.size())
    throw std::invalid_argument("design rows must match target length");
  if (!data.design.allFinite() || !data.targets.allFinite())
    throw std::invalid_argument("regression data contains non-finite entries");
}

void check_positive(double value, const char* what) {
  if (!(value > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

/// Factorizes an SPD system matrix, applying the same jitter schedule as
/// `cholesky_with_jitter`.
Eigen::LLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& spd) {
  Eigen::LLT<Eigen::MatrixXd> llt(spd);
  if (llt.info() == Eigen::Success) return llt;
  const double scale = spd.trace() / static_cast<double>(spd.rows());
  double jitter = 1e-10 * scale;
  for (int attempt = 0; attempt < 3; ++attempt, jitter *= 10.0) {
    Eigen::MatrixXd shifted = spd;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw std::runtime_error("Cholesky factorization failed after jitter escalation");
}

}  // namespace

NormalEquations NormalEquations::from(const RegressionData& data) {
  check_finite(data);
  NormalEquations stats;
  stats.gram = data.design.transpose() * data.design;
  stats.moment = data.design.transpose() * data.targets;
  return stats;
}

NormalEquations NormalEquations::empty(int num_features) {
  return {Eigen::MatrixXd::Zero(num_features, num_features), Eigen::VectorXd::Zero(num_features)};
}

GaussianPosterior ridge_posterior(const NormalEquations& stats, double sigma, double lambda) {
  check_positive(sigma, "sigma");
  check_positive(lambda, "lambda");
  const double inv_var = 1.0 / (sigma * sigma);
  const auto K = stats.gram.rows();
  Eigen::MatrixXd precision = inv_var * stats.gram;
  precision.diagonal().array() += lambda;
  const auto llt = factorize(precision);

  GaussianPosterior post;
  post.mean = llt.solve(inv_var * stats.moment);
  post.covariance = llt.solve(Eigen::MatrixXd::Identity(K, K));
  post.covariance = 0.5 * (post.covariance + post.covariance.transpose()).eval();
  return post;
}

GaussianPosterior ridge_posterior(const RegressionData& data, double sigma, double lambda) {
  return ridge_posterior(NormalEquations::from(data), sigma, lambda);
}

Eigen::VectorXd plain_ridge(const NormalEquations& stats, double lambda) {
  check_positive(lambda, "lambda");
  Eigen::MatrixXd system = stats.gram;
  system.diagonal().array() += lambda;
  return factorize(system).solve(stats.moment);
}

Eigen::VectorXd plain_ridge(const RegressionData& data, double lambda) {
  return plain_ridge(NormalEquations::from(data), lambda);
}

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& spd) {
  return factorize(spd).matrixL();
}

Eigen::VectorXd sample_posterior(const GaussianPosterior& posterior, Rng& rng) {
  const Eigen::MatrixXd factor = cholesky_with_jitter(posterior.covariance);
  return posterior.mean + factor * standard_normal_vector(static_cast<int>(posterior.mean.size()), rng);
}

PrecisionTracker::PrecisionTracker(int num_features, double lambda)
    : precision_(lambda * Eigen::MatrixXd::Identity(num_features, num_features)),
      moment_(Eigen::VectorXd::Zero(num_features)) {
  check_positive(lambda, "lambda");
}

void PrecisionTracker::update(const Eigen::VectorXd& row, double target, double sigma, double decay) {
  check_positive(sigma, "sigma");
  if (decay < 0.0 || decay > 1.0) throw std::invalid_argument("decay must lie in [0, 1]");
  const double inv_var = 1.0 / (sigma * sigma);
  precision_ *= (1.0 - decay);
  precision_.noalias() += inv_var * row * row.transpose();
  moment_ = (1.0 - decay) * moment_ + inv_var * target * row;
}

GaussianPosterior PrecisionTracker::posterior() const {
  const auto llt = factorize(precision_);
  GaussianPosterior post;
  post.mean = llt.solve(moment_);
  post.covariance = llt.solve(Eigen::MatrixXd::Identity(precision_.rows(), precision_.cols()));
  post.covariance = 0.5 * (post.covariance + post.covariance.transpose()).eval();
  return post;
}

}  // namespace rlsvi
