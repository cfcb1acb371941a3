#include "rlsvi/random.hpp"

#include <numeric>
#include <stdexcept>

namespace rlsvi {

double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

double uniform01(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

int uniform_index(int n, Rng& rng) {
  std::uniform_int_distribution<int> dist(0, n - 1);
  return dist(rng);
}

Eigen::VectorXd standard_normal_vector(int size, Rng& rng) {
  Eigen::VectorXd z(size);
  for (int i = 0; i < size; ++i) z[i] = standard_normal(rng);
  return z;
}

double sample_gamma(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(rng);
}

double sample_beta(double a, double b, Rng& rng) {
  const double x = sample_gamma(a, rng);
  const double y = sample_gamma(b, rng);
  return x / (x + y);
}

std::vector<double> sample_dirichlet(std::span<const double> concentration, Rng& rng) {
  std::vector<double> p(concentration.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = sample_gamma(concentration[i], rng);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

int sample_categorical(std::span<const double> weights, Rng& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("categorical weights must have positive mass");
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return static_cast<int>(i);
  }
  // Roundoff: return the last index with positive weight.
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return static_cast<int>(i);
  return 0;
}

}  // namespace rlsvi
