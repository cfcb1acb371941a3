#include "rlsvi/optimism.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

namespace rlsvi {

void DirichletSpec::validate() const {
  if (values.empty() || values.size() != concentration.size())
    throw std::invalid_argument("Dirichlet spec needs matching nonempty values and concentration");
  for (double v : values)
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("values must lie in [0, 1]");
  for (double a : concentration)
    if (!(a >= 1.0)) throw std::invalid_argument("concentration must be >= 1");
}

double DirichletSpec::total_concentration() const {
  return std::accumulate(concentration.begin(), concentration.end(), 0.0);
}

double DirichletSpec::mean() const {
  return std::inner_product(concentration.begin(), concentration.end(), values.begin(), 0.0) /
         total_concentration();
}

MonteCarloEstimate check_optimism(const OptimismPair& pair, const ScalarSampler& z, int n_mc, Rng& rng) {
  if (n_mc < 2) throw std::invalid_argument("need at least two Monte-Carlo replicates");
  double mean = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < n_mc; ++i) {
    const double zi = z(rng);
    const double x = pair.sampler_x(rng);
    const double y = pair.sampler_y(rng);
    const double d = std::max(x, zi) - std::max(y, zi);
    const double delta = d - mean;
    mean += delta / (i + 1);
    m2 += delta * (d - mean);
  }
  const double variance = m2 / (n_mc - 1);
  return {mean, std::sqrt(variance / n_mc)};
}

OptimismPair gaussian_dirichlet_pair(const DirichletSpec& spec) {
  spec.validate();
  const double mu = spec.mean();
  const double sd = 1.0 / std::sqrt(spec.total_concentration());
  return {
      [mu, sd](Rng& rng) { return mu + sd * standard_normal(rng); },
      [spec](Rng& rng) {
        const auto p = sample_dirichlet(spec.concentration, rng);
        return std::inner_product(p.begin(), p.end(), spec.values.begin(), 0.0);
      },
      "gaussian-vs-dirichlet",
  };
}

BetaParameters beta_projection(const DirichletSpec& spec) {
  spec.validate();
  const auto& v = spec.values;
  if (!std::is_sorted(v.begin(), v.end())) throw std::invalid_argument("values must be sorted ascending");
  const double lo = v.front();
  const double hi = v.back();
  if (!(hi > lo)) throw std::invalid_argument("beta projection needs v_d > v_1");
  BetaParameters out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.alpha += spec.concentration[i] * (v[i] - lo) / (hi - lo);
    out.beta += spec.concentration[i] * (hi - v[i]) / (hi - lo);
  }
  return out;
}

double beta_cdf(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

CrossingResult single_crossing_check(double alpha, double beta, int grid_size) {
  if (!(alpha > 0.0 && beta > 0.0)) throw std::invalid_argument("alpha and beta must be positive");
  if (grid_size < 2) throw std::invalid_argument("grid needs at least two points");
  const double mu = alpha / (alpha + beta);
  const double sd = 1.0 / std::sqrt(alpha + beta);
  CrossingResult result;
  result.grid.resize(static_cast<std::size_t>(grid_size));
  result.difference.resize(static_cast<std::size_t>(grid_size));
  int last_sign = 0;
  for (int i = 0; i < grid_size; ++i) {
    const double x = (i + 1.0) / (grid_size + 1.0);
    const double d = normal_cdf(x, mu, sd) - beta_cdf(x, alpha, beta);
    result.grid[i] = x;
    result.difference[i] = d;
    if (std::abs(d) <= 1e-9) continue;
    const int sign = d > 0.0 ? 1 : -1;
    if (last_sign != 0 && sign != last_sign) ++result.sign_changes;
    last_sign = sign;
  }
  return result;
}

namespace {

double two_sided_tail(double gamma) { return std::erfc(gamma / std::sqrt(2.0)); }
double tail_bound(double gamma) { return 0.5 * std::exp(-0.5 * gamma * gamma); }

}  // namespace

TailCheckResult gaussian_tail_check(const std::vector<double>& gamma_grid, int n_mc, Rng& rng) {
  TailCheckResult result;
  std::vector<double> grid = gamma_grid;
  std::sort(grid.begin(), grid.end());
  for (double g : grid) {
    if (!(g >= 0.0)) throw std::invalid_argument("gamma grid must be nonnegative");
    result.rows.push_back({g, two_sided_tail(g), 0.0, tail_bound(g)});
  }
  if (n_mc > 0) {
    std::vector<long long> exceed(grid.size(), 0);
    for (int i = 0; i < n_mc; ++i) {
      const double x = std::abs(standard_normal(rng));
      // grid sorted: x exceeds a prefix of it
      for (std::size_t j = 0; j < grid.size() && x > grid[j]; ++j) ++exceed[j];
    }
    for (std::size_t j = 0; j < grid.size(); ++j) result.rows[j].mc_tail = static_cast<double>(exceed[j]) / n_mc;
  }

  result.crossover = grid.empty() ? 0.0 : grid.back();
  result.worst_slack = grid.empty() ? 0.0 : result.rows.back().slack();
  for (std::size_t j = result.rows.size(); j-- > 0;) {
    if (result.rows[j].slack() < 0.0) break;
    result.crossover = result.rows[j].gamma;
    result.worst_slack = std::min(result.worst_slack, result.rows[j].slack());
  }
  return result;
}

double gaussian_tail_crossover(double lo, double hi) {
  auto gap = [](double g) { return tail_bound(g) - two_sided_tail(g); };
  if (gap(lo) >= 0.0 || gap(hi) < 0.0) throw std::invalid_argument("bracket does not contain the crossover");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < 0.0 ? lo : hi) = mid;
  }
  return hi;
}

double normal_hazard(double x) {
  const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  const double survival = 0.5 * std::erfc(x / std::sqrt(2.0));
  return density / survival;
}

TruncatedMeanResult truncated_mean_check(const std::vector<double>& lambda_grid) {
  TruncatedMeanResult result;
  result.worst_slack = std::numeric_limits<double>::infinity();
  for (double l : lambda_grid) {
    if (!(l > 1.0)) throw std::invalid_argument("truncation points must exceed 1");
    TruncatedMeanRow row{l, normal_hazard(l)};
    result.worst_slack = std::min(result.worst_slack, row.slack());
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace rlsvi
