#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rlsvi/random.hpp"

namespace rlsvi {

using ScalarSampler = std::function<double(Rng&)>;

/// Two scalar laws to be compared under stochastic optimism (x over y).
struct OptimismPair {
  ScalarSampler sampler_x;
  ScalarSampler sampler_y;
  std::string description;
};

/// v in [0,1]^N and concentration alpha in [1, inf)^N.
struct DirichletSpec {
  std::vector<double> values;
  std::vector<double> concentration;

  void validate() const;
  double mean() const;  // alpha^T v / alpha^T 1
  double total_concentration() const;
};

struct MonteCarloEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Estimates E[max(x, z)] - E[max(y, z)]. Both arms see the same z draw in
/// each replicate, so the standard error is that of the paired differences.
MonteCarloEstimate check_optimism(const OptimismPair& pair, const ScalarSampler& z, int n_mc, Rng& rng);

/// x ~ N(alpha^T v / alpha^T 1, 1 / alpha^T 1) against y = p^T v, p ~ Dirichlet(alpha).
OptimismPair gaussian_dirichlet_pair(const DirichletSpec& spec);

struct BetaParameters {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Matched Beta law on {v_1, v_d} for a Dirichlet-weighted average of sorted
/// values: alpha~ = sum alpha_i (v_i - v_1)/(v_d - v_1),
/// beta~ = sum alpha_i (v_d - v_i)/(v_d - v_1).
BetaParameters beta_projection(const DirichletSpec& spec);

/// Regularized incomplete beta I_x(a, b).
double beta_cdf(double x, double a, double b);
double normal_cdf(double x, double mean, double sd);

struct CrossingResult {
  int sign_changes = 0;
  std::vector<double> grid;
  std::vector<double> difference;  // F_Gaussian - F_Beta on the grid
};

/// Counts sign changes of F_N - F_Beta on a uniform interior grid of (0, 1),
/// with N ~ N(a/(a+b), 1/(a+b)). Values within 1e-9 of zero are skipped.
CrossingResult single_crossing_check(double alpha, double beta, int grid_size);

struct TailCheckRow {
  double gamma = 0.0;
  double exact_tail = 0.0;  // P(|X| > gamma), X ~ N(0, 1)
  double mc_tail = 0.0;
  double bound = 0.0;       // exp(-gamma^2 / 2) / 2
  double slack() const { return bound - exact_tail; }
};

struct TailCheckResult {
  std::vector<TailCheckRow> rows;
  /// Smallest grid point from which the bound holds for every larger grid point.
  double crossover = 0.0;
  /// min over rows at or beyond the crossover of (bound - tail).
  double worst_slack = 0.0;
};

TailCheckResult gaussian_tail_check(const std::vector<double>& gamma_grid, int n_mc, Rng& rng);

/// gamma where erfc(gamma / sqrt 2) = exp(-gamma^2 / 2) / 2, by bisection on [lo, hi].
double gaussian_tail_crossover(double lo = 0.5, double hi = 3.0);

struct TruncatedMeanRow {
  double lambda = 0.0;
  double conditional_mean = 0.0;  // phi(l) / (1 - Phi(l))
  double slack() const { return lambda + 1.0 - conditional_mean; }
};

struct TruncatedMeanResult {
  std::vector<TruncatedMeanRow> rows;
  double worst_slack = 0.0;
};

/// E[X | X > l] for X ~ N(0, 1) against l + 1.
TruncatedMeanResult truncated_mean_check(const std::vector<double>& lambda_grid);

double normal_hazard(double x);

}  // namespace rlsvi
