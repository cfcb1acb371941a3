#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rlsvi {

/// Generator used everywhere. Every stochastic routine takes one by reference
/// and never touches global state, so a fixed seed reproduces a run exactly.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double standard_normal(Rng& rng);
double uniform01(Rng& rng);
int uniform_index(int n, Rng& rng);

Eigen::VectorXd standard_normal_vector(int size, Rng& rng);

/// Gamma(shape, 1).
double sample_gamma(double shape, Rng& rng);
double sample_beta(double a, double b, Rng& rng);

/// Dirichlet draw built from normalized unit-scale Gamma variates.
std::vector<double> sample_dirichlet(std::span<const double> concentration, Rng& rng);

/// Index drawn from an (unnormalized, nonnegative) weight vector.
int sample_categorical(std::span<const double> weights, Rng& rng);

}  // namespace rlsvi
