#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "helpers.hpp"
#include "rlsvi/optimism.hpp"

using namespace rlsvi;

namespace {

ScalarSampler normal(double mean, double sd) {
  return [=](Rng& rng) { return mean + sd * standard_normal(rng); };
}

DirichletSpec random_spec(int n, Rng& rng) {
  DirichletSpec spec;
  for (int i = 0; i < n; ++i) {
    spec.values.push_back(uniform01(rng));
    spec.concentration.push_back(1.0 + 9.0 * uniform01(rng));
  }
  return spec;
}

}  // namespace

TEST_CASE("a law is optimistic over itself") {
  Rng rng(1);
  const OptimismPair same{normal(0.3, 1.0), normal(0.3, 1.0), "same"};
  const auto est = check_optimism(same, normal(0.0, 1.0), 100000, rng);
  CHECK(std::abs(est.value) <= 3.0 * est.standard_error);
}

TEST_CASE("wider Gaussian is optimistic, matching the closed form") {
  Rng rng(2);
  // E[max(X, Z)] = sd(X - Z) / sqrt(2 pi) for centered independent Gaussians
  const double expected = (std::sqrt(3.0) - std::sqrt(2.0)) / std::sqrt(2.0 * std::numbers::pi);
  const OptimismPair pair{normal(0.0, std::sqrt(2.0)), normal(0.0, 1.0), "wide"};
  const auto est = check_optimism(pair, normal(0.0, 1.0), 200000, rng);
  CHECK(est.value > 0.0);
  CHECK(std::abs(est.value - expected) <= 3.0 * est.standard_error);
  CHECK_THROWS_AS(check_optimism(pair, normal(0.0, 1.0), 1, rng), std::invalid_argument);
}

TEST_CASE("Gaussian dominates the Dirichlet average for degenerate specs") {
  Rng rng(3);
  DirichletSpec flat{{0.4, 0.4, 0.4}, {2.0, 3.0, 5.0}};
  const auto pair = gaussian_dirichlet_pair(flat);
  for (int i = 0; i < 100; ++i) CHECK(pair.sampler_y(rng) == doctest::Approx(0.4).epsilon(1e-12));
  auto est = check_optimism(pair, normal(0.4, 0.2), 100000, rng);
  CHECK(est.value >= -3.0 * est.standard_error);

  DirichletSpec one{{0.7}, {4.0}};
  const auto single = gaussian_dirichlet_pair(one);
  for (int i = 0; i < 100; ++i) CHECK(single.sampler_y(rng) == doctest::Approx(0.7).epsilon(1e-12));
  est = check_optimism(single, normal(0.5, 1.0), 100000, rng);
  CHECK(est.value >= -3.0 * est.standard_error);
}

TEST_CASE("Gaussian-Dirichlet pair moments") {
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    const auto spec = random_spec(2 + k % 4, rng);
    const double a0 = spec.total_concentration();
    double m = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
      m += spec.concentration[i] * spec.values[i] / a0;
      m2 += spec.concentration[i] * spec.values[i] * spec.values[i] / a0;
    }
    CHECK(spec.mean() == doctest::Approx(m).epsilon(1e-12));
    const double var_y = (m2 - m * m) / (a0 + 1.0);
    const auto pair = gaussian_dirichlet_pair(spec);
    std::vector<double> xs, ys, dx, dy;
    for (int i = 0; i < 40000; ++i) {
      xs.push_back(pair.sampler_x(rng));
      ys.push_back(pair.sampler_y(rng));
      dx.push_back((xs.back() - m) * (xs.back() - m));
      dy.push_back((ys.back() - m) * (ys.back() - m));
    }
    const auto mx = testing::moments(xs), my = testing::moments(ys);
    const auto vx = testing::moments(dx), vy = testing::moments(dy);
    CHECK(std::abs(mx.mean - m) <= 3.5 * mx.se);
    CHECK(std::abs(my.mean - m) <= 3.5 * my.se);
    CHECK(std::abs(vx.mean - 1.0 / a0) <= 3.5 * vx.se);
    CHECK(std::abs(vy.mean - var_y) <= 3.5 * vy.se);
  }
}

TEST_CASE("beta projection") {
  const auto two = beta_projection({{0.2, 0.9}, {3.0, 5.0}});
  CHECK(two.alpha == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(two.beta == doctest::Approx(3.0).epsilon(1e-14));

  const auto three = beta_projection({{0.0, 0.5, 1.0}, {2.0, 4.0, 6.0}});
  CHECK(three.alpha == doctest::Approx(8.0));
  CHECK(three.beta == doctest::Approx(4.0));
  CHECK(three.alpha + three.beta == doctest::Approx(12.0));

  CHECK_THROWS_AS(beta_projection({{0.5, 0.5}, {1.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(beta_projection({{0.9, 0.1}, {1.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(DirichletSpec({{0.5}, {0.5}}).validate(), std::invalid_argument);
}

TEST_CASE("single crossing of the matched Gaussian and Beta CDFs") {
  const auto uniform = single_crossing_check(1.0, 1.0, 999);
  CHECK(uniform.sign_changes == 1);
  for (double ab : {2.0, 5.0, 17.0}) {
    const auto r = single_crossing_check(ab, ab, 1000);
    const std::size_t n = r.grid.size();
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(r.grid[i] + r.grid[n - 1 - i] == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(r.difference[i] + r.difference[n - 1 - i]) <= 1e-12);
    }
  }
  CHECK(single_crossing_check(3.0, 8.0, 1000).sign_changes <= 1);
  CHECK_THROWS_AS(single_crossing_check(0.0, 1.0, 10), std::invalid_argument);
}

TEST_CASE("incomplete beta agrees with quadrature") {
  boost::math::quadrature::tanh_sinh<double> integrator;
  Rng rng(5);
  for (int i = 0; i < 30; ++i) {
    const double a = 1.0 + 20.0 * uniform01(rng), b = 1.0 + 20.0 * uniform01(rng);
    const double x = 0.02 + 0.96 * uniform01(rng);
    const double norm = boost::math::beta(a, b);
    const auto density = [&](double t) { return std::pow(t, a - 1.0) * std::pow(1.0 - t, b - 1.0) / norm; };
    const double q = integrator.integrate(density, 0.0, x);
    CHECK(beta_cdf(x, a, b) == doctest::Approx(q).epsilon(1e-10));
  }
  CHECK(beta_cdf(0.3, 1.0, 1.0) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("Gaussian tail bound") {
  Rng rng(6);
  const auto result = gaussian_tail_check({0.0, 2.0, 3.0}, 200000, rng);
  const auto& at0 = result.rows[0];
  CHECK(at0.exact_tail == doctest::Approx(1.0));
  CHECK(at0.slack() < 0.0);
  const auto& at2 = result.rows[1];
  CHECK(at2.exact_tail == doctest::Approx(0.0455003).epsilon(1e-5));
  CHECK(at2.bound == doctest::Approx(0.0676676).epsilon(1e-5));
  CHECK(std::abs(at2.mc_tail - at2.exact_tail) <= 3.0 * testing::binomial_se(at2.exact_tail, 200000));
  CHECK(result.rows[2].exact_tail == doctest::Approx(0.0026998).epsilon(1e-4));
  CHECK(result.rows[2].slack() > 0.0);
  CHECK(result.crossover == 2.0);

  const double g = gaussian_tail_crossover();
  CHECK(std::erfc(g / std::sqrt(2.0)) == doctest::Approx(0.5 * std::exp(-0.5 * g * g)).epsilon(1e-9));
  CHECK(g < std::sqrt(4.0 * std::log(2.0)));
}

TEST_CASE("truncated Gaussian mean and hazard") {
  CHECK(normal_hazard(2.0) == doctest::Approx(2.373216).epsilon(1e-6));
  CHECK(normal_hazard(10.0) == doctest::Approx(10.098093).epsilon(1e-6));
  const auto r = truncated_mean_check({1.5, 3.0, 8.0});
  for (const auto& row : r.rows) {
    CHECK(row.conditional_mean == doctest::Approx(normal_hazard(row.lambda)));
    CHECK(row.slack() > 0.0);
  }
  CHECK(r.worst_slack == doctest::Approx(std::min({r.rows[0].slack(), r.rows[1].slack(), r.rows[2].slack()})));
  CHECK_THROWS_AS(truncated_mean_check({0.5}), std::invalid_argument);
}
