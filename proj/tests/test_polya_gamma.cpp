#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "cobay/common.hpp"
#include "cobay/polya_gamma.hpp"
#include "test_util.hpp"

using cobay::Rng;
using cobay::pg_log_tilt;
using cobay::pg_mean;
using cobay::pg_sample;

namespace {

// Var[PG(1, c)] = (sinh(c) - c) / (4 c^3 cosh^2(c/2)), with limit 1/24 at 0.
double pg_var(double c) {
  if (std::abs(c) < 1e-6) return 1.0 / 24.0;
  return (std::sinh(c) - c) / (4.0 * c * c * c * std::cosh(0.5 * c) * std::cosh(0.5 * c));
}

// Test-only oracle: truncated sum-of-gammas representation of PG(1, c),
// omega = (1 / 2 pi^2) sum_k g_k / ((k - 1/2)^2 + c^2 / (4 pi^2)).
double pg_oracle(double c, int terms, Rng& rng) {
  constexpr double kPi = 3.141592653589793238462643383279502884;
  std::exponential_distribution<double> g(1.0);
  const double shift = c * c / (4.0 * kPi * kPi);
  double sum = 0.0;
  for (int k = 1; k <= terms; ++k) {
    const double d = static_cast<double>(k) - 0.5;
    sum += g(rng) / (d * d + shift);
  }
  return sum / (2.0 * kPi * kPi);
}

std::vector<double> draw_batch(double c, std::size_t n, std::uint64_t seed) {
  Rng rng = cobay::make_rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = pg_sample(c, rng);
  return out;
}

}  // namespace

TEST_CASE("pg_mean evaluates the moment identity") {
  CHECK(pg_mean(0.0) == Catch::Approx(0.25).epsilon(1e-15));
  CHECK(pg_mean(0.5) == Catch::Approx(0.24491866240370913).epsilon(1e-13));
  CHECK(pg_mean(2.0) == Catch::Approx(0.1903985389889412).epsilon(1e-13));
  CHECK(pg_mean(5.0) == Catch::Approx(0.09866142981514303).epsilon(1e-13));
  CHECK(pg_mean(-2.0) == pg_mean(2.0));

  // The series branch must join the closed form smoothly.
  CHECK(pg_mean(9e-5) == Catch::Approx(std::tanh(4.5e-5) / 1.8e-4).epsilon(1e-12));
}

TEST_CASE("pg_log_tilt matches the hand-computed values") {
  CHECK(pg_log_tilt(1.0, 0.0) == Catch::Approx(-std::log(2.0)).epsilon(1e-15));
  CHECK(pg_log_tilt(0.5, 2.0) == Catch::Approx(-std::log(2.0)).epsilon(1e-15));

  Rng rng = cobay::make_rng(8);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double omega = u(rng);
    const double z = u(rng) - 1.5;
    CHECK(pg_log_tilt(omega, z) - pg_log_tilt(omega, -z) == Catch::Approx(z).margin(1e-13));
  }
  CHECK_THROWS_AS(pg_log_tilt(-0.1, 1.0), std::invalid_argument);
}

TEST_CASE("pg samples are strictly positive and deterministic") {
  for (double c : {0.0, 0.5, -2.0, 7.0}) {
    Rng rng = cobay::make_rng(21);
    for (int i = 0; i < 5000; ++i) CHECK(pg_sample(c, rng) > 0.0);
  }
  CHECK(draw_batch(1.3, 100, 9) == draw_batch(1.3, 100, 9));
  Rng rng = cobay::make_rng(1);
  CHECK_THROWS_AS(pg_sample(std::numeric_limits<double>::infinity(), rng),
                  std::invalid_argument);
}

TEST_CASE("pg sample means match the moment identity within 4 standard errors") {
  const std::size_t n = 100000;
  std::uint64_t seed = 1000;
  for (double c : {0.0, 0.5, 2.0, 5.0, -2.0}) {
    const auto draws = draw_batch(c, n, seed++);
    double mean = 0.0;
    for (double x : draws) mean += x;
    mean /= static_cast<double>(n);
    const double se = std::sqrt(pg_var(c) / static_cast<double>(n));
    INFO("c = " << c << " mean " << mean << " expected " << pg_mean(c));
    CHECK(std::abs(mean - pg_mean(c)) < 4.0 * se);
  }
}

TEST_CASE("pg distribution is symmetric in the tilt") {
  const std::size_t n = 100000;
  const auto pos = draw_batch(2.0, n, 31);
  const auto neg = draw_batch(-2.0, n, 32);
  CHECK(testutil::ks_statistic(pos, neg) < testutil::ks_critical_99(n, n));
}

TEST_CASE("pg sampler agrees with the truncated sum-of-gammas oracle") {
  const std::size_t n = 20000;
  for (double c : {0.0, 1.0, 3.0}) {
    const auto fast = draw_batch(c, n, 77 + static_cast<std::uint64_t>(c * 10));
    Rng rng = cobay::make_rng(501 + static_cast<std::uint64_t>(c * 10));
    std::vector<double> slow(n);
    for (auto& x : slow) x = pg_oracle(c, 200, rng);
    INFO("c = " << c);
    CHECK(testutil::ks_statistic(fast, slow) < testutil::ks_critical_99(n, n));
  }
}

TEST_CASE("gaussian scale mixture identity recovers the sigmoid") {
  // sigma(z) = E[exp(f(omega, z))] over omega ~ PG(1, 0).
  const std::size_t n = 200000;
  const auto omegas = draw_batch(0.0, n, 2024);
  for (int zi = -3; zi <= 3; ++zi) {
    const double z = static_cast<double>(zi);
    double mean = 0.0;
    double ss = 0.0;
    for (double w : omegas) {
      const double v = std::exp(pg_log_tilt(w, z));
      mean += v;
      ss += v * v;
    }
    mean /= static_cast<double>(n);
    const double var = ss / static_cast<double>(n) - mean * mean;
    const double se = std::sqrt(var / static_cast<double>(n));
    INFO("z = " << z << " estimate " << mean << " target " << cobay::sigmoid(z));
    // At z = 0 the mixture is exact (zero variance), so the bound closes.
    CHECK(std::abs(mean - cobay::sigmoid(z)) <= 3.0 * se);
  }
}
