#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "cobay/simulate.hpp"

using cobay::BasisSet;
using cobay::BetaBasis;
using cobay::ModelParams;
using cobay::Rng;

namespace {

Eigen::VectorXd vec1(double mu) {
  Eigen::VectorXd v(1);
  v[0] = mu;
  return v;
}

const BasisSet kNoBasis({}, 1.0);

}  // namespace

TEST_CASE("thinning is deterministic given a seed") {
  const BasisSet basis({BetaBasis{50.0, 50.0, 6.0, 0.0}}, 6.0);
  Eigen::VectorXd w(2);
  w << 0.2, 1.0;
  const ModelParams params{w, 4.0};

  const auto a = cobay::simulate_thinning(params, basis, 0.0, 30.0, {}, 991ULL);
  const auto b = cobay::simulate_thinning(params, basis, 0.0, 30.0, {}, 991ULL);
  REQUIRE(a == b);

  Rng r1 = cobay::make_rng(17);
  Rng r2 = cobay::make_rng(17);
  CHECK(cobay::simulate_thinning(params, basis, 0.0, 30.0, {}, r1) ==
        cobay::simulate_thinning(params, basis, 0.0, 30.0, {}, r2));
}

TEST_CASE("simulated events are strictly increasing inside the horizon") {
  const BasisSet basis({BetaBasis{50.0, 50.0, 6.0, -2.0}}, 6.0);
  Eigen::VectorXd w(2);
  w << 0.5, -1.0;
  const auto events =
      cobay::simulate_thinning(ModelParams{w, 6.0}, basis, 2.0, 40.0, {}, 5ULL);
  REQUIRE(!events.empty());
  double prev = 2.0;
  for (double t : events) {
    CHECK(t > prev);
    CHECK(t <= 40.0);
    prev = t;
  }
}

TEST_CASE("deep inhibition produces an empty stream") {
  const auto events = cobay::simulate_thinning(ModelParams{vec1(-50.0), 5.0}, kNoBasis, 0.0,
                                               100.0, {}, 12ULL);
  CHECK(events.empty());
}

TEST_CASE("history must not extend past the horizon start") {
  const std::vector<double> history{0.0, 3.0};
  Rng rng = cobay::make_rng(3);
  CHECK_THROWS_AS(cobay::simulate_thinning(ModelParams{vec1(0.0), 5.0}, kNoBasis, 2.0, 10.0,
                                           history, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(cobay::simulate_thinning(ModelParams{vec1(0.0), 5.0}, kNoBasis, 5.0, 4.0,
                                           history, rng),
                  std::invalid_argument);
}

TEST_CASE("history shifts the acceptance rate through the kernel") {
  // A strongly excitatory basis right after a history event raises sigma(h)
  // above sigma(mu); simulate a short horizon after one event and compare
  // counts against the no-history run under matched seeds.
  const BasisSet basis({BetaBasis{2.0, 2.0, 4.0, 0.0}}, 4.0);
  Eigen::VectorXd w(2);
  w << -2.0, 8.0;
  const ModelParams params{w, 8.0};
  const std::vector<double> history{0.0};

  std::size_t with = 0;
  std::size_t without = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    with += cobay::simulate_thinning(params, basis, 0.0, 2.0, history,
                                     cobay::derive_seed(100, s))
                .size();
    without += cobay::simulate_thinning(params, basis, 0.0, 2.0, {},
                                        cobay::derive_seed(100, s))
                   .size();
  }
  CHECK(with > without);
}

TEST_CASE("homogeneous regime event counts stay in the Poisson band") {
  // mu = 50 saturates the sigmoid, so counts on [0, 20] at lambda_bar = 10
  // are Poisson(200).  Over 50 seeds, allow at most 2 escapes from the
  // 3-sigma band and require the aggregate mean inside its own band.
  const ModelParams params{vec1(50.0), 10.0};
  const double expected = 200.0;
  const double band = 3.0 * std::sqrt(expected);

  int violations = 0;
  double total = 0.0;
  const int n_seeds = 50;
  for (int s = 0; s < n_seeds; ++s) {
    const auto events = cobay::simulate_thinning(params, kNoBasis, 0.0, 20.0, {},
                                                 cobay::derive_seed(555, s));
    const double count = static_cast<double>(events.size());
    total += count;
    if (count < expected - band || count > expected + band) ++violations;
  }
  CHECK(violations <= 2);
  const double mean = total / n_seeds;
  const double mean_band = 3.0 * std::sqrt(expected / n_seeds);
  CHECK(mean > expected - mean_band);
  CHECK(mean < expected + mean_band);
}

TEST_CASE("count-terminated simulation returns exactly n events") {
  Eigen::VectorXd w(1);
  w << 0.3;
  Rng rng = cobay::make_rng(42);
  const auto events =
      cobay::simulate_thinning_count(ModelParams{w, 3.0}, kNoBasis, 1.0, 25, {}, rng);
  REQUIRE(events.size() == 25);
  double prev = 1.0;
  for (double t : events) {
    CHECK(t > prev);
    prev = t;
  }

  Rng replay = cobay::make_rng(42);
  CHECK(cobay::simulate_thinning_count(ModelParams{w, 3.0}, kNoBasis, 1.0, 25, {}, replay) ==
        events);
}
