#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "cobay/datagen.hpp"

using cobay::BasisSet;
using cobay::SegmentSpec;
using cobay::StressKind;

namespace {

Eigen::VectorXd vec1(double mu) {
  Eigen::VectorXd v(1);
  v[0] = mu;
  return v;
}

}  // namespace

TEST_CASE("default basis builds one to four beta bumps on support six") {
  for (std::size_t n = 1; n <= 4; ++n) {
    const BasisSet basis = cobay::default_basis(n);
    CHECK(basis.size() == n);
    CHECK(basis.support_bound() == 6.0);
  }
  // Shift 0 basis peaks at lag 3 with the frozen reference value.
  const BasisSet basis = cobay::default_basis(4);
  CHECK(basis.eval(2, 3.0) == Catch::Approx(1.3264872897863127).epsilon(1e-13));
  CHECK(basis.eval(0, 1.0) == Catch::Approx(1.3264872897863127).epsilon(1e-13));

  CHECK_THROWS_AS(cobay::default_basis(0), std::invalid_argument);
  CHECK_THROWS_AS(cobay::default_basis(5), std::invalid_argument);
}

TEST_CASE("segment specs demand exactly one sizing mode") {
  SegmentSpec seg;
  seg.lambda_bar = 5.0;
  seg.weights = vec1(0.0);
  CHECK_THROWS_AS(seg.validate(0), std::invalid_argument);  // neither

  seg.n_events = 10;
  CHECK_NOTHROW(seg.validate(0));
  seg.duration = 4.0;
  CHECK_THROWS_AS(seg.validate(0), std::invalid_argument);  // both

  seg.n_events.reset();
  CHECK_NOTHROW(seg.validate(0));
  seg.duration = 0.0;
  CHECK_THROWS_AS(seg.validate(0), std::invalid_argument);

  seg.duration = 4.0;
  seg.lambda_bar = 0.0;
  CHECK_THROWS_AS(seg.validate(0), std::invalid_argument);

  seg.lambda_bar = 5.0;
  CHECK_THROWS_AS(seg.validate(2), std::invalid_argument);  // weight length
}

TEST_CASE("piecewise generation labels the first event of each new segment") {
  const BasisSet none({}, 1.0);
  std::vector<SegmentSpec> segments(2);
  segments[0] = SegmentSpec{4.0, vec1(0.0), 5, std::nullopt};
  segments[1] = SegmentSpec{8.0, vec1(0.5), 4, std::nullopt};

  const auto data = cobay::generate_piecewise(segments, none, 31);
  REQUIRE(data.events.size() == 9);
  CHECK(data.change_indices == std::vector<std::size_t>{6});
  data.events.validate();

  const auto replay = cobay::generate_piecewise(segments, none, 31);
  CHECK(replay.events.timestamps == data.events.timestamps);
  CHECK(replay.change_indices == data.change_indices);

  const auto other = cobay::generate_piecewise(segments, none, 32);
  CHECK(other.events.timestamps != data.events.timestamps);
}

TEST_CASE("duration-mode segments offset by their nominal length") {
  const BasisSet none({}, 1.0);
  std::vector<SegmentSpec> segments(2);
  segments[0] = SegmentSpec{6.0, vec1(2.0), std::nullopt, 10.0};
  segments[1] = SegmentSpec{6.0, vec1(2.0), std::nullopt, 10.0};

  const auto data = cobay::generate_piecewise(segments, none, 77);
  REQUIRE(data.change_indices.size() == 1);
  const std::size_t boundary = data.change_indices[0];
  REQUIRE(boundary >= 2);
  REQUIRE(boundary <= data.events.size());
  // Events before the boundary land in [0, 10), events after in (10, 20].
  CHECK(data.events.timestamps[boundary - 2] < 10.0);
  CHECK(data.events.timestamps[boundary - 1] > 10.0);
  CHECK(data.events.timestamps.back() <= 20.0);
}

TEST_CASE("default segments follow the three-regime preset") {
  const auto segments = cobay::default_segments();
  REQUIRE(segments.size() == 3);
  CHECK(segments[0].lambda_bar == 5.0);
  CHECK(segments[1].lambda_bar == 10.0);
  CHECK(segments[2].lambda_bar == 3.0);
  for (const auto& seg : segments) {
    CHECK(seg.duration.has_value());
    CHECK(*seg.duration > 0.0);
    CHECK(seg.weights.size() == 5);
    CHECK_NOTHROW(seg.validate(4));
  }

  const auto data = cobay::generate_piecewise(segments, cobay::default_basis(), 1);
  CHECK(data.change_indices.size() == 2);
  CHECK(data.events.size() > 50);
}

TEST_CASE("stress presets span the documented grids") {
  CHECK(cobay::parse_stress_kind("n_changes") == StressKind::n_changes);
  CHECK(cobay::parse_stress_kind("delta_lambda") == StressKind::delta_lambda);
  CHECK(cobay::parse_stress_kind("delta_t") == StressKind::delta_t);
  CHECK_THROWS_AS(cobay::parse_stress_kind("bogus"), cobay::config_error);

  for (double level : {1.0, 2.0, 3.0}) {
    const auto segs = cobay::stress_configs(StressKind::n_changes, level);
    CHECK(segs.size() == static_cast<std::size_t>(level) + 1);
  }
  CHECK_THROWS_AS(cobay::stress_configs(StressKind::n_changes, 4.0), cobay::config_error);

  for (double level : {0.1, 1.0, 5.0}) {
    const auto segs = cobay::stress_configs(StressKind::delta_lambda, level);
    REQUIRE(segs.size() == 2);
    CHECK(std::abs(segs[0].lambda_bar - segs[1].lambda_bar) == Catch::Approx(level));
  }
  CHECK_THROWS_AS(cobay::stress_configs(StressKind::delta_lambda, 2.0), cobay::config_error);

  for (double level : {5.0, 10.0, 15.0}) {
    const auto segs = cobay::stress_configs(StressKind::delta_t, level);
    REQUIRE(segs.size() == 3);
    CHECK(*segs[1].duration == level);
  }
  CHECK_THROWS_AS(cobay::stress_configs(StressKind::delta_t, 7.0), cobay::config_error);

  for (auto kind : {StressKind::n_changes, StressKind::delta_lambda, StressKind::delta_t}) {
    for (const auto& seg : cobay::stress_configs(kind, kind == StressKind::delta_lambda ? 1.0
                                                       : kind == StressKind::delta_t ? 10.0
                                                                                     : 2.0)) {
      CHECK_NOTHROW(seg.validate(4));
    }
  }
}

TEST_CASE("piecewise generation rejects invalid input") {
  const BasisSet none({}, 1.0);
  CHECK_THROWS_AS(cobay::generate_piecewise({}, none, 1), std::invalid_argument);

  std::vector<SegmentSpec> bad(1);
  bad[0] = SegmentSpec{5.0, vec1(0.0), std::nullopt, std::nullopt};
  CHECK_THROWS_AS(cobay::generate_piecewise(bad, none, 1), std::invalid_argument);
}
