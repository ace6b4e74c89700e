#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cobay/basis.hpp"
#include "cobay/common.hpp"
#include "cobay/events.hpp"
#include "cobay/model.hpp"
#include "cobay/simulate.hpp"

namespace cobay {

// One homogeneous-parameter stretch of a piecewise stream.  Exactly one of
// n_events / duration must be set.
struct SegmentSpec {
  double lambda_bar = 1.0;
  Eigen::VectorXd weights;
  std::optional<std::size_t> n_events;
  std::optional<double> duration;

  void validate(std::size_t n_bases) const {
    ModelParams{weights, lambda_bar}.validate(n_bases);
    if (n_events.has_value() == duration.has_value()) {
      throw std::invalid_argument("SegmentSpec: set exactly one of n_events / duration");
    }
    if (n_events && *n_events == 0) {
      throw std::invalid_argument("SegmentSpec: n_events must be positive");
    }
    if (duration && !(*duration > 0.0)) {
      throw std::invalid_argument("SegmentSpec: duration must be positive");
    }
  }
};

struct LabeledDataset {
  EventSequence events;
  std::vector<std::size_t> change_indices;  // 1-based index of each segment's first event
};

// Segments are simulated independently with empty history (each one is its
// own stationary stretch) and concatenated by shifting every segment to
// start where the previous one ended.
[[nodiscard]] inline LabeledDataset generate_piecewise(const std::vector<SegmentSpec>& segments,
                                                       const BasisSet& basis,
                                                       std::uint64_t seed) {
  if (segments.empty()) {
    throw std::invalid_argument("generate_piecewise: need at least one segment");
  }
  for (const auto& seg : segments) seg.validate(basis.size());

  LabeledDataset out;
  double offset = 0.0;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& seg = segments[k];
    const ModelParams params{seg.weights, seg.lambda_bar};
    Rng rng = make_rng(seed, k);

    std::vector<double> local =
        seg.n_events ? simulate_thinning_count(params, basis, 0.0, *seg.n_events, {}, rng)
                     : simulate_thinning(params, basis, 0.0, *seg.duration, {}, rng);

    const std::size_t boundary = out.events.size() + 1;
    if (k > 0 && !local.empty()) {
      // Boundary label: the first event produced under the new parameters.
      if (out.change_indices.empty() || out.change_indices.back() != boundary) {
        out.change_indices.push_back(boundary);
      }
    }
    for (double t : local) out.events.timestamps.push_back(offset + t);
    offset += seg.duration ? *seg.duration : (local.empty() ? 0.0 : local.back());
  }
  out.events.origin = 0.0;
  out.events.validate();
  return out;
}

// Default kernel: four narrow beta bumps peaking at lags 1..4, truncated to
// [0, 6].
[[nodiscard]] inline BasisSet default_basis(std::size_t n_bases = 4) {
  if (n_bases < 1 || n_bases > 4) {
    throw std::invalid_argument("default_basis: supports 1..4 bases");
  }
  static constexpr double kShifts[] = {-2.0, -1.0, 0.0, 1.0};
  std::vector<BetaBasis> bases;
  for (std::size_t b = 0; b < n_bases; ++b) {
    bases.push_back(BetaBasis{50.0, 50.0, 6.0, kShifts[b]});
  }
  return BasisSet{std::move(bases), 6.0};
}

namespace detail {

// Shared ground-truth weights of the synthetic presets: a short-lag damping
// term plus growing excitation at longer lags.  Net drive keeps realized
// rates close to the dominating rate (so gap scale tracks lambda_bar shifts)
// while the magnitudes stay small enough for a N(0, 0.5) weight prior to
// recover them.
inline Eigen::VectorXd preset_weights() {
  Eigen::VectorXd w(5);
  w << 0.0, -0.5, 0.5, 1.0, 1.0;
  return w;
}

inline SegmentSpec duration_segment(double lambda_bar, double duration) {
  return SegmentSpec{lambda_bar, preset_weights(), std::nullopt, duration};
}

}  // namespace detail

// Three-segment default stream (dominating rates 5 -> 10 -> 3).  Durations
// fold in each segment's cold-start ramp so a typical draw has about 180
// events with boundaries near indices 44 and 137.
[[nodiscard]] inline std::vector<SegmentSpec> default_segments() {
  return {detail::duration_segment(5.0, 10.4),
          detail::duration_segment(10.0, 11.2),
          detail::duration_segment(3.0, 18.2)};
}

enum class StressKind { n_changes, delta_lambda, delta_t };

[[nodiscard]] inline StressKind parse_stress_kind(const std::string& name) {
  if (name == "n_changes") return StressKind::n_changes;
  if (name == "delta_lambda") return StressKind::delta_lambda;
  if (name == "delta_t") return StressKind::delta_t;
  throw config_error("unknown stress kind: " + name);
}

// Stress parameterizations over change count, rate-shift size, and middle
// segment length.
[[nodiscard]] inline std::vector<SegmentSpec> stress_configs(StressKind kind, double level) {
  using detail::duration_segment;
  switch (kind) {
    case StressKind::n_changes: {
      if (level == 1.0) {
        return {duration_segment(5.0, 10.4), duration_segment(10.0, 11.2)};
      }
      if (level == 2.0) return default_segments();
      if (level == 3.0) {
        auto segs = default_segments();
        segs.push_back(duration_segment(8.0, 7.0));
        return segs;
      }
      throw config_error("n_changes level must be 1, 2 or 3");
    }
    case StressKind::delta_lambda: {
      if (level == 0.1) {
        return {duration_segment(10.0, 10.0), duration_segment(10.1, 10.0)};
      }
      if (level == 1.0) {
        return {duration_segment(10.0, 10.0), duration_segment(9.0, 11.0)};
      }
      if (level == 5.0) {
        return {duration_segment(10.0, 10.0), duration_segment(5.0, 18.0)};
      }
      throw config_error("delta_lambda level must be 0.1, 1 or 5");
    }
    case StressKind::delta_t: {
      if (level != 5.0 && level != 10.0 && level != 15.0) {
        throw config_error("delta_t level must be 5, 10 or 15");
      }
      return {duration_segment(10.0, 10.0), duration_segment(5.0, level),
              duration_segment(15.0, 8.0)};
    }
  }
  throw config_error("unknown stress kind");
}

}  // namespace cobay
