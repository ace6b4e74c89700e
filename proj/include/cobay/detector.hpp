#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "cobay/basis.hpp"
#include "cobay/common.hpp"
#include "cobay/events.hpp"
#include "cobay/gibbs.hpp"
#include "cobay/model.hpp"
#include "cobay/simulate.hpp"

namespace cobay {

// Predictive horizon cap, as a multiple of the window span.
inline constexpr double kHorizonFactor = 10.0;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct DetectorConfig {
  BasisSet basis;
  GibbsConfig gibbs{};
  double confidence_level = 0.90;
  int n_predictive = 0;  // 0: one predictive draw per retained posterior draw
  int min_window = 10;
  int max_window = 200;
  int predictive_threads = 1;

  void validate() const {
    gibbs.validate();
    if (!(confidence_level > 0.0) || !(confidence_level < 1.0)) {
      throw std::invalid_argument("DetectorConfig: confidence_level must lie in (0, 1)");
    }
    if (min_window < 2) throw std::invalid_argument("DetectorConfig: min_window must be >= 2");
    if (max_window < min_window) {
      throw std::invalid_argument("DetectorConfig: max_window must be >= min_window");
    }
    if (n_predictive < 0 || n_predictive == 1) {
      throw std::invalid_argument("DetectorConfig: n_predictive must be 0 or at least 2");
    }
    if (gibbs.iterations - gibbs.burn_in < 2) {
      throw std::invalid_argument(
          "DetectorConfig: need at least two retained draws for the predictive interval");
    }
    if (n_predictive > gibbs.iterations - gibbs.burn_in) {
      throw std::invalid_argument(
          "DetectorConfig: n_predictive cannot exceed the retained draw count");
    }
    if (predictive_threads < 1) {
      throw std::invalid_argument("DetectorConfig: predictive_threads must be >= 1");
    }
  }
};

// Outcome of one online round.  `index` is the 1-based position of the
// evaluated event.  Warm-up rounds are recorded untested with a degenerate
// interval at the observed value and no draws.
struct StepRecord {
  std::size_t index = 0;
  std::vector<double> predictive_draws;
  Interval interval{};
  double observed = 0.0;
  bool tested = false;
  bool is_change = false;
  double elapsed_seconds = 0.0;
};

struct DetectionState {
  std::size_t tau = 1;   // 1-based index of the first event after the last change
  std::size_t step = 1;  // 1-based index m of the last ingested event
  std::optional<ModelParams> warm_start;
};

struct PredictiveDraw {
  double t = 0.0;
  bool censored = false;
};

// First simulated event strictly after t_m under one posterior draw,
// censored at t_m + h_max.  Censored draws still participate in the
// quantiles at the censoring value.
[[nodiscard]] inline PredictiveDraw predict_next(std::span<const double> window,
                                                 const BasisSet& basis,
                                                 const ModelParams& draw, double h_max,
                                                 Rng& rng) {
  if (window.empty()) throw std::invalid_argument("predict_next: window must be non-empty");
  if (!(h_max > 0.0)) throw std::invalid_argument("predict_next: horizon must be positive");
  const double t_m = window.back();
  const std::vector<double> sim =
      detail::thinning_core(draw, basis, t_m, t_m + h_max, window, rng, 1);
  if (sim.empty()) return PredictiveDraw{t_m + h_max, true};
  return PredictiveDraw{sim.front(), false};
}

// Nearest-rank central interval at the given confidence level; the observed
// value is a change iff it falls outside the closed interval.
[[nodiscard]] inline std::pair<Interval, bool> decide(std::vector<double> draws,
                                                      double observed, double level) {
  if (draws.size() < 2) throw std::invalid_argument("decide: need at least two draws");
  if (!(level > 0.0) || !(level < 1.0)) {
    throw std::invalid_argument("decide: level must lie in (0, 1)");
  }
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  const double alpha = (1.0 - level) / 2.0;
  // Tiny slack so that ranks that are integral in exact arithmetic do not
  // round up through floating-point representation error.
  const auto rank = [n](double p) {
    const double r = std::ceil(p * n - 1e-9);
    return static_cast<std::size_t>(std::clamp(r, 1.0, n));
  };
  const Interval interval{draws[rank(alpha) - 1], draws[rank(1.0 - alpha) - 1]};
  const bool change = observed < interval.lo || observed > interval.hi;
  return {interval, change};
}

namespace detail {

inline std::vector<double> predictive_draws(std::span<const double> window,
                                            const BasisSet& basis,
                                            const PosteriorSamples& samples,
                                            std::size_t n_draws, double h_max,
                                            std::uint64_t seed, std::size_t round,
                                            int threads) {
  std::vector<double> draws(n_draws);
  // Each draw owns a stream derived from (seed, round, draw index); the
  // partitioning across threads cannot change the result.
  const auto worker = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t k = begin; k < n_draws; k += stride) {
      Rng rng = make_rng(seed, round, 1 + k);
      draws[k] = predict_next(window, basis, samples[k], h_max, rng).t;
    }
  };
  if (threads <= 1 || n_draws < 2) {
    worker(0, 1);
  } else {
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(threads), n_draws);
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t j = 0; j < n_threads; ++j) {
      pool.emplace_back(worker, j, n_threads);
    }
    for (auto& th : pool) th.join();
  }
  return draws;
}

}  // namespace detail

// One online round: fit the window ending at event m, draw the predictive
// sample for event m+1, and test the observed arrival.  Declaring a change
// moves tau past the new event and clears the warm start.
inline StepRecord step(DetectionState& state, const DetectorConfig& config,
                       std::span<const double> events, std::uint64_t seed) {
  config.validate();
  const std::size_t m = state.step;
  if (m + 1 > events.size()) {
    throw std::invalid_argument("step: need the observed event t_{m+1}");
  }
  if (state.tau == 0 || state.tau > m) throw std::invalid_argument("step: invalid tau");

  const auto start_time = std::chrono::steady_clock::now();

  StepRecord rec;
  rec.index = m + 1;
  rec.observed = events[m];  // 0-based position of the 1-based event m+1

  const std::size_t win_begin =
      std::max(state.tau - 1, m >= static_cast<std::size_t>(config.max_window)
                                  ? m - static_cast<std::size_t>(config.max_window)
                                  : 0);
  const std::span<const double> window = events.subspan(win_begin, m - win_begin);

  if (window.size() < static_cast<std::size_t>(config.min_window)) {
    rec.tested = false;
    rec.interval = Interval{rec.observed, rec.observed};
  } else {
    Rng chain_rng = make_rng(seed, rec.index, 0);
    const ModelParams init = state.warm_start
                                 ? *state.warm_start
                                 : default_chain_init(window, config.basis.size());
    const PosteriorSamples samples =
        run_chain(window, config.basis, config.gibbs, init, chain_rng);

    const std::size_t n_draws = config.n_predictive == 0
                                    ? samples.size()
                                    : static_cast<std::size_t>(config.n_predictive);
    const double h_max = kHorizonFactor * (window.back() - window.front());
    rec.predictive_draws = detail::predictive_draws(
        window, config.basis, samples, n_draws, h_max, seed, rec.index,
        config.predictive_threads);

    auto [interval, is_change] =
        decide(rec.predictive_draws, rec.observed, config.confidence_level);
    rec.tested = true;
    rec.interval = interval;
    rec.is_change = is_change;

    if (is_change) {
      state.tau = rec.index;
      state.warm_start.reset();
    } else {
      state.warm_start = samples.back();
    }
  }

  state.step = m + 1;
  rec.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  return rec;
}

struct DetectionResult {
  std::vector<StepRecord> records;
  std::vector<std::size_t> change_indices;
  double runtime_seconds = 0.0;
};

// Full online pass over the stream: one record per round m+1 = 2..N.
[[nodiscard]] inline DetectionResult run(const EventSequence& events,
                                         const DetectorConfig& config, std::uint64_t seed) {
  config.validate();
  events.validate();
  if (events.size() < static_cast<std::size_t>(config.min_window) + 1) {
    throw std::invalid_argument("run: stream shorter than min_window + 1 events");
  }

  const auto start_time = std::chrono::steady_clock::now();
  DetectionResult result;
  result.records.reserve(events.size() - 1);

  DetectionState state;
  while (state.step + 1 <= events.size()) {
    StepRecord rec = step(state, config, events.view(), seed);
    if (rec.is_change) result.change_indices.push_back(rec.index);
    result.records.push_back(std::move(rec));
  }
  result.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  return result;
}

}  // namespace cobay
