#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cobay/common.hpp"
#include "cobay/detector.hpp"

namespace cobay {

struct MatchResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (truth, detected)
};

// Greedy one-to-one matching in detection order: a detection claims the
// nearest unmatched truth within `tol` indices (ties to the earlier truth).
// tested_steps sets the negative base: tn = tested_steps - tp - fp - fn.
[[nodiscard]] inline MatchResult match_changepoints(std::span<const std::size_t> truth,
                                                    std::span<const std::size_t> detected,
                                                    std::size_t tol,
                                                    std::size_t tested_steps) {
  if (!std::is_sorted(truth.begin(), truth.end()) ||
      !std::is_sorted(detected.begin(), detected.end())) {
    throw std::invalid_argument("match_changepoints: inputs must be sorted ascending");
  }

  MatchResult res;
  std::vector<bool> taken(truth.size(), false);
  for (std::size_t d : detected) {
    std::size_t best = truth.size();
    std::int64_t best_dist = 0;
    for (std::size_t g = 0; g < truth.size(); ++g) {
      if (taken[g]) continue;
      const std::int64_t dist = std::llabs(static_cast<std::int64_t>(d) -
                                           static_cast<std::int64_t>(truth[g]));
      if (dist > static_cast<std::int64_t>(tol)) continue;
      if (best == truth.size() || dist < best_dist) {
        best = g;
        best_dist = dist;
      }
      // Equal distance keeps the earlier truth, which the ascending scan
      // already visited first.
    }
    if (best != truth.size()) {
      taken[best] = true;
      res.pairs.emplace_back(truth[best], d);
      ++res.tp;
    } else {
      ++res.fp;
    }
  }
  res.fn = truth.size() - res.tp;

  if (tested_steps < res.tp + res.fp + res.fn) {
    throw std::invalid_argument("match_changepoints: tested_steps smaller than outcomes");
  }
  res.tn = tested_steps - res.tp - res.fp - res.fn;
  return res;
}

// Mean squared gap between predictive mean and observed arrival, over tested
// rounds only.
[[nodiscard]] inline double compute_mse(std::span<const StepRecord> records) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& rec : records) {
    if (!rec.tested) continue;
    const double mean = std::accumulate(rec.predictive_draws.begin(),
                                        rec.predictive_draws.end(), 0.0) /
                        static_cast<double>(rec.predictive_draws.size());
    const double err = mean - rec.observed;
    sum += err * err;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("compute_mse: no tested records");
  return sum / static_cast<double>(n);
}

struct RunMetrics {
  double fnr = 0.0;
  double fpr = 0.0;
  double mse = 0.0;
  double runtime_seconds = 0.0;
};

[[nodiscard]] inline RunMetrics make_metrics(const MatchResult& match, double mse,
                                             double runtime_seconds) {
  RunMetrics m;
  const double pos = static_cast<double>(match.tp + match.fn);
  const double neg = static_cast<double>(match.fp + match.tn);
  m.fnr = pos > 0.0 ? static_cast<double>(match.fn) / pos : 0.0;
  m.fpr = neg > 0.0 ? static_cast<double>(match.fp) / neg : 0.0;
  m.mse = mse;
  m.runtime_seconds = runtime_seconds;
  return m;
}

struct AggregateEntry {
  double mean = 0.0;
  double stddev = 0.0;
};

struct AggregateMetrics {
  AggregateEntry fnr;
  AggregateEntry fpr;
  AggregateEntry mse;
  AggregateEntry runtime_minutes;
  std::size_t n_runs = 0;
};

namespace detail {

inline AggregateEntry mean_std(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return AggregateEntry{mean, std::sqrt(ss / n)};
}

}  // namespace detail

// Per-seed metrics reduced to mean and population standard deviation.
// Runtimes are stored in seconds and reported in minutes.
[[nodiscard]] inline AggregateMetrics aggregate(std::span<const RunMetrics> runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate: need at least one run");
  std::vector<double> fnr, fpr, mse, rt;
  for (const auto& r : runs) {
    fnr.push_back(r.fnr);
    fpr.push_back(r.fpr);
    mse.push_back(r.mse);
    rt.push_back(r.runtime_seconds / 60.0);
  }
  return AggregateMetrics{detail::mean_std(fnr), detail::mean_std(fpr),
                          detail::mean_std(mse), detail::mean_std(rt), runs.size()};
}

}  // namespace cobay
