#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "cobay/basis.hpp"
#include "cobay/common.hpp"
#include "cobay/events.hpp"
#include "cobay/model.hpp"

namespace cobay {

namespace detail {

inline void check_history(std::span<const double> history, double t_start) {
  if (!history.empty() && history.back() > t_start) {
    throw std::invalid_argument("simulate_thinning: history must not extend past t_start");
  }
}

// Shared thinning core.  Candidates arrive at rate lambda_bar; a candidate at
// s is kept with probability sigmoid(h(s)), where h sees both the provided
// history and all previously accepted events.  Stops either at the horizon
// end or once max_events have been accepted, whichever comes first.
inline std::vector<double> thinning_core(const ModelParams& params, const BasisSet& basis,
                                         double t_start, double t_end,
                                         std::span<const double> history, Rng& rng,
                                         std::size_t max_events) {
  params.validate(basis.size());
  check_history(history, t_start);

  std::vector<double> merged(history.begin(), history.end());
  const std::size_t n_history = merged.size();

  double s = t_start;
  while (merged.size() - n_history < max_events) {
    s += std::exponential_distribution<double>(params.lambda_bar)(rng);
    if (s > t_end) break;
    const double accept = sigmoid(activation_at(params, merged, basis, s));
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < accept) {
      merged.push_back(s);
    }
  }
  merged.erase(merged.begin(), merged.begin() + static_cast<std::ptrdiff_t>(n_history));
  return merged;
}

}  // namespace detail

// Ogata thinning over a fixed horizon (t_start, t_end].  The dominating rate
// is lambda_bar itself, so the acceptance ratio sigmoid(h) is a probability
// by construction and never needs clamping.
[[nodiscard]] inline std::vector<double> simulate_thinning(const ModelParams& params,
                                                           const BasisSet& basis,
                                                           double t_start, double t_end,
                                                           std::span<const double> history,
                                                           Rng& rng) {
  if (!(t_end >= t_start)) {
    throw std::invalid_argument("simulate_thinning: horizon must satisfy t_end >= t_start");
  }
  return detail::thinning_core(params, basis, t_start, t_end, history, rng,
                               std::numeric_limits<std::size_t>::max());
}

[[nodiscard]] inline std::vector<double> simulate_thinning(const ModelParams& params,
                                                           const BasisSet& basis,
                                                           double t_start, double t_end,
                                                           std::span<const double> history,
                                                           std::uint64_t rng_seed) {
  Rng rng = make_rng(rng_seed);
  return simulate_thinning(params, basis, t_start, t_end, history, rng);
}

// Open-horizon variant: runs until exactly n_events candidates have been
// accepted.  Terminates with probability one whenever the acceptance
// probability stays bounded away from zero.
[[nodiscard]] inline std::vector<double> simulate_thinning_count(const ModelParams& params,
                                                                 const BasisSet& basis,
                                                                 double t_start,
                                                                 std::size_t n_events,
                                                                 std::span<const double> history,
                                                                 Rng& rng) {
  return detail::thinning_core(params, basis, t_start,
                               std::numeric_limits<double>::infinity(), history, rng,
                               n_events);
}

}  // namespace cobay
