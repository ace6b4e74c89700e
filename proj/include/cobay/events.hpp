#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cobay {

// A strictly increasing stream of event times on [origin, inf).
struct EventSequence {
  std::vector<double> timestamps;
  double origin = 0.0;

  [[nodiscard]] std::size_t size() const { return timestamps.size(); }
  [[nodiscard]] bool empty() const { return timestamps.empty(); }
  [[nodiscard]] std::span<const double> view() const { return timestamps; }

  void validate() const {
    if (!std::isfinite(origin)) throw std::invalid_argument("EventSequence: origin must be finite");
    double prev = origin;
    bool first = true;
    for (double t : timestamps) {
      if (!std::isfinite(t)) throw std::invalid_argument("EventSequence: timestamps must be finite");
      if (first ? t < prev : t <= prev) {
        throw std::invalid_argument(
            "EventSequence: timestamps must be strictly increasing and >= origin");
      }
      prev = t;
      first = false;
    }
  }
};

[[nodiscard]] inline EventSequence make_events(std::vector<double> timestamps,
                                               double origin = 0.0) {
  EventSequence seq{std::move(timestamps), origin};
  seq.validate();
  return seq;
}

}  // namespace cobay
