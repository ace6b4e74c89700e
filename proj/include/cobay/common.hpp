#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cobay {

using Rng = std::mt19937_64;

// Thrown when a linear-algebra or sampling step cannot be completed even
// after the documented recovery attempts (e.g. jitter escalation).
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data (CSV contents, label files, ...).
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration supplied by the user.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Logistic function, stable for |z| up to ~1e3: never evaluates exp on a
// positive argument, so neither branch can overflow.
[[nodiscard]] inline double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Deterministic stream derivation: the same (seed, a, b) always yields the
// same engine, independent of construction order.  Used to give every Gibbs
// chain and every predictive draw its own stream.
[[nodiscard]] inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                               std::uint64_t b = 0) {
  std::uint64_t h = detail::splitmix64(seed);
  h = detail::splitmix64(h ^ (a + 0x9e3779b97f4a7c15ULL));
  h = detail::splitmix64(h ^ (b + 0xd1b54a32d192ed03ULL));
  return h;
}

[[nodiscard]] inline Rng make_rng(std::uint64_t seed, std::uint64_t a = 0,
                                  std::uint64_t b = 0) {
  return Rng(derive_seed(seed, a, b));
}

enum class LogLevel : int { debug = 0, info = 1, warn = 2, error = 3 };

namespace detail {

inline LogLevel log_threshold() {
  static const LogLevel level = [] {
    const char* env = std::getenv("COBAY_LOG");
    if (env == nullptr) return LogLevel::warn;
    const std::string_view v(env);
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    if (v == "warn") return LogLevel::warn;
    if (v == "error") return LogLevel::error;
    return LogLevel::warn;
  }();
  return level;
}

}  // namespace detail

inline void log_message(LogLevel level, std::string_view msg) {
  if (static_cast<int>(level) < static_cast<int>(detail::log_threshold())) return;
  static constexpr const char* kTags[] = {"debug", "info", "warn", "error"};
  std::cerr << "[cobay:" << kTags[static_cast<int>(level)] << "] " << msg << '\n';
}

}  // namespace cobay
