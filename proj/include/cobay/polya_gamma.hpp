#pragma once

#include <cmath>
#include <random>

#include "cobay/common.hpp"

namespace cobay {

namespace pg_detail {

// J*(1, z) devroye-style sampler constants.  The proposal switches between a
// truncated inverse-Gaussian below t = 2/pi and a truncated exponential
// above it.
inline constexpr double kTrunc = 0.636619772367581343075535053490057448;   // 2/pi
inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kHalfPi = 1.570796326794896619231321691639751442;
inline constexpr double kPiSq = 9.869604401089358618834490999876151135;
inline constexpr double kLogPi = 1.144729885849400174143427351353058711;
inline constexpr double kLog2OverPi = -0.451582705289454864726195229894882143;
inline constexpr double kSqrtHalfPi = 1.253314137315500251207882642405522626;  // sqrt(pi/2)
inline constexpr double kInvSqrt2 = 0.707106781186547524400844362104849039;

inline double unif(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
inline double expo(Rng& rng) { return std::exponential_distribution<double>(1.0)(rng); }
inline double gauss(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline double log_normal_cdf(double x) { return std::log(0.5 * std::erfc(-x * kInvSqrt2)); }

// Alternating-series coefficient a_n(x) of the J*(1, 0) density, in its
// x <= t and x > t forms.
inline double series_term(int n, double x) {
  const double h = static_cast<double>(n) + 0.5;
  double logf;
  if (x <= kTrunc) {
    logf = kLogPi + std::log(h) + 1.5 * (kLog2OverPi - std::log(x)) - 2.0 * h * h / x;
  } else {
    logf = kLogPi + std::log(h) - 0.5 * kPiSq * h * h * x;
  }
  return std::exp(logf);
}

// Probability of proposing from the truncated exponential branch.
inline double exp_branch_prob(double z, double big_k) {
  const double log_a = std::log(4.0) - kLogPi - z;
  const double log_k = std::log(big_k);
  const double kt = big_k * kTrunc;
  const double w = std::sqrt(kHalfPi);
  const double logf1 = log_a + log_normal_cdf(w * (kTrunc * z - 1.0)) + log_k + kt;
  const double logf2 = log_a + 2.0 * z + log_normal_cdf(-w * (kTrunc * z + 1.0)) + log_k + kt;
  const double p_over_q = std::exp(logf1) + std::exp(logf2);
  return 1.0 / (1.0 + p_over_q);
}

// Inverse-Gaussian(mu, 1) via the transformation method.
inline double inverse_gaussian(double mu, Rng& rng) {
  const double u = gauss(rng);
  const double v = u * u;
  double out = mu + 0.5 * mu * (mu * v - std::sqrt(4.0 * mu * v + mu * mu * v * v));
  if (unif(rng) > mu / (mu + out)) out = mu * mu / out;
  return out;
}

// Gamma(1/2) truncated to [pi/2, inf); rejection from a shifted exponential.
inline double truncated_gamma(Rng& rng) {
  while (true) {
    const double x = 2.0 * expo(rng) + kHalfPi;
    if (unif(rng) <= kSqrtHalfPi / std::sqrt(x)) return x;
  }
}

// Inverse-Gaussian(1/z, 1) truncated to (0, t).
inline double truncated_inverse_gaussian(double z, Rng& rng) {
  if (z <= 0.0 || 1.0 / z > kTrunc) {
    // Near-degenerate mean: sample 1/X from a truncated Gamma(1/2) and
    // accept against the z-dependent factor.
    while (true) {
      const double x = 1.0 / truncated_gamma(rng);
      if (std::log(unif(rng)) < -0.5 * z * z * x) return x;
    }
  }
  const double mu = 1.0 / z;
  while (true) {
    const double x = inverse_gaussian(mu, rng);
    if (x < kTrunc) return x;
  }
}

// One draw of J*(1, z) for z >= 0, accepted through the alternating series.
inline double jstar(double z, Rng& rng) {
  const double big_k = 0.5 * z * z + 0.125 * kPiSq;
  const double p_exp = exp_branch_prob(z, big_k);
  while (true) {
    const double x = (unif(rng) < p_exp) ? kTrunc + expo(rng) / big_k
                                         : truncated_inverse_gaussian(z, rng);
    double sn = series_term(0, x);
    const double u = unif(rng) * sn;
    int n = 0;
    while (true) {
      ++n;
      if (n % 2 == 1) {
        sn -= series_term(n, x);
        if (u <= sn) return x;
      } else {
        sn += series_term(n, x);
        if (u > sn) break;
      }
    }
  }
}

}  // namespace pg_detail

// Exact draw from the Polya-Gamma distribution PG(1, c).  PG(1, c) is
// symmetric in c, so only |c| matters: PG(1, c) = J*(1, |c|/2) / 4.
[[nodiscard]] inline double pg_sample(double c, Rng& rng) {
  if (!std::isfinite(c)) throw std::invalid_argument("pg_sample: tilt must be finite");
  return 0.25 * pg_detail::jstar(0.5 * std::abs(c), rng);
}

// E[PG(1, c)] = tanh(c/2) / (2c), extended by its series at c = 0.
[[nodiscard]] inline double pg_mean(double c) {
  const double a = std::abs(c);
  if (a < 1e-4) {
    const double c2 = c * c;
    return 0.25 * (1.0 - c2 / 12.0 + c2 * c2 / 120.0);
  }
  return std::tanh(0.5 * c) / (2.0 * c);
}

// log of the integrand tilt f(omega, z) = z/2 - z^2 omega / 2 - log 2 in the
// Gaussian-scale-mixture identity sigmoid(z) = E[exp(f(omega, z))] over
// omega ~ PG(1, 0).
[[nodiscard]] inline double pg_log_tilt(double omega, double z) {
  if (!(omega >= 0.0)) throw std::invalid_argument("pg_log_tilt: omega must be non-negative");
  return 0.5 * z - 0.5 * z * z * omega - std::log(2.0);
}

}  // namespace cobay
