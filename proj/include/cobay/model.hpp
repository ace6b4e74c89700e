#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>

#include "cobay/basis.hpp"
#include "cobay/common.hpp"
#include "cobay/events.hpp"

namespace cobay {

// Weights w = [mu, w_1..w_B] plus the dominating rate lambda_bar.  The
// conditional intensity is lambda_bar * sigmoid(w . Phi(t)).
struct ModelParams {
  Eigen::VectorXd weights;
  double lambda_bar = 1.0;

  void validate(std::size_t n_bases) const {
    if (static_cast<std::size_t>(weights.size()) != n_bases + 1) {
      throw std::invalid_argument("ModelParams: weights must have length B + 1");
    }
    if (!(lambda_bar > 0.0) || !std::isfinite(lambda_bar)) {
      throw std::invalid_argument("ModelParams: lambda_bar must be positive and finite");
    }
    if (!weights.allFinite()) {
      throw std::invalid_argument("ModelParams: weights must be finite");
    }
  }
};

// Feature vector Phi(t) = [1, Phi_1(t), ..., Phi_B(t)] where
// Phi_b(t) = sum over history events t_i < t of basis_b(t - t_i).
// Only events inside the kernel support (t - T_phi, t) can contribute, so the
// scan is restricted to that range via binary search.
[[nodiscard]] inline Eigen::VectorXd features(std::span<const double> history,
                                              const BasisSet& basis, double t) {
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()) + 1);
  phi[0] = 1.0;
  const double lo = t - basis.support_bound();
  const auto first = std::lower_bound(history.begin(), history.end(), lo);
  const auto last = std::lower_bound(first, history.end(), t);
  for (auto it = first; it != last; ++it) {
    const double lag = t - *it;
    for (std::size_t b = 0; b < basis.size(); ++b) {
      phi[static_cast<Eigen::Index>(b) + 1] += basis.eval(b, lag);
    }
  }
  return phi;
}

[[nodiscard]] inline double activation(const ModelParams& params,
                                       const Eigen::VectorXd& feature_vec) {
  if (params.weights.size() != feature_vec.size()) {
    throw std::invalid_argument("activation: weight/feature dimension mismatch");
  }
  return params.weights.dot(feature_vec);
}

[[nodiscard]] inline double activation_at(const ModelParams& params,
                                          std::span<const double> history,
                                          const BasisSet& basis, double t) {
  return activation(params, features(history, basis, t));
}

// Conditional intensity lambda*(t) = lambda_bar * sigmoid(h(t)).
[[nodiscard]] inline double intensity(const ModelParams& params,
                                      std::span<const double> history,
                                      const BasisSet& basis, double t) {
  return params.lambda_bar * sigmoid(activation_at(params, history, basis, t));
}

// Window log likelihood: sum_i log(lambda_bar sigmoid(h(t_i))) minus the
// compensator integral over [interval.first, interval.second], approximated
// with a composite trapezoid rule.  The interval defaults to [first event,
// last event].  Diagnostics only; nothing in the sampler depends on it.
[[nodiscard]] inline double log_likelihood(
    const ModelParams& params, std::span<const double> window, const BasisSet& basis,
    int quadrature_points = 1000,
    std::optional<std::pair<double, double>> interval = std::nullopt) {
  if (window.empty()) throw std::invalid_argument("log_likelihood: window must be non-empty");
  if (quadrature_points < 2) {
    throw std::invalid_argument("log_likelihood: need at least 2 quadrature points");
  }
  params.validate(basis.size());

  double ll = 0.0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    const double h = activation_at(params, window.subspan(0, i), basis, window[i]);
    ll += std::log(params.lambda_bar) + std::log(sigmoid(h));
  }

  const double lo = interval ? interval->first : window.front();
  const double hi = interval ? interval->second : window.back();
  if (!(hi >= lo)) throw std::invalid_argument("log_likelihood: empty integration interval");

  const int n = quadrature_points;
  const double step = (hi - lo) / static_cast<double>(n - 1);
  double integral = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = (k == n - 1) ? hi : lo + step * static_cast<double>(k);
    const double val = params.lambda_bar * sigmoid(activation_at(params, window, basis, t));
    integral += (k == 0 || k == n - 1) ? 0.5 * val : val;
  }
  integral *= step;
  return ll - integral;
}

}  // namespace cobay
