#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cobay/common.hpp"

namespace cobay {

// One scaled/shifted beta density phi~(x) = Beta((x - shift)/scale; alpha, beta) / scale.
struct BetaBasis {
  double alpha = 1.0;
  double beta = 1.0;
  double scale = 1.0;
  double shift = 0.0;
};

namespace detail {

struct PreparedBasis {
  double alpha;
  double beta;
  double shift;
  double inv_scale;
  double log_norm;  // log Gamma(a+b) - log Gamma(a) - log Gamma(b) - log(scale)
};

inline PreparedBasis prepare(const BetaBasis& b) {
  return PreparedBasis{
      b.alpha, b.beta, b.shift, 1.0 / b.scale,
      std::lgamma(b.alpha + b.beta) - std::lgamma(b.alpha) - std::lgamma(b.beta) -
          std::log(b.scale)};
}

inline double eval_prepared(const PreparedBasis& p, double lag, double support_bound) {
  if (lag < 0.0 || lag > support_bound) return 0.0;
  const double u = (lag - p.shift) * p.inv_scale;
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return std::exp(p.log_norm + (p.alpha - 1.0) * std::log(u) +
                  (p.beta - 1.0) * std::log1p(-u));
}

}  // namespace detail

// Single-basis evaluation with an explicit truncation bound T_phi.  The
// density is cut off outside [0, T_phi] without renormalization, so bases
// whose beta support sticks out of that interval lose the overhanging mass.
[[nodiscard]] inline double basis_eval(const BetaBasis& basis, double lag,
                                       double support_bound) {
  return detail::eval_prepared(detail::prepare(basis), lag, support_bound);
}

// Immutable collection of basis functions sharing one support bound.  An
// empty set is allowed (background-rate-only model, weights = [mu]).
// Normalization constants are precomputed once; eval() is called in the
// innermost sampling loops.
class BasisSet {
 public:
  explicit BasisSet(std::vector<BetaBasis> bases = {}, double support_bound = 1.0)
      : bases_(std::move(bases)), support_(support_bound) {
    if (!(support_ > 0.0)) throw std::invalid_argument("BasisSet: support bound must be positive");
    prepared_.reserve(bases_.size());
    for (const auto& b : bases_) {
      if (!(b.alpha > 0.0) || !(b.beta > 0.0) || !(b.scale > 0.0)) {
        throw std::invalid_argument("BasisSet: alpha, beta, scale must be positive");
      }
      prepared_.push_back(detail::prepare(b));
    }
  }

  [[nodiscard]] std::size_t size() const { return bases_.size(); }
  [[nodiscard]] double support_bound() const { return support_; }
  [[nodiscard]] const BetaBasis& basis(std::size_t i) const { return bases_.at(i); }

  [[nodiscard]] double eval(std::size_t i, double lag) const {
    return detail::eval_prepared(prepared_[i], lag, support_);
  }

 private:
  std::vector<BetaBasis> bases_;
  std::vector<detail::PreparedBasis> prepared_;
  double support_;
};

}  // namespace cobay
