#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cobay/basis.hpp"
#include "cobay/common.hpp"
#include "cobay/model.hpp"
#include "cobay/polya_gamma.hpp"

namespace cobay {

struct GibbsConfig {
  int iterations = 100;
  int burn_in = 50;
  double prior_variance = 0.5;

  void validate() const {
    if (iterations <= 0) throw std::invalid_argument("GibbsConfig: iterations must be positive");
    if (burn_in < 0 || burn_in >= iterations) {
      throw std::invalid_argument("GibbsConfig: burn_in must lie in [0, iterations)");
    }
    if (!(prior_variance > 0.0)) {
      throw std::invalid_argument("GibbsConfig: prior_variance must be positive");
    }
  }
};

// One latent point of the marked Poisson process: location and PG mark.
struct MarkedPoint {
  double t;
  double omega;
};

using PosteriorSamples = std::vector<ModelParams>;

namespace detail {

// Feature matrix with one column per time point: column j = Phi(t_j) against
// the given window history.
inline Eigen::MatrixXd feature_matrix(std::span<const double> window, const BasisSet& basis,
                                      std::span<const double> points) {
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(basis.size()) + 1,
                      static_cast<Eigen::Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) {
    phi.col(static_cast<Eigen::Index>(j)) = features(window, basis, points[j]);
  }
  return phi;
}

inline std::vector<double> sample_marks_for_activations(const Eigen::VectorXd& h, Rng& rng) {
  std::vector<double> marks(static_cast<std::size_t>(h.size()));
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    marks[static_cast<std::size_t>(i)] = pg_sample(h[i], rng);
  }
  return marks;
}

struct LatentSample {
  std::vector<MarkedPoint> points;
  Eigen::MatrixXd feats;  // (B+1) x R, columns aligned with points
};

// Thinning construction of the latent marked process on [t_tau, t_m]:
// R0 ~ Poisson(lambda_bar * T_m) candidates, placed uniformly, kept with
// probability sigmoid(-h(t)), each kept point marked with PG(1, h(t)).
inline LatentSample sample_latent_with_features(const ModelParams& params,
                                                std::span<const double> window,
                                                const BasisSet& basis, Rng& rng) {
  const double t_lo = window.front();
  const double t_hi = window.back();
  const double span = t_hi - t_lo;

  const long n_candidates =
      std::poisson_distribution<long>(params.lambda_bar * span)(rng);

  LatentSample out;
  std::vector<Eigen::VectorXd> kept_feats;
  std::uniform_real_distribution<double> place(t_lo, t_hi);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (long r = 0; r < n_candidates; ++r) {
    const double t = place(rng);
    Eigen::VectorXd phi = features(window, basis, t);
    const double h = params.weights.dot(phi);
    if (coin(rng) < sigmoid(-h)) {
      out.points.push_back(MarkedPoint{t, pg_sample(h, rng)});
      kept_feats.push_back(std::move(phi));
    }
  }
  out.feats.resize(static_cast<Eigen::Index>(basis.size()) + 1,
                   static_cast<Eigen::Index>(kept_feats.size()));
  for (std::size_t j = 0; j < kept_feats.size(); ++j) {
    out.feats.col(static_cast<Eigen::Index>(j)) = kept_feats[j];
  }
  return out;
}

// Cholesky with escalating diagonal jitter: 1e-10 * trace/dim, then x10 and
// x100.  Failure after that surfaces as a numerical error.
inline Eigen::LLT<Eigen::MatrixXd> cholesky_with_jitter(const Eigen::MatrixXd& precision) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() == Eigen::Success) return llt;

  const Eigen::Index dim = precision.rows();
  double jitter = 1e-10 * precision.trace() / static_cast<double>(dim);
  for (int attempt = 0; attempt < 3; ++attempt) {
    log_message(LogLevel::warn,
                "weight conditional: adding jitter " + std::to_string(jitter));
    Eigen::MatrixXd bumped = precision;
    bumped.diagonal().array() += jitter;
    llt.compute(bumped);
    if (llt.info() == Eigen::Success) return llt;
    jitter *= 10.0;
  }
  throw numerical_error("weight conditional: precision matrix is not positive definite");
}

}  // namespace detail

// omega_i ~ PG(1, h(t_i)) for every event in the window.
[[nodiscard]] inline std::vector<double> sample_event_marks(const ModelParams& params,
                                                            std::span<const double> window,
                                                            const BasisSet& basis, Rng& rng) {
  if (window.empty()) throw std::invalid_argument("sample_event_marks: window must be non-empty");
  params.validate(basis.size());
  const Eigen::MatrixXd phi = detail::feature_matrix(window, basis, window);
  return detail::sample_marks_for_activations(phi.transpose() * params.weights, rng);
}

[[nodiscard]] inline std::vector<MarkedPoint> sample_latent_pp(const ModelParams& params,
                                                               std::span<const double> window,
                                                               const BasisSet& basis,
                                                               Rng& rng) {
  if (window.size() < 2) {
    throw std::invalid_argument("sample_latent_pp: window needs at least two events");
  }
  params.validate(basis.size());
  return detail::sample_latent_with_features(params, window, basis, rng).points;
}

// lambda_bar | Pi ~ Gamma(shape = N_m + R, rate = T_m).
[[nodiscard]] inline double sample_lambda_bar(std::size_t n_events, std::size_t n_latent,
                                              double t_span, Rng& rng) {
  if (!(t_span > 0.0)) throw std::invalid_argument("sample_lambda_bar: span must be positive");
  if (n_events + n_latent == 0) {
    throw std::invalid_argument("sample_lambda_bar: shape must be positive");
  }
  const double shape = static_cast<double>(n_events + n_latent);
  return std::gamma_distribution<double>(shape, 1.0 / t_span)(rng);
}

struct WeightPosterior {
  Eigen::VectorXd mean;
  Eigen::LLT<Eigen::MatrixXd> precision_llt;
};

// Gaussian conditional of the weights: precision Phi D Phi^T + I/sigma2,
// mean = precision^-1 Phi v with v = +1/2 on events and -1/2 on latent
// points.  `feats` holds event columns first, then latent columns.
[[nodiscard]] inline WeightPosterior weight_posterior(const Eigen::MatrixXd& feats,
                                                      const Eigen::VectorXd& marks,
                                                      const Eigen::VectorXd& v,
                                                      double prior_variance) {
  if (feats.cols() != marks.size() || feats.cols() != v.size()) {
    throw std::invalid_argument("weight_posterior: column/mark dimension mismatch");
  }
  if (!(prior_variance > 0.0)) {
    throw std::invalid_argument("weight_posterior: prior variance must be positive");
  }
  const Eigen::Index dim = feats.rows();
  Eigen::MatrixXd precision = feats * marks.asDiagonal() * feats.transpose();
  precision.diagonal().array() += 1.0 / prior_variance;

  WeightPosterior post;
  post.precision_llt = detail::cholesky_with_jitter(precision);
  post.mean = post.precision_llt.solve(feats * v);
  (void)dim;
  return post;
}

[[nodiscard]] inline Eigen::VectorXd sample_weights_from(const WeightPosterior& post,
                                                         Rng& rng) {
  Eigen::VectorXd z(post.mean.size());
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = gauss(rng);
  return post.mean + post.precision_llt.matrixU().solve(z);
}

// Dense mean/covariance of the weight conditional; exposed for verification.
[[nodiscard]] inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> weight_posterior_moments(
    const Eigen::MatrixXd& feats, const Eigen::VectorXd& marks, const Eigen::VectorXd& v,
    double prior_variance) {
  const WeightPosterior post = weight_posterior(feats, marks, v, prior_variance);
  const Eigen::Index dim = post.mean.size();
  const Eigen::MatrixXd cov =
      post.precision_llt.solve(Eigen::MatrixXd::Identity(dim, dim));
  return {post.mean, cov};
}

// Spec-level convenience: draw w | omega, Pi from window data directly.
[[nodiscard]] inline Eigen::VectorXd sample_weights(std::span<const double> window,
                                                    const BasisSet& basis,
                                                    std::span<const double> event_marks,
                                                    std::span<const MarkedPoint> latent,
                                                    double prior_variance, Rng& rng) {
  if (window.size() != event_marks.size()) {
    throw std::invalid_argument("sample_weights: one mark per window event required");
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(basis.size()) + 1;
  const Eigen::Index n = static_cast<Eigen::Index>(window.size());
  const Eigen::Index r = static_cast<Eigen::Index>(latent.size());

  Eigen::MatrixXd feats(dim, n + r);
  Eigen::VectorXd marks(n + r);
  Eigen::VectorXd v(n + r);
  feats.leftCols(n) = detail::feature_matrix(window, basis, window);
  for (Eigen::Index i = 0; i < n; ++i) {
    marks[i] = event_marks[static_cast<std::size_t>(i)];
    v[i] = 0.5;
  }
  for (Eigen::Index j = 0; j < r; ++j) {
    const auto& pt = latent[static_cast<std::size_t>(j)];
    feats.col(n + j) = features(window, basis, pt.t);
    marks[n + j] = pt.omega;
    v[n + j] = -0.5;
  }
  return sample_weights_from(weight_posterior(feats, marks, v, prior_variance), rng);
}

// Default chain start: weights at the prior mean, lambda_bar at the crude
// event-rate estimate N_m / T_m.
[[nodiscard]] inline ModelParams default_chain_init(std::span<const double> window,
                                                    std::size_t n_bases) {
  if (window.size() < 2) {
    throw std::invalid_argument("default_chain_init: window needs at least two events");
  }
  const double span = window.back() - window.front();
  return ModelParams{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_bases) + 1),
                     static_cast<double>(window.size()) / span};
}

// Augmented Gibbs sweep order: event marks, latent process, lambda_bar,
// weights.  Returns the draws retained after burn-in, in sweep order; the
// last entry doubles as the warm start for a subsequent chain.
[[nodiscard]] inline PosteriorSamples run_chain(std::span<const double> window,
                                                const BasisSet& basis,
                                                const GibbsConfig& config,
                                                const ModelParams& init, Rng& rng) {
  config.validate();
  if (window.size() < 2) {
    throw std::invalid_argument("run_chain: window needs at least two events");
  }
  init.validate(basis.size());

  const Eigen::Index dim = static_cast<Eigen::Index>(basis.size()) + 1;
  const Eigen::Index n = static_cast<Eigen::Index>(window.size());
  const double span = window.back() - window.front();

  // Event features never change within the chain; latent ones do.
  const Eigen::MatrixXd event_feats = detail::feature_matrix(window, basis, window);
  const Eigen::VectorXd event_feat_rowsum = event_feats.rowwise().sum();

  ModelParams params = init;
  PosteriorSamples samples;
  samples.reserve(static_cast<std::size_t>(config.iterations - config.burn_in));

  for (int iter = 0; iter < config.iterations; ++iter) {
    const std::vector<double> event_marks =
        detail::sample_marks_for_activations(event_feats.transpose() * params.weights, rng);

    detail::LatentSample latent =
        detail::sample_latent_with_features(params, window, basis, rng);
    const Eigen::Index r = latent.feats.cols();

    params.lambda_bar =
        sample_lambda_bar(window.size(), latent.points.size(), span, rng);

    Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      precision.noalias() += event_marks[static_cast<std::size_t>(i)] *
                             (event_feats.col(i) * event_feats.col(i).transpose());
    }
    for (Eigen::Index j = 0; j < r; ++j) {
      precision.noalias() += latent.points[static_cast<std::size_t>(j)].omega *
                             (latent.feats.col(j) * latent.feats.col(j).transpose());
    }
    precision.diagonal().array() += 1.0 / config.prior_variance;

    const Eigen::VectorXd b =
        0.5 * event_feat_rowsum - 0.5 * latent.feats.rowwise().sum();

    WeightPosterior post;
    post.precision_llt = detail::cholesky_with_jitter(precision);
    post.mean = post.precision_llt.solve(b);
    params.weights = sample_weights_from(post, rng);

    if (iter >= config.burn_in) samples.push_back(params);
  }
  return samples;
}

}  // namespace cobay
