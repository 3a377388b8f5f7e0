#pragma once

// Importance-sampling correction of approximate-posterior particles by
// w = p(x | theta) / ptilde(x | theta).

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "lmspec/fexp_model.hpp"
#include "lmspec/kernels_mcmc.hpp"
#include "lmspec/likelihood_approx.hpp"
#include "lmspec/rng.hpp"

namespace lmspec {

struct CorrectedSample {
  std::vector<ThetaParams> particles;
  /// Index of each retained particle in the input set.
  std::vector<std::size_t> source_index;
  Eigen::VectorXd log_w_corr;  // -inf where the exact likelihood failed
  Eigen::VectorXd weights;     // normalized, sum to 1
  double ess = 0.0;
  double ess_fraction = 0.0;   // ess / count, in (0, 1]
  double seconds = 0.0;        // wall clock of the weight evaluation
  std::size_t failures = 0;    // particles with a failed Cholesky

  std::size_t size() const { return particles.size(); }
};

struct CorrectionOptions {
  std::optional<std::size_t> subsample;
  std::size_t threads = 1;
  /// Series longer than this are refused unless allow_large is set.
  Eigen::Index max_n = 20000;
  bool allow_large = false;
  ApproxMode mode = ApproxMode::whittle;
  Eigen::Index grid_size = 0;
};

/// Log-weights log p - log ptilde over (a uniform subsample without
/// replacement of) the particles, using the exact marginal likelihood and
/// the approximation in `opts.mode`.
CorrectedSample correction_weights(std::span<const ThetaParams> particles,
                                   const DatasetContext& data,
                                   const PriorConfig& prior,
                                   const CorrectionOptions& opts, Rng& rng);

/// Same with injected evaluators. `base_log_weights`, when non-empty, holds
/// prior log-weights of the input particles (e.g. for weighted input).
CorrectedSample correction_weights(std::span<const ThetaParams> particles,
                                   const LogLikelihood& exact,
                                   const LogLikelihood& approx,
                                   const CorrectionOptions& opts, Rng& rng,
                                   std::span<const double> base_log_weights = {});

/// sum_j W_j statistic(theta_j).
template <typename Fn>
double corrected_estimate(const CorrectedSample& sample, Fn&& statistic) {
  double acc = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double w = sample.weights[static_cast<Eigen::Index>(i)];
    if (w > 0.0) acc += w * statistic(sample.particles[i]);
  }
  return acc;
}

/// Standard error of the self-normalized estimate:
/// sqrt(sum W_j^2 (statistic_j - estimate)^2).
template <typename Fn>
double corrected_standard_error(const CorrectedSample& sample, Fn&& statistic) {
  const double est = corrected_estimate(sample, statistic);
  double acc = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double w = sample.weights[static_cast<Eigen::Index>(i)];
    if (w > 0.0) {
      const double dev = statistic(sample.particles[i]) - est;
      acc += w * w * dev * dev;
    }
  }
  return std::sqrt(acc);
}

}  // namespace lmspec
