#pragma once

// Annealed SMC from the prior (gamma = 0) to the approximate posterior
// (gamma = 1): ESS-adaptive tempering, multinomial resampling at every
// iteration, and M cycles of (random walk, birth-death) moves calibrated on
// the resampled population.

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lmspec/fexp_model.hpp"
#include "lmspec/kernels_mcmc.hpp"
#include "lmspec/likelihood_approx.hpp"
#include "lmspec/rng.hpp"

namespace lmspec {

struct SmcConfig {
  int N = 1000;
  int M = 20;
  double c = 0.5;
  std::uint64_t seed = 1;
  int k_max = 50;
  std::size_t threads = 1;
  ApproxMode mode = ApproxMode::whittle;
  /// Freeze k (prior draws conditional on k, no birth-death moves).
  std::optional<int> fixed_order;
  /// Allows M = 0 (no moves); only meaningful for testing.
  bool allow_no_moves = false;

  void validate() const;
};

struct IterationRecord {
  double gamma = 0.0;
  double ess = 0.0;               // after reweighting, before resampling
  double log_mean_weight = 0.0;   // log (1/N) sum w_t, the evidence increment
  MoveStats moves;
};

struct ParticleSystem {
  std::vector<ThetaParams> particles;
  Eigen::VectorXd log_weights;
  Eigen::VectorXd cached_loglik;
  double gamma = 0.0;
  double log_evidence = 0.0;  // sum of log_mean_weight
  std::vector<IterationRecord> history;
  /// Streams 0..N-1 belong to particles, stream N to resampling.
  std::vector<Rng> rng_streams;

  std::size_t size() const { return particles.size(); }
  Eigen::VectorXd normalized_weights() const;
};

/// (sum w)^2 / sum w^2 from log-weights. Throws DegenerateSystem when every
/// weight is zero.
double ess(const Eigen::Ref<const Eigen::VectorXd>& log_weights);

/// Next tempering exponent: gamma + alpha with ESS(alpha * loglik) = c N,
/// found by Brent's method, or 1 when the full step already keeps
/// ESS >= c N.
double solve_next_gamma(const Eigen::Ref<const Eigen::VectorXd>& cached_loglik,
                        double gamma, double c);
double solve_next_gamma(const ParticleSystem& system, double c);

/// Indices of N categorical draws with probabilities W_i.
std::vector<std::size_t> multinomial_draw(
    const Eigen::Ref<const Eigen::VectorXd>& weights, std::size_t count, Rng& rng);

/// Resamples particles and cached log-likelihoods in place using the last
/// stream; weights are reset to uniform.
void multinomial_resample(ParticleSystem& system);

/// Runs the sampler on the approximate likelihood of `data`.
ParticleSystem run_smc(const DatasetContext& data, const PriorConfig& prior,
                       const SmcConfig& cfg);

/// Runs the sampler on an arbitrary log-likelihood (must be thread-safe).
ParticleSystem run_smc(const LogLikelihood& log_lik, const PriorConfig& prior,
                       const SmcConfig& cfg);

/// Self-normalized estimate of E[statistic] under the system's weights.
template <typename Fn>
double weighted_mean(const ParticleSystem& system, Fn&& statistic) {
  const Eigen::VectorXd w = system.normalized_weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < system.size(); ++i) {
    acc += w[static_cast<Eigen::Index>(i)] * statistic(system.particles[i]);
  }
  return acc;
}

}  // namespace lmspec
