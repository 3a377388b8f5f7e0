#pragma once

// FEXP and ARFIMA spectral densities, the trans-dimensional FEXP parameter
// and its prior.

#include <Eigen/Core>

#include <cmath>
#include <variant>

#include "lmspec/fourier_toeplitz.hpp"
#include "lmspec/rng.hpp"

namespace lmspec {

inline double logistic(double t) {
  return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

/// log(1 + e^x) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// theta = (k, theta_k), theta_k = (logit(2d), xi_1, ..., xi_k).
///
/// The free block is stored as one vector so that theta_{k+1} = (theta_k,
/// xi_{k+1}) is literally an extension of theta_k.
struct ThetaParams {
  Eigen::VectorXd coords = Eigen::VectorXd::Zero(1);

  ThetaParams() = default;
  explicit ThetaParams(Eigen::VectorXd block) : coords(std::move(block)) {}

  static ThetaParams from_d(double d, const Eigen::VectorXd& xi = {});

  int order() const { return static_cast<int>(coords.size()) - 1; }
  double t() const { return coords[0]; }
  /// d = logistic(t) / 2, in (0, 1/2) for finite t.
  double d() const { return 0.5 * logistic(coords[0]); }
  auto xi() const { return coords.tail(coords.size() - 1); }
  double xi(int j) const { return coords[j]; }  // 1-based, j <= order()

  bool operator==(const ThetaParams& other) const {
    return coords.size() == other.coords.size() && coords == other.coords;
  }
};

struct PriorConfig {
  double geom_p = 0.2;
  double beta = 1.0;
  double xi_var0 = 100.0;
  double a = 0.5;
  double b = 0.5;
  double g_mu = 0.1;
  double m_mu = 0.0;

  /// Throws ConfigError when a hyperparameter is outside its domain.
  void validate() const;
};

/// f(lambda) = scale/(2pi) |1 - e^{-i lambda}|^{-2d} exp{sum_j xi_j cos(j lambda)}.
/// scale = 1 gives the normalized density fbar_theta.
struct FexpSpectrum {
  double d = 0.0;
  Eigen::VectorXd xi;
  double scale = 1.0;
};

/// f(lambda) = sigma2/(2pi) |1 - e^{-i lambda}|^{-2d}
///             |1 + sum_j ma_j e^{-ij lambda}|^2 / |1 - sum_j phi_j e^{-ij lambda}|^2
struct ArfimaSpectrum {
  double d = 0.0;
  Eigen::VectorXd phi;
  Eigen::VectorXd ma;
  double sigma2 = 1.0;
};

using SpectralModel = std::variant<FexpSpectrum, ArfimaSpectrum>;

SpectralModel fexp_normalized(const ThetaParams& theta);

double long_memory_exponent(const SpectralModel& model);

/// g(lambda) with f(lambda) = |1 - e^{-i lambda}|^{-2d} g(lambda); bounded.
double short_memory_factor(const SpectralModel& model, double lambda);

/// f(lambda). Throws NumericalError at lambda = 0 when d > 0.
double eval_fbar(const SpectralModel& model, double lambda);

/// sum_{j=1}^{k} coeffs_j cos(j lambda) by Clenshaw's recurrence.
/// `coeffs` holds coeffs_1..coeffs_k.
double cosine_series(const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                     double cos_lambda);

/// gamma_f(0..n-1) for the model, splitting off the long-memory singularity.
AutocovarianceSeq model_acf(const SpectralModel& model, Eigen::Index n,
                            const FourierGrid& grid);
AutocovarianceSeq model_acf(const SpectralModel& model, Eigen::Index n);

/// Throws ConfigError when d is outside [0, 1/2) or a parameter is not finite.
void validate_model(const SpectralModel& model);

// ---- prior ---------------------------------------------------------------

double log_k_mass(int k, const PriorConfig& cfg);

/// Density of t = logit(2d) when d ~ Uniform[0, 1/2]: sigma(t)(1 - sigma(t)).
double log_t_density(double t);

/// Prior variance of xi_j: xi_var0 * j^{-2 beta}.
double xi_prior_variance(int j, const PriorConfig& cfg);

double log_normal_density(double x, double variance);

/// log p(theta_k | k): the t density plus the xi_j Gaussians (no k mass).
double log_conditional_prior(const ThetaParams& theta, const PriorConfig& cfg);

/// log p(k) + log p(theta_k | k).
double log_prior(const ThetaParams& theta, const PriorConfig& cfg);

/// log N(xi_new; 0, xi_prior_variance(k + 1)).
double log_conditional_birth_density(const ThetaParams& theta, double xi_new,
                                     const PriorConfig& cfg);

ThetaParams sample_prior(const PriorConfig& cfg, Rng& rng);

}  // namespace lmspec
