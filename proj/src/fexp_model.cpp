#include "lmspec/fexp_model.hpp"

#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "lmspec/errors.hpp"

namespace lmspec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

// |1 + sign * sum_j c_j e^{-ij lambda}|^2
double poly_modulus_sq(const Eigen::VectorXd& coeffs, double sign,
                       double lambda) {
  std::complex<double> acc(1.0, 0.0);
  for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
    acc += sign * coeffs[j] *
           std::polar(1.0, -static_cast<double>(j + 1) * lambda);
  }
  return std::norm(acc);
}

}  // namespace

ThetaParams ThetaParams::from_d(double d, const Eigen::VectorXd& xi) {
  if (!(d > 0.0 && d < 0.5)) {
    throw ConfigError("ThetaParams: d = " + std::to_string(d) +
                      " outside (0, 1/2)");
  }
  Eigen::VectorXd block(xi.size() + 1);
  block[0] = logit(2.0 * d);
  block.tail(xi.size()) = xi;
  return ThetaParams(std::move(block));
}

void PriorConfig::validate() const {
  if (!(geom_p > 0.0 && geom_p < 1.0)) throw ConfigError("prior.geom_p must lie in (0, 1)");
  if (!(a > 0.0)) throw ConfigError("prior.a must be > 0");
  if (!(b > 0.0)) throw ConfigError("prior.b must be > 0");
  if (!(g_mu > 0.0)) throw ConfigError("prior.g_mu must be > 0");
  if (!(xi_var0 > 0.0)) throw ConfigError("prior.xi_var0 must be > 0");
  if (!(beta >= 0.0)) throw ConfigError("prior.beta must be >= 0");
  if (!std::isfinite(m_mu)) throw ConfigError("prior.m_mu must be finite");
}

SpectralModel fexp_normalized(const ThetaParams& theta) {
  return FexpSpectrum{theta.d(), theta.xi(), 1.0};
}

double long_memory_exponent(const SpectralModel& model) {
  return std::visit([](const auto& m) { return m.d; }, model);
}

double cosine_series(const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                     double cos_lambda) {
  const Eigen::Index k = coeffs.size();
  if (k == 0) return 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  for (Eigen::Index j = k; j >= 1; --j) {
    const double b0 = coeffs[j - 1] + 2.0 * cos_lambda * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return b1 * cos_lambda - b2;
}

double short_memory_factor(const SpectralModel& model, double lambda) {
  return std::visit(
      Overloaded{
          [&](const FexpSpectrum& m) {
            return m.scale / kTwoPi * std::exp(cosine_series(m.xi, std::cos(lambda)));
          },
          [&](const ArfimaSpectrum& m) {
            return m.sigma2 / kTwoPi * poly_modulus_sq(m.ma, 1.0, lambda) /
                   poly_modulus_sq(m.phi, -1.0, lambda);
          }},
      model);
}

double eval_fbar(const SpectralModel& model, double lambda) {
  const double d = long_memory_exponent(model);
  const double g = short_memory_factor(model, lambda);
  if (d == 0.0) return g;
  const double base = abs_one_minus_expi_sq(lambda);
  if (base == 0.0) {
    throw NumericalError("eval_fbar: spectral density diverges at lambda = 0 (d = " +
                         std::to_string(d) + ")");
  }
  return std::pow(base, -d) * g;
}

void validate_model(const SpectralModel& model) {
  const double d = long_memory_exponent(model);
  if (!(d >= 0.0 && d < 0.5)) {
    throw ConfigError("spectral model: d = " + std::to_string(d) +
                      " outside [0, 1/2)");
  }
  std::visit(Overloaded{
                 [](const FexpSpectrum& m) {
                   if (!m.xi.allFinite() || !(m.scale > 0.0)) {
                     throw ConfigError("FEXP model: xi must be finite and scale > 0");
                   }
                 },
                 [](const ArfimaSpectrum& m) {
                   if (!m.phi.allFinite() || !m.ma.allFinite() || !(m.sigma2 > 0.0)) {
                     throw ConfigError("ARFIMA model: coefficients must be finite and sigma2 > 0");
                   }
                 }},
             model);
}

AutocovarianceSeq model_acf(const SpectralModel& model, Eigen::Index n,
                            const FourierGrid& grid) {
  const double d = long_memory_exponent(model);
  return fourier_coeffs_longmemory(
      d, [&](double lambda) { return short_memory_factor(model, lambda); }, n,
      grid);
}

AutocovarianceSeq model_acf(const SpectralModel& model, Eigen::Index n) {
  return model_acf(model, n, FourierGrid::for_length(n));
}

double log_k_mass(int k, const PriorConfig& cfg) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  return std::log(cfg.geom_p) + k * std::log1p(-cfg.geom_p);
}

double log_t_density(double t) { return -softplus(-t) - softplus(t); }

double xi_prior_variance(int j, const PriorConfig& cfg) {
  return cfg.xi_var0 * std::pow(static_cast<double>(j), -2.0 * cfg.beta);
}

double log_normal_density(double x, double variance) {
  return -0.5 * std::log(kTwoPi * variance) - 0.5 * x * x / variance;
}

double log_conditional_prior(const ThetaParams& theta, const PriorConfig& cfg) {
  double lp = log_t_density(theta.t());
  for (int j = 1; j <= theta.order(); ++j) {
    lp += log_normal_density(theta.xi(j), xi_prior_variance(j, cfg));
  }
  return lp;
}

double log_prior(const ThetaParams& theta, const PriorConfig& cfg) {
  return log_k_mass(theta.order(), cfg) + log_conditional_prior(theta, cfg);
}

double log_conditional_birth_density(const ThetaParams& theta, double xi_new,
                                     const PriorConfig& cfg) {
  return log_normal_density(xi_new, xi_prior_variance(theta.order() + 1, cfg));
}

ThetaParams sample_prior(const PriorConfig& cfg, Rng& rng) {
  std::geometric_distribution<int> geom(cfg.geom_p);
  const int k = geom(rng);
  Eigen::VectorXd block(k + 1);
  // d ~ U(0, 1/2)  <=>  2d ~ U(0, 1)
  block[0] = logit(uniform_open(rng));
  for (int j = 1; j <= k; ++j) {
    block[j] = std::sqrt(xi_prior_variance(j, cfg)) * standard_normal(rng);
  }
  return ThetaParams(std::move(block));
}

}  // namespace lmspec
