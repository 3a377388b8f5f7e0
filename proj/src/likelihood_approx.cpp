#include "lmspec/likelihood_approx.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "lmspec/errors.hpp"
#include "lmspec/fft.hpp"
#include "lmspec/special_functions.hpp"

namespace lmspec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// r_j = sum_i x_i x_{i+j}, j = 0..n-1, via a zero-padded transform.
Eigen::VectorXd lagged_products(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  const auto m = static_cast<Eigen::Index>(
      std::bit_ceil(static_cast<unsigned long long>(2 * n)));
  ComplexVector<double> buf = ComplexVector<double>::Zero(m);
  for (Eigen::Index i = 0; i < n; ++i) buf[i] = x[i];
  buf = fft_pow2<double>(std::move(buf));
  for (Eigen::Index i = 0; i < m; ++i) buf[i] = std::norm(buf[i]);
  buf = ifft_pow2<double>(std::move(buf));
  Eigen::VectorXd r(n);
  for (Eigen::Index j = 0; j < n; ++j) r[j] = buf[j].real();
  return r;
}

}  // namespace

DatasetContext prepare_dataset(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index n = x.size();
  if (n < 4) throw DataError("prepare_dataset: need at least 4 observations, got " + std::to_string(n));
  if (!x.allFinite()) throw DataError("prepare_dataset: series contains non-finite values");

  DatasetContext data;
  data.x = x;
  data.x_tilde = x.array() - x.mean();

  data.c = lagged_products(data.x_tilde);
  data.c[0] = data.x_tilde.squaredNorm();
  data.c.tail(n - 1) *= 2.0;

  const ComplexVector<double> spectrum = dft<double>(data.x_tilde.cast<std::complex<double>>());
  data.periodogram = spectrum.cwiseAbs2();

  const Eigen::Index half = n / 2;
  data.fold_cos.resize(half);
  data.fold_log_base.resize(half);
  data.fold_weight.resize(half);
  const double nd = static_cast<double>(n);
  for (Eigen::Index j = 1; j <= half; ++j) {
    const double lambda = kTwoPi * static_cast<double>(j) / nd;
    data.fold_cos[j - 1] = std::cos(lambda);
    data.fold_log_base[j - 1] = std::log(abs_one_minus_expi_sq(lambda));
    const bool nyquist = (2 * j == n);
    data.fold_weight[j - 1] =
        (nyquist ? data.periodogram[j]
                 : data.periodogram[j] + data.periodogram[n - j]) / nd;
  }
  return data;
}

ApproxMode parse_approx_mode(const std::string& name) {
  if (name == "whittle") return ApproxMode::whittle;
  if (name == "toeplitz") return ApproxMode::toeplitz;
  throw ConfigError("unknown likelihood mode '" + name + "' (expected whittle|toeplitz)");
}

std::string to_string(ApproxMode mode) {
  return mode == ApproxMode::whittle ? "whittle" : "toeplitz";
}

double quadform_whittle(const ThetaParams& theta, const DatasetContext& data) {
  const double d = theta.d();
  const auto xi = theta.xi();
  double q = 0.0;
  for (Eigen::Index j = 0; j < data.fold_weight.size(); ++j) {
    const double log_inv_f =
        d * data.fold_log_base[j] - cosine_series(xi, data.fold_cos[j]);
    q += data.fold_weight[j] * std::exp(log_inv_f);
  }
  return q;
}

double quadform_approx_toeplitz(const ThetaParams& theta,
                                const DatasetContext& data,
                                Eigen::Index grid_size) {
  const Eigen::Index n = data.size();
  const FourierGrid grid = FourierGrid::for_length(n, grid_size);
  const double d = theta.d();
  const auto xi = theta.xi();
  // h vanishes like C |lambda|^{2d} at 0. The node value at 0 is chosen so the
  // interpolant integrates C |lambda|^{2d} exactly over the two adjacent cells;
  // it tends to h(0) = C as d -> 0 and is continuous in d.
  const double c0 = std::exp(-cosine_series(xi, 1.0)) / kTwoPi;
  const double h_origin = c0 * std::pow(abs_one_minus_expi_sq(grid.spacing), d) *
                          (1.0 - 2.0 * d) / (1.0 + 2.0 * d);
  const AutocovarianceSeq gamma_h = fourier_coeffs_bounded(
      [&](double lambda) {
        if (lambda == 0.0) return h_origin;
        return std::pow(abs_one_minus_expi_sq(lambda), d) *
               std::exp(-cosine_series(xi, std::cos(lambda))) / kTwoPi;
      },
      n, grid);
  return data.c.dot(gamma_h);
}

double log_det_approx(const ThetaParams& theta, Eigen::Index n) {
  if (n < 2) throw ConfigError("log_det_approx: n must be >= 2");
  const double d = theta.d();
  double weighted_sq = 0.0;
  double weighted = 0.0;
  for (int j = 1; j <= theta.order(); ++j) {
    const double xj = theta.xi(j);
    weighted_sq += j * xj * xj;
    weighted += j * xj;
  }
  return d * d * std::log(static_cast<double>(n)) + 0.25 * weighted_sq +
         d * weighted + 2.0 * log_barnes_g(1.0 - d) - log_barnes_g(1.0 - 2.0 * d);
}

double approx_log_lik(const ThetaParams& theta, const DatasetContext& data,
                      const PriorConfig& cfg, ApproxMode mode) {
  if (!theta.coords.allFinite()) return -std::numeric_limits<double>::infinity();
  const double q = mode == ApproxMode::whittle ? quadform_whittle(theta, data)
                                               : quadform_approx_toeplitz(theta, data);
  const double nd = static_cast<double>(data.size());
  const double out = -0.5 * log_det_approx(theta, data.size()) -
                     (cfg.a + 0.5 * nd) * std::log(cfg.b + 0.5 * q);
  return std::isnan(out) ? -std::numeric_limits<double>::infinity() : out;
}

}  // namespace lmspec
