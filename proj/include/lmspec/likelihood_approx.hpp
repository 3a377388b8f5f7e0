#pragma once

// O(n) approximate marginal likelihood: T(f)^{-1} is replaced by
// T(1 / (4 pi^2 f)), log|T(f)| by its Toeplitz asymptotics D_n, and the
// quadratic form optionally by a periodogram sum at the Fourier frequencies.

#include <Eigen/Core>

#include <string>

#include "lmspec/fexp_model.hpp"
#include "lmspec/fourier_toeplitz.hpp"

namespace lmspec {

/// Data-only quantities, computed once per series and shared read-only.
struct DatasetContext {
  Eigen::VectorXd x;        // raw series
  Eigen::VectorXd x_tilde;  // x - mean(x)
  /// c_0 = sum x~_i^2, c_j = 2 sum_{i=1}^{n-j} x~_i x~_{i+j}
  Eigen::VectorXd c;
  /// periodogram[j] = |sum_t x~_t e^{i t lambda_j}|^2, lambda_j = 2 pi j / n,
  /// j = 0..n-1 (periodogram[0] is zero up to rounding).
  Eigen::VectorXd periodogram;

  // Folded Fourier frequencies j = 1..floor(n/2), for the periodogram sum.
  Eigen::VectorXd fold_cos;       // cos(lambda_j)
  Eigen::VectorXd fold_log_base;  // log |1 - e^{-i lambda_j}|^2
  Eigen::VectorXd fold_weight;    // (I(lambda_j) + I(lambda_{n-j})) / n, or I/n at Nyquist

  Eigen::Index size() const { return x.size(); }
};

/// Throws DataError for n < 4 or non-finite values.
DatasetContext prepare_dataset(const Eigen::Ref<const Eigen::VectorXd>& x);

enum class ApproxMode { whittle, toeplitz };

ApproxMode parse_approx_mode(const std::string& name);
std::string to_string(ApproxMode mode);

/// sum_j c_j gamma_h(j), h = 1 / (4 pi^2 fbar_theta) = x~^T T(h) x~.
double quadform_approx_toeplitz(const ThetaParams& theta,
                                const DatasetContext& data,
                                Eigen::Index grid_size = 0);

/// Riemann-sum form of the same quadratic form over the Fourier
/// frequencies: (1 / (2 pi n)) sum_{j=1}^{n-1} I(lambda_j) / fbar(lambda_j*),
/// lambda_j* = min(lambda_j, 2 pi - lambda_j).
double quadform_whittle(const ThetaParams& theta, const DatasetContext& data);

/// D_n = d^2 log n + 1/4 sum j xi_j^2 + d sum j xi_j
///       + log(G(1 - d)^2 / G(1 - 2d)).
double log_det_approx(const ThetaParams& theta, Eigen::Index n);

/// -D_n / 2 - (a + n/2) log(b + Q/2), Q from the chosen quadratic form.
double approx_log_lik(const ThetaParams& theta, const DatasetContext& data,
                      const PriorConfig& cfg,
                      ApproxMode mode = ApproxMode::whittle);

}  // namespace lmspec
