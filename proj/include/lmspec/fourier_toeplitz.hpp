#pragma once

// Fourier integrals gamma_f(l) = int_{-pi}^{pi} f(lambda) exp(i l lambda)
// d lambda of spectral densities, by FFT of a piecewise-linear interpolant,
// and the Toeplitz covariance matrices they define.

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "lmspec/errors.hpp"
#include "lmspec/fft.hpp"

namespace lmspec {

/// gamma(0..n-1) of a spectral density.
using AutocovarianceSeq = Eigen::VectorXd;

/// Uniform grid lambda_j = -pi + j*spacing, j = 0..size, spacing = 2 pi / size.
struct FourierGrid {
  Eigen::Index size = 0;  // M, a power of two
  double spacing = 0.0;   // 2 pi / M

  /// Smallest power of two with M >= 2n, or `override_size` when nonzero.
  static FourierGrid for_length(Eigen::Index n, Eigen::Index override_size = 0);

  /// Nodes are built as (j - M/2) * spacing so that node(M - j) == -node(j)
  /// bit-for-bit and node(M/2) == 0.
  double node(Eigen::Index j) const {
    return static_cast<double>(j - size / 2) * spacing;
  }
};

/// Fourier transform of the linear interpolation kernel,
/// W(x) = 2 (1 - cos x) / x^2, with a Taylor branch near 0.
double interpolation_kernel_ft(double x);

namespace detail {
AutocovarianceSeq assemble_interpolated_coeffs(const Eigen::VectorXd& values,
                                               Eigen::Index n,
                                               const FourierGrid& grid);
}

/// gamma_g(l), l = 0..n-1, for a bounded, even, real integrand g sampled on
/// `grid`. Throws EvaluationError naming the node if g is non-finite there.
template <typename Fn>
AutocovarianceSeq fourier_coeffs_bounded(Fn&& g, Eigen::Index n,
                                         const FourierGrid& grid) {
  if (n < 1) throw ConfigError("fourier_coeffs_bounded: n must be >= 1");
  if (n > grid.size / 2 + 1) {
    throw ConfigError("fourier_coeffs_bounded: grid of size " +
                      std::to_string(grid.size) + " too small for " +
                      std::to_string(n) + " coefficients");
  }
  Eigen::VectorXd values(grid.size + 1);
  for (Eigen::Index j = 0; j <= grid.size; ++j) {
    const double v = g(grid.node(j));
    if (!std::isfinite(v)) {
      throw EvaluationError("integrand is not finite", static_cast<std::size_t>(j));
    }
    values[j] = v;
  }
  return detail::assemble_interpolated_coeffs(values, n, grid);
}

template <typename Fn>
AutocovarianceSeq fourier_coeffs_bounded(Fn&& g, Eigen::Index n) {
  return fourier_coeffs_bounded(std::forward<Fn>(g), n,
                                FourierGrid::for_length(n));
}

/// (1/2pi) int |1 - e^{-i lambda}|^{-2d} e^{i l lambda} d lambda, the
/// autocovariance of fractionally integrated noise. Requires 0 <= d < 1/2.
double fracdiff_acf(double d, Eigen::Index lag);

/// fracdiff_acf(d, 0..n-1) using the ratio recurrence
/// gamma(l+1) = gamma(l) (l + d) / (l + 1 - d).
AutocovarianceSeq fracdiff_acf_seq(double d, Eigen::Index n);

/// |1 - e^{-i lambda}|^2 = 4 sin^2(lambda / 2), accurate near 0.
inline double abs_one_minus_expi_sq(double lambda) {
  const double s = std::sin(0.5 * lambda);
  return 4.0 * s * s;
}

/// gamma_f(l), l = 0..n-1, for f(lambda) = |1 - e^{-i lambda}|^{-2d} g(lambda)
/// with g bounded and even. The singular part g(0) |1 - e^{-i lambda}|^{-2d}
/// is integrated in closed form; the remainder, which vanishes at 0, goes
/// through the interpolated FFT.
template <typename Fn>
AutocovarianceSeq fourier_coeffs_longmemory(double d, Fn&& g, Eigen::Index n,
                                            const FourierGrid& grid) {
  if (!(d >= 0.0 && d < 0.5)) {
    throw ConfigError("fourier_coeffs_longmemory: d = " + std::to_string(d) +
                      " outside [0, 1/2)");
  }
  if (d == 0.0) return fourier_coeffs_bounded(std::forward<Fn>(g), n, grid);
  const double g0 = g(0.0);
  if (!std::isfinite(g0)) {
    throw EvaluationError("short-memory factor is not finite at 0",
                          static_cast<std::size_t>(grid.size / 2));
  }
  AutocovarianceSeq acf =
      (2.0 * std::numbers::pi * g0) * fracdiff_acf_seq(d, n);
  acf += fourier_coeffs_bounded(
      [&](double lambda) {
        if (lambda == 0.0) return 0.0;
        return std::pow(abs_one_minus_expi_sq(lambda), -d) * (g(lambda) - g0);
      },
      n, grid);
  return acf;
}

template <typename Fn>
AutocovarianceSeq fourier_coeffs_longmemory(double d, Fn&& g, Eigen::Index n) {
  return fourier_coeffs_longmemory(d, std::forward<Fn>(g), n,
                                   FourierGrid::for_length(n));
}

/// Sigma(l, m) = acf(|l - m|) + ridge. The ridge is added to every entry,
/// i.e. Sigma = T + ridge * E with E the all-ones matrix.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> build_toeplitz(
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& acf,
    Scalar ridge, Eigen::Index n) {
  if (acf.size() < n) {
    throw ConfigError("build_toeplitz: need " + std::to_string(n) +
                      " autocovariances, got " + std::to_string(acf.size()));
  }
  if (!(ridge >= Scalar(0))) throw ConfigError("build_toeplitz: ridge < 0");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sigma(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    for (Eigen::Index row = col; row < n; ++row) {
      const Scalar v = acf[row - col] + ridge;
      sigma(row, col) = v;
      sigma(col, row) = v;
    }
  }
  return sigma;
}

}  // namespace lmspec
