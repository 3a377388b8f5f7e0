#include "lmspec/fourier_toeplitz.hpp"

#include <algorithm>
#include <bit>

namespace lmspec {

FourierGrid FourierGrid::for_length(Eigen::Index n, Eigen::Index override_size) {
  if (n < 1) throw ConfigError("FourierGrid: n must be >= 1");
  FourierGrid grid;
  if (override_size != 0) {
    if (!is_pow2(override_size) || override_size < 2 * n) {
      throw ConfigError("FourierGrid: override size " +
                        std::to_string(override_size) +
                        " must be a power of two >= 2n = " +
                        std::to_string(2 * n));
    }
    grid.size = override_size;
  } else {
    grid.size = static_cast<Eigen::Index>(
        std::bit_ceil(static_cast<unsigned long long>(std::max<Eigen::Index>(2 * n, 2))));
  }
  grid.spacing = 2.0 * std::numbers::pi / static_cast<double>(grid.size);
  return grid;
}

double interpolation_kernel_ft(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 12.0 + x2 * x2 / 360.0;
  }
  const double s = std::sin(0.5 * x) / (0.5 * x);
  return s * s;
}

namespace detail {

AutocovarianceSeq assemble_interpolated_coeffs(const Eigen::VectorXd& values,
                                               Eigen::Index n,
                                               const FourierGrid& grid) {
  const Eigen::Index m = grid.size;
  // The interpolant's full hats at nodes 0..M give sum_{j=0}^{M} g_j e^{...};
  // node M aliases onto slot 0 of a length-M transform. The half-hat
  // corrections at both ends contribute (g_0 + g_M) * alpha_0, alpha_0 = -W/2.
  ComplexVector<double> seq(m);
  seq[0] = values[0] + values[m];
  for (Eigen::Index j = 1; j < m; ++j) seq[j] = values[j];
  const ComplexVector<double> spectrum = fft_pow2<double>(std::move(seq));

  const double ends = values[0] + values[m];
  const double scale = grid.spacing * values.cwiseAbs().sum();
  AutocovarianceSeq out(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    const double w = interpolation_kernel_ft(static_cast<double>(l) * grid.spacing);
    const double sign = (l % 2 == 0) ? 1.0 : -1.0;
    const double imag = grid.spacing * w * spectrum[l].imag();
    if (std::abs(imag) > 1e-8 * std::max(scale, 1e-300)) {
      throw NumericalError(
          "fourier_coeffs_bounded: imaginary residue " + std::to_string(imag) +
          " at lag " + std::to_string(l) + "; integrand is not even");
    }
    out[l] = grid.spacing * sign * (w * spectrum[l].real() - 0.5 * w * ends);
  }
  return out;
}

}  // namespace detail

double fracdiff_acf(double d, Eigen::Index lag) {
  if (!(d >= 0.0 && d < 0.5)) {
    throw ConfigError("fracdiff_acf: d = " + std::to_string(d) +
                      " outside [0, 1/2)");
  }
  if (lag < 0) throw ConfigError("fracdiff_acf: negative lag");
  if (lag == 0) {
    return std::exp(std::lgamma(1.0 - 2.0 * d) - 2.0 * std::lgamma(1.0 - d));
  }
  if (d == 0.0) return 0.0;  // 1 / Gamma(0)
  const double l = static_cast<double>(lag);
  return std::exp(std::lgamma(1.0 - 2.0 * d) + std::lgamma(l + d) - std::lgamma(l - d + 1.0) -
                  std::lgamma(1.0 - d) - std::lgamma(d));
}

AutocovarianceSeq fracdiff_acf_seq(double d, Eigen::Index n) {
  if (n < 1) throw ConfigError("fracdiff_acf_seq: n must be >= 1");
  AutocovarianceSeq acf(n);
  acf[0] = fracdiff_acf(d, 0);
  for (Eigen::Index l = 0; l + 1 < n; ++l) {
    const double ld = static_cast<double>(l);
    acf[l + 1] = acf[l] * (ld + d) / (ld + 1.0 - d);
  }
  return acf;
}

}  // namespace lmspec
