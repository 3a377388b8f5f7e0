#pragma once

// Radix-2 FFT and a Bluestein (chirp-z) transform for arbitrary lengths.
//
// Sign convention: forward transform is X_l = sum_j x_j exp(+2 pi i j l / L),
// matching the Fourier integrals gamma(l) = int f(lambda) exp(i l lambda).

#include <Eigen/Core>

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "lmspec/errors.hpp"

namespace lmspec {

template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

inline bool is_pow2(Eigen::Index n) {
  return n >= 1 && std::has_single_bit(static_cast<unsigned long long>(n));
}

namespace detail {

template <typename Scalar>
void fft_in_place(ComplexVector<Scalar>& a, bool inverse) {
  const Eigen::Index n = a.size();
  if (n < 2 || !is_pow2(n)) {
    throw ConfigError("fft_pow2: length " + std::to_string(n) +
                      " is not a power of two >= 2");
  }
  // bit reversal
  for (Eigen::Index i = 1, j = 0; i < n; ++i) {
    Eigen::Index bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  // Twiddles are evaluated directly, never by repeated multiplication.
  const Scalar sign = inverse ? Scalar(-1) : Scalar(1);
  ComplexVector<Scalar> twiddle(n / 2);
  for (Eigen::Index k = 0; k < n / 2; ++k) {
    twiddle[k] = std::polar(Scalar(1), sign * Scalar(2) *
                                           std::numbers::pi_v<Scalar> *
                                           static_cast<Scalar>(k) /
                                           static_cast<Scalar>(n));
  }
  for (Eigen::Index len = 2; len <= n; len <<= 1) {
    const Eigen::Index half = len / 2;
    const Eigen::Index stride = n / len;
    for (Eigen::Index i = 0; i < n; i += len) {
      for (Eigen::Index k = 0; k < half; ++k) {
        const std::complex<Scalar> u = a[i + k];
        const std::complex<Scalar> v = a[i + k + half] * twiddle[k * stride];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
  if (inverse) a /= static_cast<Scalar>(n);
}

}  // namespace detail

/// Forward DFT of a power-of-two length sequence.
template <typename Scalar>
ComplexVector<Scalar> fft_pow2(ComplexVector<Scalar> seq) {
  detail::fft_in_place(seq, false);
  return seq;
}

/// Inverse of fft_pow2 (includes the 1/L factor).
template <typename Scalar>
ComplexVector<Scalar> ifft_pow2(ComplexVector<Scalar> seq) {
  detail::fft_in_place(seq, true);
  return seq;
}

/// Forward DFT for any length >= 1, evaluated exactly at the frequencies
/// 2 pi l / L. Power-of-two lengths go straight to fft_pow2; other lengths
/// use Bluestein's chirp-z identity jl = (j^2 + l^2 - (l-j)^2) / 2.
template <typename Scalar>
ComplexVector<Scalar> dft(const ComplexVector<Scalar>& seq) {
  const Eigen::Index n = seq.size();
  if (n < 1) throw ConfigError("dft: empty sequence");
  if (n == 1) return seq;
  if (is_pow2(n)) return fft_pow2<Scalar>(seq);

  const Eigen::Index m = static_cast<Eigen::Index>(
      std::bit_ceil(static_cast<unsigned long long>(2 * n - 1)));
  // chirp_j = exp(i pi j^2 / n); j^2 reduced mod 2n to keep the angle small
  ComplexVector<Scalar> chirp(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const long long jj = (static_cast<long long>(j) * j) % (2LL * n);
    chirp[j] = std::polar(Scalar(1), std::numbers::pi_v<Scalar> *
                                         static_cast<Scalar>(jj) /
                                         static_cast<Scalar>(n));
  }
  ComplexVector<Scalar> a = ComplexVector<Scalar>::Zero(m);
  ComplexVector<Scalar> b = ComplexVector<Scalar>::Zero(m);
  for (Eigen::Index j = 0; j < n; ++j) a[j] = seq[j] * chirp[j];
  b[0] = std::conj(chirp[0]);
  for (Eigen::Index j = 1; j < n; ++j) {
    b[j] = std::conj(chirp[j]);
    b[m - j] = std::conj(chirp[j]);
  }
  detail::fft_in_place(a, false);
  detail::fft_in_place(b, false);
  a = a.cwiseProduct(b);
  detail::fft_in_place(a, true);
  ComplexVector<Scalar> out(n);
  for (Eigen::Index l = 0; l < n; ++l) out[l] = chirp[l] * a[l];
  return out;
}

}  // namespace lmspec
