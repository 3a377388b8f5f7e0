#include "lmspec/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lmspec/errors.hpp"

namespace lmspec {

namespace {

// zeta'(-1) = 1/12 - log(A), A the Glaisher-Kinkelin constant.
constexpr double kZetaPrimeMinusOne = -0.16542114370045092921;

constexpr double kShiftThreshold = 12.0;

// log G(w + 1) for w >= kShiftThreshold.
double log_barnes_g_asymptotic(double w) {
  const double log_w = std::log(w);
  const double w2 = w * w;
  const double inv_w2 = 1.0 / w2;
  // B_{2k+2} / (4 k (k+1)), k = 1..6
  constexpr double coeffs[] = {
      -1.0 / 240.0,              // B4
      1.0 / 1008.0,              // B6
      -1.0 / 1440.0,             // B8
      5.0 / 66.0 / 80.0,         // B10
      -691.0 / 2730.0 / 120.0,   // B12
      7.0 / 6.0 / 168.0,         // B14
  };
  double tail = 0.0;
  double p = inv_w2;
  for (double c : coeffs) {
    tail += c * p;
    p *= inv_w2;
  }
  return 0.5 * w2 * log_w - 0.75 * w2 +
         0.5 * w * std::log(2.0 * std::numbers::pi) - log_w / 12.0 +
         kZetaPrimeMinusOne + tail;
}

}  // namespace

double log_barnes_g(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw ConfigError("log_barnes_g: z = " + std::to_string(z) +
                      " must be positive and finite");
  }
  double shift_sum = 0.0;
  double x = z;
  while (x - 1.0 < kShiftThreshold) {
    shift_sum += std::lgamma(x);
    x += 1.0;
  }
  return log_barnes_g_asymptotic(x - 1.0) - shift_sum;
}

}  // namespace lmspec
