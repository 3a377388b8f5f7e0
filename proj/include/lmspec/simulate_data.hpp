#pragma once

// Exact Gaussian simulation from a spectral model and single-column CSV I/O.

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>

#include "lmspec/fexp_model.hpp"
#include "lmspec/rng.hpp"

namespace lmspec {

struct SimConfig {
  SpectralModel model = FexpSpectrum{};
  Eigen::Index n = 1024;
  double mu = 0.0;
  std::uint64_t seed = 1;
  std::string output_path;
  Eigen::Index grid_size = 0;  // Fourier grid override, 0 = default

  void validate() const;
};

/// Largest n sampled through a dense Cholesky factor; longer series use the
/// Durbin-Levinson innovations recursion on the same autocovariances.
inline constexpr Eigen::Index kDenseSimulationCap = Eigen::Index{1} << 13;

/// x ~ N(mu 1, T(f)). Throws NumericalError when T(f) is not positive
/// definite.
Eigen::VectorXd simulate_series(const SimConfig& cfg, Rng& rng);

/// Reads one value per line. A non-numeric first line is taken as a header.
/// Values are divided by `scale_by`. Throws DataError naming the line of a
/// malformed row.
Eigen::VectorXd read_series(const std::string& path, double scale_by = 1.0);

/// One value per line with 17 significant digits and LF endings.
void write_series(const std::string& path, const Eigen::Ref<const Eigen::VectorXd>& x,
                  const std::optional<std::string>& header = std::nullopt);

}  // namespace lmspec
