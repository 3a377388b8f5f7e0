#include "lmspec/simulate_data.hpp"

#include <Eigen/Cholesky>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lmspec/errors.hpp"
#include "lmspec/fourier_toeplitz.hpp"

namespace lmspec {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

Eigen::VectorXd innovations_draw(const AutocovarianceSeq& acf, Eigen::Index n, Rng& rng) {
  Eigen::VectorXd x(n);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(n);
  double v = acf[0];
  if (!(v > 0.0)) throw NumericalError("simulate_series: model-invalid (gamma(0) <= 0)");
  x[0] = std::sqrt(v) * standard_normal(rng);
  for (Eigen::Index t = 1; t < n; ++t) {
    double num = acf[t];
    for (Eigen::Index j = 1; j < t; ++j) num -= prev[j] * acf[t - j];
    const double kappa = num / v;
    phi[t] = kappa;
    for (Eigen::Index j = 1; j < t; ++j) phi[j] = prev[j] - kappa * prev[t - j];
    v *= (1.0 - kappa * kappa);
    if (!(v > 0.0)) {
      throw NumericalError("simulate_series: model-invalid (innovation variance <= 0 at t = " +
                           std::to_string(t) + ")");
    }
    double pred = 0.0;
    for (Eigen::Index j = 1; j <= t; ++j) pred += phi[j] * x[t - j];
    x[t] = pred + std::sqrt(v) * standard_normal(rng);
    prev.head(t + 1) = phi.head(t + 1);
  }
  return x;
}

}  // namespace

void SimConfig::validate() const {
  if (n < 4) throw ConfigError("sim.n must be >= 4");
  if (!std::isfinite(mu)) throw ConfigError("sim.mu must be finite");
  validate_model(model);
}

Eigen::VectorXd simulate_series(const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  const FourierGrid grid = FourierGrid::for_length(cfg.n, cfg.grid_size);
  const AutocovarianceSeq acf = model_acf(cfg.model, cfg.n, grid);
  Eigen::VectorXd x;
  if (cfg.n <= kDenseSimulationCap) {
    const Eigen::MatrixXd sigma = build_toeplitz<double>(acf, 0.0, cfg.n);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("simulate_series: model-invalid (covariance not positive definite)");
    }
    Eigen::VectorXd z(cfg.n);
    for (Eigen::Index i = 0; i < cfg.n; ++i) z[i] = standard_normal(rng);
    x = llt.matrixL() * z;
  } else {
    x = innovations_draw(acf, cfg.n, rng);
  }
  x.array() += cfg.mu;
  return x;
}

Eigen::VectorXd read_series(const std::string& path, double scale_by) {
  if (!(scale_by > 0.0) || !std::isfinite(scale_by)) {
    throw ConfigError("read_series: scale_by must be positive and finite");
  }
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    double v = 0.0;
    if (!parse_double(row, v)) {
      if (line_no == 1) continue;  // header
      throw DataError(path + ": line " + std::to_string(line_no) + ": cannot parse '" +
                      std::string(row) + "' as a number");
    }
    if (!std::isfinite(v)) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": non-finite value");
    }
    values.push_back(v / scale_by);
  }
  if (values.empty()) throw DataError(path + ": no values");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_series(const std::string& path, const Eigen::Ref<const Eigen::VectorXd>& x,
                  const std::optional<std::string>& header) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!f) throw DataError("cannot write '" + path + "'");
  if (header) std::fprintf(f.get(), "%s\n", header->c_str());
  for (Eigen::Index i = 0; i < x.size(); ++i) std::fprintf(f.get(), "%.17g\n", x[i]);
  if (std::ferror(f.get())) throw DataError("write error on '" + path + "'");
}

}  // namespace lmspec
