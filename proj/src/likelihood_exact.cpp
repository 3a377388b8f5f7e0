#include "lmspec/likelihood_exact.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lmspec/errors.hpp"
#include "lmspec/likelihood_approx.hpp"

namespace lmspec {

namespace {

constexpr Eigen::Index kMaxRetryGrid = Eigen::Index{1} << 16;

// Unblocked left-looking pass, only used to locate the failing pivot after
// the blocked factorization reported failure.
std::size_t first_bad_pivot(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double diag = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(diag > 0.0) || !std::isfinite(diag)) return static_cast<std::size_t>(j);
    l(j, j) = std::sqrt(diag);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

CholeskyFactor cholesky(const Eigen::Ref<const Eigen::MatrixXd>& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1) {
    throw ConfigError("cholesky: matrix must be square and non-empty");
  }
  CholeskyFactor out;
  out.llt.compute(sigma);
  if (out.llt.info() != Eigen::Success) {
    throw NotPositiveDefinite(first_bad_pivot(sigma));
  }
  const auto diag = out.llt.matrixLLT().diagonal();
  if (!(diag.array() > 0.0).all() || !diag.allFinite()) {
    throw NotPositiveDefinite(first_bad_pivot(sigma));
  }
  out.log_det = 2.0 * diag.array().log().sum();
  return out;
}

double quad_form(const CholeskyFactor& chol,
                 const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (y.size() != chol.size()) {
    throw ConfigError("quad_form: dimension mismatch (" + std::to_string(y.size()) +
                      " vs " + std::to_string(chol.size()) + ")");
  }
  const Eigen::VectorXd z = chol.llt.matrixL().solve(y);
  return z.squaredNorm();
}

double exact_log_marglik(const ThetaParams& theta,
                         const Eigen::Ref<const Eigen::VectorXd>& x,
                         const PriorConfig& cfg, Eigen::Index grid_size) {
  const Eigen::Index n = x.size();
  if (n < 2) throw ConfigError("exact_log_marglik: need at least 2 observations");
  if (!theta.coords.allFinite()) return -std::numeric_limits<double>::infinity();
  // T(f) is positive definite for f > 0, so a failed factorization on the
  // default grid is quadrature error: retry on finer grids before giving up.
  Eigen::Index size = FourierGrid::for_length(n, grid_size).size;
  const Eigen::Index max_size = grid_size != 0 ? size : std::max(size, kMaxRetryGrid);
  CholeskyFactor chol;
  while (true) {
    const AutocovarianceSeq acf =
        model_acf(fexp_normalized(theta), n, FourierGrid::for_length(n, size));
    try {
      chol = cholesky(build_toeplitz<double>(acf, 1.0 / cfg.g_mu, n));
      break;
    } catch (const NotPositiveDefinite&) {
      if (size >= max_size) return -std::numeric_limits<double>::infinity();
      size = std::min(size * 16, max_size);
    }
  }
  const Eigen::VectorXd centred = x.array() - cfg.m_mu;
  const double q = quad_form(chol, centred);
  const double nd = static_cast<double>(n);
  return -0.5 * chol.log_det - (cfg.a + 0.5 * nd) * std::log(cfg.b + 0.5 * q);
}

double exact_log_marglik(const ThetaParams& theta, const DatasetContext& data,
                         const PriorConfig& cfg, Eigen::Index grid_size) {
  return exact_log_marglik(theta, data.x, cfg, grid_size);
}

double exact_log_lik_zeromean(const Eigen::Ref<const Eigen::VectorXd>& acf,
                              const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index n = x.size();
  if (n < 1) throw ConfigError("exact_log_lik_zeromean: empty series");
  const Eigen::MatrixXd sigma = build_toeplitz<double>(acf, 0.0, n);
  const CholeskyFactor chol = cholesky(sigma);
  const double q = quad_form(chol, x);
  return -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) -
         0.5 * chol.log_det - 0.5 * q;
}

}  // namespace lmspec
