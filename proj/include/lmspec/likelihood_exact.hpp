#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "lmspec/fexp_model.hpp"
#include "lmspec/fourier_toeplitz.hpp"

namespace lmspec {

struct DatasetContext;

/// Sigma = L L^T with log|Sigma| = 2 sum log L(i, i).
struct CholeskyFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_det = 0.0;

  Eigen::Index size() const { return llt.rows(); }
  Eigen::MatrixXd lower() const { return llt.matrixL(); }
};

/// Throws NotPositiveDefinite carrying the failing pivot index.
CholeskyFactor cholesky(const Eigen::Ref<const Eigen::MatrixXd>& sigma);

/// y^T Sigma^{-1} y = ||z||^2 with L z = y.
double quad_form(const CholeskyFactor& chol,
                 const Eigen::Ref<const Eigen::VectorXd>& y);

/// Marginal log-likelihood of theta with mu and sigma^2 integrated out under
/// the normal / inverse-gamma g-prior:
///   -1/2 log|Sigma| - (a + n/2) log(b + q/2),
///   Sigma = T(fbar_theta) + E / g_mu,  q = (x - m_mu 1)^T Sigma^{-1} (x - m_mu 1),
/// up to a theta-free constant. `grid_size` overrides the Fourier grid
/// (0 = default). On the default grid a failed factorization is retried on
/// grids 16x finer up to 2^16; returns -inf when Sigma is still not
/// positive definite.
double exact_log_marglik(const ThetaParams& theta, const DatasetContext& data,
                         const PriorConfig& cfg, Eigen::Index grid_size = 0);

/// Same, for a raw series.
double exact_log_marglik(const ThetaParams& theta,
                         const Eigen::Ref<const Eigen::VectorXd>& x,
                         const PriorConfig& cfg, Eigen::Index grid_size = 0);

/// log N(x; 0, T(f)) including -(n/2) log 2 pi.
double exact_log_lik_zeromean(const Eigen::Ref<const Eigen::VectorXd>& acf,
                              const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace lmspec
