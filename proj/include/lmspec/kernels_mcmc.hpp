#pragma once

// Metropolis kernels targeting the tempered law
//   eta_gamma(theta) ∝ p(theta) * ptilde(x | theta)^gamma
// on the union over k of {k} x R^{k+1}.

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <map>
#include <span>

#include "lmspec/fexp_model.hpp"
#include "lmspec/rng.hpp"

namespace lmspec {

using LogLikelihood = std::function<double(const ThetaParams&)>;

/// A point of the sampler together with its cached log-likelihood.
struct Particle {
  ThetaParams theta;
  double log_lik = 0.0;
};

/// Prior plus (optional) log-likelihood. An empty `log_lik` means a flat
/// likelihood, i.e. the kernels target the prior.
struct TemperedTarget {
  PriorConfig prior;
  LogLikelihood log_lik;

  double evaluate(const ThetaParams& theta) const {
    return log_lik ? log_lik(theta) : 0.0;
  }
};

struct MoveStats {
  std::uint64_t rw_proposed = 0;
  std::uint64_t rw_accepted = 0;
  std::uint64_t bd_proposed = 0;
  std::uint64_t bd_accepted = 0;
  std::uint64_t k_max_hits = 0;

  double rw_rate() const { return rw_proposed ? double(rw_accepted) / double(rw_proposed) : 0.0; }
  double bd_rate() const { return bd_proposed ? double(bd_accepted) / double(bd_proposed) : 0.0; }

  MoveStats& operator+=(const MoveStats& o) {
    rw_proposed += o.rw_proposed;
    rw_accepted += o.rw_accepted;
    bd_proposed += o.bd_proposed;
    bd_accepted += o.bd_accepted;
    k_max_hits += o.k_max_hits;
    return *this;
  }
};

/// tau_k = 2.38^2 / (k + 1)
inline double optimal_rw_factor(int k) { return 2.38 * 2.38 / (k + 1); }

class KernelConfig {
 public:
  double gamma = 1.0;
  double rho_up = 0.5;  // rho_{k -> k+1} for k >= 1; rho_{0 -> 1} = 1 always
  int k_max = 50;

  double rho_up_at(int k) const { return k == 0 ? 1.0 : rho_up; }
  double rho_down_at(int k) const { return k == 0 ? 0.0 : 1.0 - rho_up; }

  /// Sets Sigma_k; throws NotPositiveDefinite if it is not SPD.
  void set_scale(int k, const Eigen::MatrixXd& sigma);
  bool has_scale(int k) const { return scales_.contains(k); }
  /// Sigma_k, or the identity when none was set.
  Eigen::MatrixXd scale(int k) const;
  /// L_k z with Sigma_k = L_k L_k^T (identity fallback).
  Eigen::VectorXd proposal_step(int k, const Eigen::VectorXd& z) const;

 private:
  std::map<int, Eigen::MatrixXd> scales_;
  std::map<int, Eigen::MatrixXd> lower_;
};

/// Gaussian random walk on theta_k with k fixed. Throws NumericalError when
/// the current point has a non-finite tempered target.
Particle rw_metropolis_step(const Particle& current, const KernelConfig& cfg,
                            const TemperedTarget& target, Rng& rng,
                            MoveStats& stats);

/// Birth (append xi_{k+1} drawn from its conditional prior) or death (drop
/// xi_k). The new coordinate's prior density cancels its proposal density,
/// so the log-ratio holds only the rho factors, the k masses and the
/// tempered likelihood ratio.
Particle birth_death_step(const Particle& current, const KernelConfig& cfg,
                          const TemperedTarget& target, Rng& rng,
                          MoveStats& stats);

/// Sigma_k = tau_k (S_k + eps I) for every order k carried by at least
/// 2 (k + 2) particles, S_k their empirical covariance and
/// eps = 1e-8 trace(S_k) / (k + 1); other orders in `also` get tau_k I.
std::map<int, Eigen::MatrixXd> calibrate_scales(
    std::span<const ThetaParams> particles, std::span<const int> also = {});

/// Installs the output of calibrate_scales; every other order up to k_max
/// gets tau_k I.
KernelConfig make_kernel_config(double gamma,
                                const std::map<int, Eigen::MatrixXd>& scales,
                                int k_max);

}  // namespace lmspec
