#include "lmspec/kernels_mcmc.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lmspec/errors.hpp"

namespace lmspec {

namespace {

double tempered(double gamma, double log_lik) {
  // gamma = 0 means the likelihood is switched off entirely, even where it
  // is -inf.
  return gamma == 0.0 ? 0.0 : gamma * log_lik;
}

void require_finite_current(double value, const char* kernel) {
  if (!std::isfinite(value)) {
    throw NumericalError(std::string(kernel) +
                         ": current state has a non-finite tempered target");
  }
}

}  // namespace

void KernelConfig::set_scale(int k, const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != k + 1 || sigma.cols() != k + 1) {
    throw ConfigError("KernelConfig: Sigma_" + std::to_string(k) +
                      " must be " + std::to_string(k + 1) + "x" +
                      std::to_string(k + 1));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite(0);
  scales_[k] = sigma;
  lower_[k] = llt.matrixL();
}

Eigen::MatrixXd KernelConfig::scale(int k) const {
  auto it = scales_.find(k);
  if (it != scales_.end()) return it->second;
  return Eigen::MatrixXd::Identity(k + 1, k + 1);
}

Eigen::VectorXd KernelConfig::proposal_step(int k, const Eigen::VectorXd& z) const {
  auto it = lower_.find(k);
  if (it == lower_.end()) return z;
  return it->second.triangularView<Eigen::Lower>() * z;
}

Particle rw_metropolis_step(const Particle& current, const KernelConfig& cfg,
                            const TemperedTarget& target, Rng& rng,
                            MoveStats& stats) {
  const int k = current.theta.order();
  const double log_target_current =
      log_conditional_prior(current.theta, target.prior) +
      tempered(cfg.gamma, current.log_lik);
  require_finite_current(log_target_current, "rw_metropolis_step");

  Eigen::VectorXd z(k + 1);
  for (Eigen::Index i = 0; i <= k; ++i) z[i] = standard_normal(rng);
  Particle proposal{ThetaParams(current.theta.coords + cfg.proposal_step(k, z)), 0.0};
  proposal.log_lik = target.evaluate(proposal.theta);
  const double log_target_proposal =
      log_conditional_prior(proposal.theta, target.prior) +
      tempered(cfg.gamma, proposal.log_lik);

  ++stats.rw_proposed;
  const double log_u = std::log(uniform_open(rng));
  // NaN compares false: such proposals are rejected.
  if (log_u < log_target_proposal - log_target_current) {
    ++stats.rw_accepted;
    return proposal;
  }
  return current;
}

Particle birth_death_step(const Particle& current, const KernelConfig& cfg,
                          const TemperedTarget& target, Rng& rng,
                          MoveStats& stats) {
  const int k = current.theta.order();
  require_finite_current(tempered(cfg.gamma, current.log_lik), "birth_death_step");

  const bool birth = uniform_open(rng) < cfg.rho_up_at(k);
  ++stats.bd_proposed;
  if (birth && k >= cfg.k_max) {
    ++stats.k_max_hits;
    return current;
  }

  Particle proposal;
  int k_star = 0;
  if (birth) {
    k_star = k + 1;
    Eigen::VectorXd block(k + 2);
    block.head(k + 1) = current.theta.coords;
    block[k + 1] = std::sqrt(xi_prior_variance(k_star, target.prior)) * standard_normal(rng);
    proposal.theta = ThetaParams(std::move(block));
  } else {
    k_star = k - 1;
    proposal.theta = ThetaParams(current.theta.coords.head(k));
  }
  proposal.log_lik = target.evaluate(proposal.theta);

  const double log_rho_back = std::log(birth ? cfg.rho_down_at(k_star) : cfg.rho_up_at(k_star));
  const double log_rho_fwd = std::log(birth ? cfg.rho_up_at(k) : cfg.rho_down_at(k));
  const double log_r = log_rho_back + log_k_mass(k_star, target.prior) +
                       tempered(cfg.gamma, proposal.log_lik) - log_rho_fwd -
                       log_k_mass(k, target.prior) -
                       tempered(cfg.gamma, current.log_lik);
  const double log_u = std::log(uniform_open(rng));
  if (log_u < log_r) {
    ++stats.bd_accepted;
    return proposal;
  }
  return current;
}

std::map<int, Eigen::MatrixXd> calibrate_scales(
    std::span<const ThetaParams> particles, std::span<const int> also) {
  std::map<int, std::vector<const ThetaParams*>> by_order;
  for (const auto& p : particles) by_order[p.order()].push_back(&p);

  std::map<int, Eigen::MatrixXd> out;
  for (const auto& [k, members] : by_order) {
    const auto dim = static_cast<Eigen::Index>(k + 1);
    const auto count = static_cast<Eigen::Index>(members.size());
    if (count < 2 * (k + 2)) {
      out[k] = optimal_rw_factor(k) * Eigen::MatrixXd::Identity(dim, dim);
      continue;
    }
    Eigen::MatrixXd samples(count, dim);
    for (Eigen::Index i = 0; i < count; ++i) samples.row(i) = members[i]->coords.transpose();
    const Eigen::RowVectorXd mean = samples.colwise().mean();
    samples.rowwise() -= mean;
    Eigen::MatrixXd cov = samples.transpose() * samples / static_cast<double>(count - 1);
    const double trace = cov.trace();
    // all-identical particles give trace 0; the jitter must stay positive
    const double eps = trace > 0.0 ? 1e-8 * trace / static_cast<double>(dim) : 1e-8;
    cov.diagonal().array() += eps;
    out[k] = optimal_rw_factor(k) * cov;
  }
  for (int k : also) {
    if (!out.contains(k)) {
      out[k] = optimal_rw_factor(k) *
               Eigen::MatrixXd::Identity(k + 1, k + 1);
    }
  }
  return out;
}

KernelConfig make_kernel_config(double gamma,
                                const std::map<int, Eigen::MatrixXd>& scales,
                                int k_max) {
  KernelConfig cfg;
  cfg.gamma = gamma;
  cfg.k_max = k_max;
  for (int k = 0; k <= k_max; ++k) {
    auto it = scales.find(k);
    if (it != scales.end()) {
      cfg.set_scale(k, it->second);
    } else {
      cfg.set_scale(k, optimal_rw_factor(k) * Eigen::MatrixXd::Identity(k + 1, k + 1));
    }
  }
  for (const auto& [k, sigma] : scales) {
    if (k > k_max) cfg.set_scale(k, sigma);
  }
  return cfg;
}

}  // namespace lmspec
