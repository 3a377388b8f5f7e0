#include "lmspec/smc_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <string>

#include "lmspec/errors.hpp"
#include "lmspec/parallel.hpp"

namespace lmspec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// scalar exp: Eigen's packet exp clamps its argument, so exp(-inf) would come
// out as a denormal instead of 0
constexpr auto exact_exp = [](double v) { return std::exp(v); };

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).unaryExpr(exact_exp).sum());
}

// alpha * loglik with alpha * (-inf) = -inf for alpha > 0.
Eigen::VectorXd scaled_loglik(const Eigen::Ref<const Eigen::VectorXd>& loglik,
                              double alpha) {
  Eigen::VectorXd out(loglik.size());
  for (Eigen::Index i = 0; i < loglik.size(); ++i) {
    out[i] = loglik[i] == kNegInf ? kNegInf : alpha * loglik[i];
  }
  return out;
}

template <typename Fn>
double brent_root(Fn&& f, double lo, double hi, double f_lo, double f_hi,
                  double tol, int max_iter) {
  double a = lo, b = hi, c = hi;
  double fa = f_lo, fb = f_hi, fc = f_hi;
  double d = b - a, e = d;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0)) {
      c = a;
      fc = fa;
      e = d = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p = 0.0, q = 0.0;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : std::copysign(tol1, xm);
    fb = f(b);
  }
  throw NumericalError("solve_next_gamma: Brent iteration did not converge in " +
                       std::to_string(max_iter) + " steps");
}

ThetaParams sample_initial(const PriorConfig& prior, const SmcConfig& cfg, Rng& rng) {
  if (!cfg.fixed_order) return sample_prior(prior, rng);
  const int k = *cfg.fixed_order;
  Eigen::VectorXd block(k + 1);
  block[0] = logit(uniform_open(rng));
  for (int j = 1; j <= k; ++j) {
    block[j] = std::sqrt(xi_prior_variance(j, prior)) * standard_normal(rng);
  }
  return ThetaParams(std::move(block));
}

}  // namespace

void SmcConfig::validate() const {
  if (N < 10) throw ConfigError("smc.N must be >= 10");
  if (M < 1 && !(M == 0 && allow_no_moves)) throw ConfigError("smc.M must be >= 1");
  if (!(c > 0.0 && c < 1.0)) throw ConfigError("smc.c must lie in (0, 1)");
  if (k_max < 0) throw ConfigError("smc.k_max must be >= 0");
  if (fixed_order && (*fixed_order < 0 || *fixed_order > k_max)) {
    throw ConfigError("smc fixed order outside [0, k_max]");
  }
}

Eigen::VectorXd ParticleSystem::normalized_weights() const {
  const double lse = log_sum_exp(log_weights);
  if (!std::isfinite(lse)) throw DegenerateSystem("all particle weights are zero");
  return (log_weights.array() - lse).unaryExpr(exact_exp);
}

double ess(const Eigen::Ref<const Eigen::VectorXd>& log_weights) {
  if (log_weights.size() == 0) throw DegenerateSystem("ess: empty weight vector");
  const double mx = log_weights.maxCoeff();
  if (!std::isfinite(mx)) throw DegenerateSystem("ess: every weight is zero");
  const Eigen::ArrayXd w = (log_weights.array() - mx).unaryExpr(exact_exp);
  const double s = w.sum();
  return s * s / w.square().sum();
}

double solve_next_gamma(const Eigen::Ref<const Eigen::VectorXd>& cached_loglik,
                        double gamma, double c) {
  if (!(gamma < 1.0)) throw ConfigError("solve_next_gamma: gamma already 1");
  const double n = static_cast<double>(cached_loglik.size());
  const double target = c * n;
  const double alpha_max = 1.0 - gamma;
  auto f = [&](double alpha) {
    return ess(scaled_loglik(cached_loglik, alpha)) - target;
  };
  const double f_hi = f(alpha_max);
  if (f_hi >= 0.0) return 1.0;
  // ESS(alpha) -> N as alpha -> 0 (all weights equal to one)
  const double f_lo = n - target;
  const double alpha = brent_root(f, 0.0, alpha_max, f_lo, f_hi, 1e-10, 100);
  return std::min(1.0, gamma + alpha);
}

double solve_next_gamma(const ParticleSystem& system, double c) {
  return solve_next_gamma(system.cached_loglik, system.gamma, c);
}

std::vector<std::size_t> multinomial_draw(
    const Eigen::Ref<const Eigen::VectorXd>& weights, std::size_t count, Rng& rng) {
  std::vector<double> cumulative(static_cast<std::size_t>(weights.size()));
  std::partial_sum(weights.data(), weights.data() + weights.size(), cumulative.begin());
  const double total = cumulative.back();
  std::vector<std::size_t> out(count);
  for (auto& idx : out) {
    const double u = uniform_open(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    idx = static_cast<std::size_t>(
        std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                 static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
    // skip zero-weight slots that upper_bound can land on through rounding
    while (weights[static_cast<Eigen::Index>(idx)] <= 0.0 && idx > 0) --idx;
  }
  return out;
}

void multinomial_resample(ParticleSystem& system) {
  const Eigen::VectorXd w = system.normalized_weights();
  const std::size_t n = system.size();
  const auto idx = multinomial_draw(w, n, system.rng_streams.back());
  std::vector<ThetaParams> particles;
  particles.reserve(n);
  Eigen::VectorXd loglik(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    particles.push_back(system.particles[idx[i]]);
    loglik[static_cast<Eigen::Index>(i)] = system.cached_loglik[static_cast<Eigen::Index>(idx[i])];
  }
  system.particles = std::move(particles);
  system.cached_loglik = std::move(loglik);
  system.log_weights.setZero(static_cast<Eigen::Index>(n));
}

ParticleSystem run_smc(const LogLikelihood& log_lik, const PriorConfig& prior,
                       const SmcConfig& cfg) {
  cfg.validate();
  prior.validate();
  const auto n = static_cast<std::size_t>(cfg.N);
  const auto nn = static_cast<Eigen::Index>(n);

  ParticleSystem sys;
  sys.rng_streams = make_streams(cfg.seed, n + 1);
  sys.particles.resize(n);
  sys.cached_loglik.resize(nn);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    sys.particles[i] = sample_initial(prior, cfg, sys.rng_streams[i]);
    sys.cached_loglik[static_cast<Eigen::Index>(i)] = log_lik(sys.particles[i]);
  });
  sys.log_weights.setZero(nn);
  sys.gamma = 0.0;
  sys.history.push_back({0.0, static_cast<double>(n), 0.0, {}});

  const bool moves = cfg.M > 0;
  const TemperedTarget target{prior, log_lik};
  bool warned_k_max = false;
  int iteration = 0;
  while (sys.gamma < 1.0) {
    ++iteration;
    IterationRecord rec;
    try {
      const double next = solve_next_gamma(sys, cfg.c);
      const double alpha = next - sys.gamma;
      const Eigen::VectorXd increment = scaled_loglik(sys.cached_loglik, alpha);
      rec.log_mean_weight = log_sum_exp(increment) - std::log(static_cast<double>(n));
      if (moves) {
        sys.log_weights = increment;
      } else {
        sys.log_weights = scaled_loglik(sys.cached_loglik, next);
      }
      rec.ess = ess(moves ? increment : sys.log_weights);
      sys.gamma = next;
    } catch (const NumericalError& err) {
      throw DegenerateSystem("SMC iteration " + std::to_string(iteration) + ": " + err.what());
    }
    rec.gamma = sys.gamma;
    sys.log_evidence += rec.log_mean_weight;

    if (moves) {
      multinomial_resample(sys);
      const auto scales = calibrate_scales(sys.particles);
      const KernelConfig kcfg = make_kernel_config(sys.gamma, scales, cfg.k_max);
      std::vector<MoveStats> stats(n);
      parallel_for(n, cfg.threads, [&](std::size_t i) {
        Rng& rng = sys.rng_streams[i];
        Particle p{sys.particles[i], sys.cached_loglik[static_cast<Eigen::Index>(i)]};
        for (int m = 0; m < cfg.M; ++m) {
          p = rw_metropolis_step(p, kcfg, target, rng, stats[i]);
          if (!cfg.fixed_order) p = birth_death_step(p, kcfg, target, rng, stats[i]);
        }
        sys.particles[i] = std::move(p.theta);
        sys.cached_loglik[static_cast<Eigen::Index>(i)] = p.log_lik;
      });
      for (const auto& s : stats) rec.moves += s;
      if (rec.moves.k_max_hits > 0 && !warned_k_max) {
        std::clog << "warning: birth proposals hit k_max = " << cfg.k_max
                  << " at iteration " << iteration << "\n";
        warned_k_max = true;
      }
    }
    sys.history.push_back(rec);
  }
  return sys;
}

ParticleSystem run_smc(const DatasetContext& data, const PriorConfig& prior,
                       const SmcConfig& cfg) {
  const ApproxMode mode = cfg.mode;
  LogLikelihood log_lik = [&data, &prior, mode](const ThetaParams& theta) {
    return approx_log_lik(theta, data, prior, mode);
  };
  return run_smc(log_lik, prior, cfg);
}

}  // namespace lmspec
