#include "lmspec/correction_is.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "lmspec/errors.hpp"
#include "lmspec/likelihood_exact.hpp"
#include "lmspec/parallel.hpp"

namespace lmspec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// scalar exp: Eigen's packet exp clamps its argument, so exp(-inf) would come
// out as a denormal instead of 0
constexpr auto exact_exp = [](double v) { return std::exp(v); };

std::vector<std::size_t> choose_indices(std::size_t n,
                                        const std::optional<std::size_t>& subsample,
                                        Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (!subsample || *subsample >= n) return idx;
  const std::size_t m = *subsample;
  // partial Fisher-Yates; the first m slots are a uniform draw without replacement
  for (std::size_t i = 0; i < m; ++i) {
    const auto span = static_cast<double>(n - i);
    auto j = i + static_cast<std::size_t>(uniform_open(rng) * span);
    if (j >= n) j = n - 1;
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  return idx;
}

std::vector<double> key_of(const ThetaParams& theta) {
  return {theta.coords.data(), theta.coords.data() + theta.coords.size()};
}

}  // namespace

CorrectedSample correction_weights(std::span<const ThetaParams> particles,
                                   const LogLikelihood& exact,
                                   const LogLikelihood& approx,
                                   const CorrectionOptions& opts, Rng& rng,
                                   std::span<const double> base_log_weights) {
  if (particles.empty()) throw ConfigError("correction_weights: no particles");
  if (opts.subsample && (*opts.subsample == 0 || *opts.subsample > particles.size())) {
    throw ConfigError("correction_weights: subsample must lie in [1, " +
                      std::to_string(particles.size()) + "]");
  }
  if (!base_log_weights.empty() && base_log_weights.size() != particles.size()) {
    throw ConfigError("correction_weights: base weight count differs from particle count");
  }
  const auto start = std::chrono::steady_clock::now();

  CorrectedSample out;
  out.source_index = choose_indices(particles.size(), opts.subsample, rng);
  const std::size_t m = out.source_index.size();
  out.particles.reserve(m);
  for (std::size_t i : out.source_index) out.particles.push_back(particles[i]);

  // resampled systems carry many copies; evaluate each distinct theta once
  std::map<std::vector<double>, std::size_t> slot_of;
  std::vector<std::size_t> slot(m);
  std::vector<std::size_t> unique_members;
  for (std::size_t i = 0; i < m; ++i) {
    auto [it, inserted] = slot_of.try_emplace(key_of(out.particles[i]), unique_members.size());
    if (inserted) unique_members.push_back(i);
    slot[i] = it->second;
  }
  std::vector<double> unique_log_w(unique_members.size());
  std::vector<char> unique_failed(unique_members.size(), 0);
  parallel_for(unique_members.size(), opts.threads, [&](std::size_t u) {
    const ThetaParams& theta = out.particles[unique_members[u]];
    const double le = exact(theta);
    const double la = approx(theta);
    const double lw = le - la;
    if (std::isnan(lw) || lw == kNegInf || le == kNegInf) {
      unique_failed[u] = 1;
      unique_log_w[u] = kNegInf;
    } else {
      unique_log_w[u] = lw;
    }
  });

  out.log_w_corr.resize(static_cast<Eigen::Index>(m));
  Eigen::VectorXd total(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out.log_w_corr[ii] = unique_log_w[slot[i]];
    if (unique_failed[slot[i]]) ++out.failures;
    const double base = base_log_weights.empty() ? 0.0 : base_log_weights[out.source_index[i]];
    total[ii] = out.log_w_corr[ii] == kNegInf ? kNegInf : out.log_w_corr[ii] + base;
  }
  if (out.failures > 0) {
    std::clog << "warning: correction_weights: exact likelihood failed for "
              << out.failures << " of " << m << " particles; their weights are 0\n";
  }
  const double mx = total.maxCoeff();
  if (!std::isfinite(mx)) {
    throw DegenerateSystem("correction_weights: every correction weight is zero");
  }
  Eigen::ArrayXd w = (total.array() - mx).unaryExpr(exact_exp);
  const double s = w.sum();
  out.weights = w / s;
  out.ess = 1.0 / out.weights.squaredNorm();
  out.ess_fraction = out.ess / static_cast<double>(m);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

CorrectedSample correction_weights(std::span<const ThetaParams> particles,
                                   const DatasetContext& data,
                                   const PriorConfig& prior,
                                   const CorrectionOptions& opts, Rng& rng) {
  if (data.size() > opts.max_n && !opts.allow_large) {
    throw ConfigError("correction_weights: n = " + std::to_string(data.size()) +
                      " exceeds the exact-likelihood guard " + std::to_string(opts.max_n) +
                      " (override to force)");
  }
  const LogLikelihood exact = [&](const ThetaParams& theta) {
    return exact_log_marglik(theta, data, prior, opts.grid_size);
  };
  const LogLikelihood approx = [&](const ThetaParams& theta) {
    return approx_log_lik(theta, data, prior, opts.mode);
  };
  return correction_weights(particles, exact, approx, opts, rng);
}

}  // namespace lmspec
