#pragma once

// Run configuration, the fit / report / simulate / mcmc-baseline commands
// and the posterior summaries they write.
//
// Config grammar: one `key = value` per line, dotted keys, `#` starts a
// comment, blank lines ignored, lists are comma separated. Unknown or
// repeated keys are errors. See README.md for the key table.

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmspec/correction_is.hpp"
#include "lmspec/fexp_model.hpp"
#include "lmspec/simulate_data.hpp"
#include "lmspec/smc_sampler.hpp"

namespace lmspec {

// ---- configuration --------------------------------------------------------

class ConfigDocument {
 public:
  /// Throws ConfigError naming the line on a syntax error or repeated key.
  static ConfigDocument parse(const std::string& text);
  static ConfigDocument load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool contains(const std::string& key) const { return values_.contains(key); }
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<Eigen::VectorXd> get_list(const std::string& key) const;

  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

struct CorrectionSettings {
  bool enabled = true;
  std::optional<std::size_t> subsample;
  Eigen::Index max_n = 20000;
  bool allow_large = false;
};

struct ReportOptions {
  int grid_size = 200;
  double grid_min = 1e-3;
  double band_level = 0.8;
  int hist_bins = 40;

  void validate() const;
};

struct McmcSettings {
  long steps = 1000;
  long thin = 1;
  double tau = 0.015;
  double gamma = 1.0;
};

struct RunConfig {
  std::string data_path;
  double scale_by = 1.0;
  PriorConfig prior;
  SmcConfig smc;
  CorrectionSettings correction;
  ReportOptions report;
  McmcSettings mcmc;
  SimConfig sim;
  std::string output_dir = "out";

  /// Throws ConfigError for unknown keys or values outside their domain.
  static RunConfig from_document(const ConfigDocument& doc);
  ConfigDocument to_document() const;
  void validate() const;
};

// ---- posterior functionals ------------------------------------------------

/// inf{v : F(v) >= q} for the right-continuous weighted CDF F; `weights`
/// need not be normalized.
double weighted_quantile(std::span<const double> values,
                         std::span<const double> weights, double q);

/// `size` points log-spaced from grid_min to pi.
Eigen::VectorXd lambda_grid(const ReportOptions& opts);

double log_fbar(const ThetaParams& theta, double lambda);

struct BandTable {
  Eigen::VectorXd lambda, lower, median, upper;
};

/// Pointwise weighted quantiles (1-level)/2, 1/2, (1+level)/2 of log fbar.
BandTable compute_bands(std::span<const ThetaParams> particles,
                        std::span<const double> weights, const ReportOptions& opts);

struct Histogram {
  Eigen::VectorXd edges;  // bins + 1
  Eigen::VectorXd mass;   // sums to 1
};

Histogram d_histogram(std::span<const ThetaParams> particles,
                      std::span<const double> weights, int bins);

std::map<int, double> k_mass(std::span<const ThetaParams> particles,
                             std::span<const double> weights);

struct PosteriorSummary {
  double mean_d = 0.0;
  double sd_d = 0.0;
  double q10_d = 0.0, median_d = 0.0, q90_d = 0.0;
  std::map<int, double> k_mass;
  int k_mode = 0;
};

PosteriorSummary summarize(std::span<const ThetaParams> particles,
                           std::span<const double> weights);

// ---- particle files -------------------------------------------------------

struct ParticleTable {
  std::vector<ThetaParams> particles;
  std::vector<double> weights;  // normalized
  std::optional<std::vector<double>> log_w_corr;
};

/// Columns k,t,d,weight[,log_w_corr],xi with xi as ';'-separated values.
void write_particles_csv(const std::string& path, const ParticleTable& table);
ParticleTable read_particles_csv(const std::string& path);

// ---- commands -------------------------------------------------------------

struct FitResult {
  ParticleSystem system;
  std::optional<CorrectedSample> corrected;
  ParticleTable table;
  PosteriorSummary summary;
};

/// Writes the simulated series to cfg.sim.output_path (or `path` when given)
/// plus a `.meta.json` provenance sidecar. Validates before writing.
Eigen::VectorXd cmd_simulate(const RunConfig& cfg);

/// prepare_dataset, run_smc, optional correction; writes particles.csv,
/// diagnostics.json, bands.csv, d_histogram.csv, k_mass.csv into output_dir.
FitResult cmd_fit(const RunConfig& cfg);

/// Recomputes bands, histogram, k-mass and summary from a particle file.
PosteriorSummary cmd_report(const std::string& particles_path, const RunConfig& cfg);

struct McmcResult {
  MoveStats stats;
  long rows = 0;
};

/// Plain chain at fixed gamma with Sigma_k = tau I; writes trace.csv
/// (step,k,d,log_lik) and mcmc_diagnostics.json.
McmcResult cmd_mcmc_baseline(const RunConfig& cfg);

/// The chain itself, without file output. `log_lik` may be empty when
/// gamma = 0.
struct McmcTrace {
  std::vector<long> step;
  std::vector<int> k;
  std::vector<double> d;
  std::vector<double> log_lik;
  MoveStats stats;
};
McmcTrace run_mcmc_chain(const LogLikelihood& log_lik, const PriorConfig& prior,
                         const McmcSettings& settings, int k_max, std::uint64_t seed);

}  // namespace lmspec
