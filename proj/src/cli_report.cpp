#include "lmspec/cli_report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lmspec/errors.hpp"
#include "lmspec/likelihood_approx.hpp"

namespace lmspec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_list(const Eigen::VectorXd& v, const char* sep) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_double(v[i]);
  }
  return out;
}

bool parse_number(const std::string& s, double& out) {
  std::string_view sv(s);
  if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), out);
  return ec == std::errc() && ptr == sv.data() + sv.size();
}

Eigen::VectorXd parse_number_list(const std::string& text, char sep, const std::string& what) {
  std::vector<double> vals;
  if (trim(text).empty()) return {};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    double v = 0.0;
    if (!parse_number(trim(item), v)) {
      throw ConfigError(what + ": cannot parse '" + trim(item) + "' as a number");
    }
    vals.push_back(v);
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "data.path",         "data.scale_by",      "prior.geom_p",
      "prior.beta",        "prior.xi_var0",      "prior.a",
      "prior.b",           "prior.g_mu",         "prior.m_mu",
      "smc.N",             "smc.M",              "smc.c",
      "smc.seed",          "smc.k_max",          "smc.threads",
      "smc.fixed_order",   "likelihood.mode",    "correction.enabled",
      "correction.subsample", "correction.max_n", "correction.allow_large",
      "report.grid_size",  "report.grid_min",    "report.band_level",
      "report.hist_bins",  "output.dir",         "sim.model",
      "sim.d",             "sim.xi",             "sim.scale",
      "sim.phi",           "sim.ma",             "sim.sigma2",
      "sim.n",             "sim.mu",             "sim.seed",
      "sim.output",        "sim.grid_size",      "mcmc.steps",
      "mcmc.thin",         "mcmc.tau",           "mcmc.gamma"};
  return keys;
}

std::vector<double> as_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

void require_weights(std::span<const ThetaParams> particles, std::span<const double> weights) {
  if (particles.empty()) throw DataError("empty particle set");
  if (particles.size() != weights.size()) {
    throw DataError("particle and weight counts differ");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write error on '" + path.string() + "'");
}

void write_bands_csv(const fs::path& path, const BandTable& bands) {
  std::string text = "lambda,lower,median,upper\n";
  for (Eigen::Index i = 0; i < bands.lambda.size(); ++i) {
    text += format_double(bands.lambda[i]) + "," + format_double(bands.lower[i]) + "," +
            format_double(bands.median[i]) + "," + format_double(bands.upper[i]) + "\n";
  }
  write_text(path, text);
}

void write_histogram_csv(const fs::path& path, const Histogram& h) {
  std::string text = "bin_lower,bin_upper,mass\n";
  for (Eigen::Index i = 0; i < h.mass.size(); ++i) {
    text += format_double(h.edges[i]) + "," + format_double(h.edges[i + 1]) + "," +
            format_double(h.mass[i]) + "\n";
  }
  write_text(path, text);
}

void write_k_mass_csv(const fs::path& path, const std::map<int, double>& mass) {
  std::string text = "k,mass\n";
  for (const auto& [k, m] : mass) text += std::to_string(k) + "," + format_double(m) + "\n";
  write_text(path, text);
}

json summary_json(const PosteriorSummary& s) {
  json km = json::object();
  for (const auto& [k, m] : s.k_mass) km[std::to_string(k)] = m;
  return {{"mean_d", s.mean_d},     {"sd_d", s.sd_d},   {"q10_d", s.q10_d},
          {"median_d", s.median_d}, {"q90_d", s.q90_d}, {"k_mode", s.k_mode},
          {"k_mass", km}};
}

void write_report_files(const fs::path& dir, std::span<const ThetaParams> particles,
                        std::span<const double> weights, const ReportOptions& opts) {
  write_bands_csv(dir / "bands.csv", compute_bands(particles, weights, opts));
  write_histogram_csv(dir / "d_histogram.csv", d_histogram(particles, weights, opts.hist_bins));
  write_k_mass_csv(dir / "k_mass.csv", k_mass(particles, weights));
}

json model_json(const SpectralModel& model) {
  return std::visit(
      [](const auto& m) -> json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, FexpSpectrum>) {
          return {{"model", "fexp"}, {"d", m.d}, {"xi", as_vector(m.xi)}, {"scale", m.scale}};
        } else {
          return {{"model", "arfima"}, {"d", m.d},   {"phi", as_vector(m.phi)},
                  {"ma", as_vector(m.ma)}, {"sigma2", m.sigma2}};
        }
      },
      model);
}

}  // namespace

// ---- ConfigDocument -------------------------------------------------------

ConfigDocument ConfigDocument::parse(const std::string& text) {
  ConfigDocument doc;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (doc.values_.contains(key)) {
      throw ConfigError("config line " + std::to_string(line_no) + ": repeated key '" + key + "'");
    }
    doc.values_[key] = value;
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> ConfigDocument::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> ConfigDocument::get_double(const std::string& key) const {
  auto s = get_string(key);
  if (!s) return std::nullopt;
  double v = 0.0;
  if (!parse_number(*s, v)) throw ConfigError(key + ": '" + *s + "' is not a number");
  return v;
}

std::optional<std::int64_t> ConfigDocument::get_int(const std::string& key) const {
  auto s = get_string(key);
  if (!s) return std::nullopt;
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
  if (ec != std::errc() || ptr != s->data() + s->size()) {
    throw ConfigError(key + ": '" + *s + "' is not an integer");
  }
  return v;
}

std::optional<bool> ConfigDocument::get_bool(const std::string& key) const {
  auto s = get_string(key);
  if (!s) return std::nullopt;
  if (*s == "true" || *s == "1" || *s == "yes") return true;
  if (*s == "false" || *s == "0" || *s == "no") return false;
  throw ConfigError(key + ": '" + *s + "' is not a boolean");
}

std::optional<Eigen::VectorXd> ConfigDocument::get_list(const std::string& key) const {
  auto s = get_string(key);
  if (!s) return std::nullopt;
  return parse_number_list(*s, ',', key);
}

std::string ConfigDocument::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

// ---- RunConfig ------------------------------------------------------------

void ReportOptions::validate() const {
  if (grid_size < 2) throw ConfigError("report.grid_size must be >= 2");
  if (!(grid_min > 0.0 && grid_min < std::numbers::pi)) {
    throw ConfigError("report.grid_min must lie in (0, pi)");
  }
  if (!(band_level > 0.0 && band_level < 1.0)) {
    throw ConfigError("report.band_level must lie in (0, 1)");
  }
  if (hist_bins < 1) throw ConfigError("report.hist_bins must be >= 1");
}

RunConfig RunConfig::from_document(const ConfigDocument& doc) {
  for (const auto& [key, value] : doc.entries()) {
    if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig cfg;
  if (auto v = doc.get_string("data.path")) cfg.data_path = *v;
  if (auto v = doc.get_double("data.scale_by")) cfg.scale_by = *v;

  if (auto v = doc.get_double("prior.geom_p")) cfg.prior.geom_p = *v;
  if (auto v = doc.get_double("prior.beta")) cfg.prior.beta = *v;
  if (auto v = doc.get_double("prior.xi_var0")) cfg.prior.xi_var0 = *v;
  if (auto v = doc.get_double("prior.a")) cfg.prior.a = *v;
  if (auto v = doc.get_double("prior.b")) cfg.prior.b = *v;
  if (auto v = doc.get_double("prior.g_mu")) cfg.prior.g_mu = *v;
  if (auto v = doc.get_double("prior.m_mu")) cfg.prior.m_mu = *v;

  if (auto v = doc.get_int("smc.N")) cfg.smc.N = static_cast<int>(*v);
  if (auto v = doc.get_int("smc.M")) cfg.smc.M = static_cast<int>(*v);
  if (auto v = doc.get_double("smc.c")) cfg.smc.c = *v;
  if (auto v = doc.get_int("smc.seed")) cfg.smc.seed = static_cast<std::uint64_t>(*v);
  if (auto v = doc.get_int("smc.k_max")) cfg.smc.k_max = static_cast<int>(*v);
  if (auto v = doc.get_int("smc.threads")) {
    if (*v < 1) throw ConfigError("smc.threads must be >= 1");
    cfg.smc.threads = static_cast<std::size_t>(*v);
  }
  if (auto v = doc.get_int("smc.fixed_order")) cfg.smc.fixed_order = static_cast<int>(*v);
  if (auto v = doc.get_string("likelihood.mode")) cfg.smc.mode = parse_approx_mode(*v);

  if (auto v = doc.get_bool("correction.enabled")) cfg.correction.enabled = *v;
  if (auto v = doc.get_int("correction.subsample")) {
    if (*v < 1) throw ConfigError("correction.subsample must be >= 1");
    cfg.correction.subsample = static_cast<std::size_t>(*v);
  }
  if (auto v = doc.get_int("correction.max_n")) cfg.correction.max_n = *v;
  if (auto v = doc.get_bool("correction.allow_large")) cfg.correction.allow_large = *v;

  if (auto v = doc.get_int("report.grid_size")) cfg.report.grid_size = static_cast<int>(*v);
  if (auto v = doc.get_double("report.grid_min")) cfg.report.grid_min = *v;
  if (auto v = doc.get_double("report.band_level")) cfg.report.band_level = *v;
  if (auto v = doc.get_int("report.hist_bins")) cfg.report.hist_bins = static_cast<int>(*v);

  if (auto v = doc.get_string("output.dir")) cfg.output_dir = *v;

  const std::string model = doc.get_string("sim.model").value_or("fexp");
  const double d = doc.get_double("sim.d").value_or(0.0);
  if (model == "fexp") {
    FexpSpectrum m;
    m.d = d;
    m.xi = doc.get_list("sim.xi").value_or(Eigen::VectorXd{});
    m.scale = doc.get_double("sim.scale").value_or(1.0);
    cfg.sim.model = m;
  } else if (model == "arfima") {
    ArfimaSpectrum m;
    m.d = d;
    m.phi = doc.get_list("sim.phi").value_or(Eigen::VectorXd{});
    m.ma = doc.get_list("sim.ma").value_or(Eigen::VectorXd{});
    m.sigma2 = doc.get_double("sim.sigma2").value_or(1.0);
    cfg.sim.model = m;
  } else {
    throw ConfigError("sim.model must be fexp or arfima, got '" + model + "'");
  }
  if (auto v = doc.get_int("sim.n")) cfg.sim.n = *v;
  if (auto v = doc.get_double("sim.mu")) cfg.sim.mu = *v;
  if (auto v = doc.get_int("sim.seed")) cfg.sim.seed = static_cast<std::uint64_t>(*v);
  if (auto v = doc.get_string("sim.output")) cfg.sim.output_path = *v;
  if (auto v = doc.get_int("sim.grid_size")) cfg.sim.grid_size = *v;

  if (auto v = doc.get_int("mcmc.steps")) cfg.mcmc.steps = static_cast<long>(*v);
  if (auto v = doc.get_int("mcmc.thin")) cfg.mcmc.thin = static_cast<long>(*v);
  if (auto v = doc.get_double("mcmc.tau")) cfg.mcmc.tau = *v;
  if (auto v = doc.get_double("mcmc.gamma")) cfg.mcmc.gamma = *v;
  return cfg;
}

ConfigDocument RunConfig::to_document() const {
  ConfigDocument doc;
  doc.set("data.path", data_path);
  doc.set("data.scale_by", format_double(scale_by));
  doc.set("prior.geom_p", format_double(prior.geom_p));
  doc.set("prior.beta", format_double(prior.beta));
  doc.set("prior.xi_var0", format_double(prior.xi_var0));
  doc.set("prior.a", format_double(prior.a));
  doc.set("prior.b", format_double(prior.b));
  doc.set("prior.g_mu", format_double(prior.g_mu));
  doc.set("prior.m_mu", format_double(prior.m_mu));
  doc.set("smc.N", std::to_string(smc.N));
  doc.set("smc.M", std::to_string(smc.M));
  doc.set("smc.c", format_double(smc.c));
  doc.set("smc.seed", std::to_string(smc.seed));
  doc.set("smc.k_max", std::to_string(smc.k_max));
  doc.set("smc.threads", std::to_string(smc.threads));
  if (smc.fixed_order) doc.set("smc.fixed_order", std::to_string(*smc.fixed_order));
  doc.set("likelihood.mode", to_string(smc.mode));
  doc.set("correction.enabled", correction.enabled ? "true" : "false");
  if (correction.subsample) doc.set("correction.subsample", std::to_string(*correction.subsample));
  doc.set("correction.max_n", std::to_string(correction.max_n));
  doc.set("correction.allow_large", correction.allow_large ? "true" : "false");
  doc.set("report.grid_size", std::to_string(report.grid_size));
  doc.set("report.grid_min", format_double(report.grid_min));
  doc.set("report.band_level", format_double(report.band_level));
  doc.set("report.hist_bins", std::to_string(report.hist_bins));
  doc.set("output.dir", output_dir);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        doc.set("sim.d", format_double(m.d));
        if constexpr (std::is_same_v<M, FexpSpectrum>) {
          doc.set("sim.model", "fexp");
          doc.set("sim.xi", format_list(m.xi, ", "));
          doc.set("sim.scale", format_double(m.scale));
        } else {
          doc.set("sim.model", "arfima");
          doc.set("sim.phi", format_list(m.phi, ", "));
          doc.set("sim.ma", format_list(m.ma, ", "));
          doc.set("sim.sigma2", format_double(m.sigma2));
        }
      },
      sim.model);
  doc.set("sim.n", std::to_string(sim.n));
  doc.set("sim.mu", format_double(sim.mu));
  doc.set("sim.seed", std::to_string(sim.seed));
  doc.set("sim.output", sim.output_path);
  doc.set("sim.grid_size", std::to_string(sim.grid_size));
  doc.set("mcmc.steps", std::to_string(mcmc.steps));
  doc.set("mcmc.thin", std::to_string(mcmc.thin));
  doc.set("mcmc.tau", format_double(mcmc.tau));
  doc.set("mcmc.gamma", format_double(mcmc.gamma));
  return doc;
}

void RunConfig::validate() const {
  if (!(scale_by > 0.0) || !std::isfinite(scale_by)) {
    throw ConfigError("data.scale_by must be positive");
  }
  prior.validate();
  smc.validate();
  report.validate();
  if (correction.max_n < 1) throw ConfigError("correction.max_n must be >= 1");
  if (correction.subsample && *correction.subsample > static_cast<std::size_t>(smc.N)) {
    throw ConfigError("correction.subsample exceeds smc.N");
  }
  if (mcmc.steps < 1) throw ConfigError("mcmc.steps must be >= 1");
  if (mcmc.thin < 1) throw ConfigError("mcmc.thin must be >= 1");
  if (!(mcmc.tau > 0.0)) throw ConfigError("mcmc.tau must be > 0");
  if (!(mcmc.gamma >= 0.0 && mcmc.gamma <= 1.0)) throw ConfigError("mcmc.gamma must lie in [0, 1]");
}

// ---- posterior functionals ------------------------------------------------

double weighted_quantile(std::span<const double> values, std::span<const double> weights,
                         double q) {
  if (values.empty() || values.size() != weights.size()) {
    throw ConfigError("weighted_quantile: need matching nonempty values and weights");
  }
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("weighted_quantile: q outside [0, 1]");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw ConfigError("weighted_quantile: weights sum to zero");
  double cum = 0.0;
  for (std::size_t i : order) {
    cum += weights[i] / total;
    if (weights[i] > 0.0 && cum >= q - 1e-12) return values[i];
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (weights[*it] > 0.0) return values[*it];
  }
  return values[order.back()];
}

Eigen::VectorXd lambda_grid(const ReportOptions& opts) {
  opts.validate();
  Eigen::VectorXd grid(opts.grid_size);
  const double lo = std::log(opts.grid_min);
  const double hi = std::log(std::numbers::pi);
  for (int i = 0; i < opts.grid_size; ++i) {
    grid[i] = std::exp(lo + (hi - lo) * i / (opts.grid_size - 1));
  }
  grid[opts.grid_size - 1] = std::numbers::pi;
  return grid;
}

double log_fbar(const ThetaParams& theta, double lambda) {
  return -theta.d() * std::log(abs_one_minus_expi_sq(lambda)) +
         cosine_series(theta.xi(), std::cos(lambda)) - std::log(2.0 * std::numbers::pi);
}

BandTable compute_bands(std::span<const ThetaParams> particles, std::span<const double> weights,
                        const ReportOptions& opts) {
  require_weights(particles, weights);
  BandTable out;
  out.lambda = lambda_grid(opts);
  const Eigen::Index g = out.lambda.size();
  out.lower.resize(g);
  out.median.resize(g);
  out.upper.resize(g);
  const double q_lo = 0.5 * (1.0 - opts.band_level);
  const double q_hi = 0.5 * (1.0 + opts.band_level);
  std::vector<double> curve(particles.size());
  for (Eigen::Index i = 0; i < g; ++i) {
    for (std::size_t p = 0; p < particles.size(); ++p) {
      curve[p] = log_fbar(particles[p], out.lambda[i]);
    }
    out.lower[i] = weighted_quantile(curve, weights, q_lo);
    out.median[i] = weighted_quantile(curve, weights, 0.5);
    out.upper[i] = weighted_quantile(curve, weights, q_hi);
  }
  return out;
}

Histogram d_histogram(std::span<const ThetaParams> particles, std::span<const double> weights,
                      int bins) {
  require_weights(particles, weights);
  if (bins < 1) throw ConfigError("d_histogram: bins must be >= 1");
  Histogram h;
  h.edges = Eigen::VectorXd::LinSpaced(bins + 1, 0.0, 0.5);
  h.mass = Eigen::VectorXd::Zero(bins);
  double total = 0.0;
  for (double w : weights) total += w;
  for (std::size_t p = 0; p < particles.size(); ++p) {
    auto b = static_cast<int>(std::floor(particles[p].d() / 0.5 * bins));
    b = std::clamp(b, 0, bins - 1);
    h.mass[b] += weights[p] / total;
  }
  return h;
}

std::map<int, double> k_mass(std::span<const ThetaParams> particles,
                             std::span<const double> weights) {
  require_weights(particles, weights);
  double total = 0.0;
  for (double w : weights) total += w;
  std::map<int, double> out;
  for (std::size_t p = 0; p < particles.size(); ++p) {
    out[particles[p].order()] += weights[p] / total;
  }
  return out;
}

PosteriorSummary summarize(std::span<const ThetaParams> particles,
                           std::span<const double> weights) {
  require_weights(particles, weights);
  PosteriorSummary s;
  std::vector<double> d(particles.size());
  for (std::size_t p = 0; p < particles.size(); ++p) d[p] = particles[p].d();
  double total = 0.0;
  for (double w : weights) total += w;
  for (std::size_t p = 0; p < particles.size(); ++p) s.mean_d += weights[p] / total * d[p];
  double var = 0.0;
  for (std::size_t p = 0; p < particles.size(); ++p) {
    var += weights[p] / total * (d[p] - s.mean_d) * (d[p] - s.mean_d);
  }
  s.sd_d = std::sqrt(var);
  s.q10_d = weighted_quantile(d, weights, 0.1);
  s.median_d = weighted_quantile(d, weights, 0.5);
  s.q90_d = weighted_quantile(d, weights, 0.9);
  s.k_mass = k_mass(particles, weights);
  double best = -1.0;
  for (const auto& [k, m] : s.k_mass) {
    if (m > best) {
      best = m;
      s.k_mode = k;
    }
  }
  return s;
}

// ---- particle files -------------------------------------------------------

void write_particles_csv(const std::string& path, const ParticleTable& table) {
  if (table.particles.size() != table.weights.size() ||
      (table.log_w_corr && table.log_w_corr->size() != table.particles.size())) {
    throw ConfigError("write_particles_csv: column lengths differ");
  }
  std::string text = table.log_w_corr ? "k,t,d,weight,log_w_corr,xi\n" : "k,t,d,weight,xi\n";
  for (std::size_t i = 0; i < table.particles.size(); ++i) {
    const ThetaParams& th = table.particles[i];
    text += std::to_string(th.order()) + "," + format_double(th.t()) + "," +
            format_double(th.d()) + "," + format_double(table.weights[i]) + ",";
    if (table.log_w_corr) text += format_double((*table.log_w_corr)[i]) + ",";
    text += format_list(th.xi(), ";") + "\n";
  }
  write_text(path, text);
}

ParticleTable read_particles_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open particle file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty particle file");
  line = trim(line);
  bool with_corr = false;
  if (line == "k,t,d,weight,log_w_corr,xi") {
    with_corr = true;
  } else if (line != "k,t,d,weight,xi") {
    throw DataError(path + ": unexpected header '" + line + "'");
  }
  ParticleTable table;
  if (with_corr) table.log_w_corr.emplace();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    const std::size_t expected = with_corr ? 6 : 5;
    if (fields.size() != expected) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": expected " +
                      std::to_string(expected) + " fields");
    }
    try {
      double k = 0.0, t = 0.0, w = 0.0;
      if (!parse_number(fields[0], k) || !parse_number(fields[1], t) ||
          !parse_number(fields[3], w)) {
        throw ConfigError("bad number");
      }
      Eigen::VectorXd xi = parse_number_list(fields.back(), ';', "xi");
      if (static_cast<double>(xi.size()) != k) throw ConfigError("k does not match xi length");
      Eigen::VectorXd block(xi.size() + 1);
      block[0] = t;
      block.tail(xi.size()) = xi;
      table.particles.emplace_back(std::move(block));
      table.weights.push_back(w);
      if (with_corr) {
        double lw = 0.0;
        if (!parse_number(fields[4], lw)) throw ConfigError("bad log_w_corr");
        table.log_w_corr->push_back(lw);
      }
    } catch (const ConfigError& err) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  if (table.particles.empty()) throw DataError(path + ": no particles");
  return table;
}

// ---- commands -------------------------------------------------------------

Eigen::VectorXd cmd_simulate(const RunConfig& cfg) {
  cfg.sim.validate();
  if (cfg.sim.output_path.empty()) throw ConfigError("sim.output (or --output) is required");
  Rng rng = make_stream(cfg.sim.seed, 0);
  const Eigen::VectorXd x = simulate_series(cfg.sim, rng);
  const fs::path parent = fs::path(cfg.sim.output_path).parent_path();
  std::error_code ec;
  if (!parent.empty()) fs::create_directories(parent, ec);
  write_series(cfg.sim.output_path, x);
  json meta = model_json(cfg.sim.model);
  meta["n"] = cfg.sim.n;
  meta["mu"] = cfg.sim.mu;
  meta["seed"] = cfg.sim.seed;
  meta["grid_size"] = cfg.sim.grid_size;
  write_text(cfg.sim.output_path + ".meta.json", meta.dump(2) + "\n");
  return x;
}

FitResult cmd_fit(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.data_path.empty()) throw ConfigError("data.path is required");
  const Eigen::VectorXd x = read_series(cfg.data_path, cfg.scale_by);
  const DatasetContext data = prepare_dataset(x);
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  FitResult res;
  res.system = run_smc(data, cfg.prior, cfg.smc);
  const Eigen::VectorXd smc_w = res.system.normalized_weights();

  if (cfg.correction.enabled) {
    CorrectionOptions opts;
    opts.subsample = cfg.correction.subsample;
    opts.threads = cfg.smc.threads;
    opts.max_n = cfg.correction.max_n;
    opts.allow_large = cfg.correction.allow_large;
    opts.mode = cfg.smc.mode;
    Rng rng = make_stream(cfg.smc.seed, static_cast<std::uint64_t>(cfg.smc.N) + 1);
    res.corrected = correction_weights(res.system.particles, data, cfg.prior, opts, rng);
    std::clog << "correction: ESS " << res.corrected->ess << " of " << res.corrected->size()
              << " in " << res.corrected->seconds << " s\n";
    res.table.particles = res.corrected->particles;
    res.table.weights = as_vector(res.corrected->weights);
    res.table.log_w_corr = as_vector(res.corrected->log_w_corr);
  } else {
    res.table.particles = res.system.particles;
    res.table.weights = as_vector(smc_w);
  }
  res.summary = summarize(res.table.particles, res.table.weights);

  write_particles_csv((dir / "particles.csv").string(), res.table);
  write_report_files(dir, res.table.particles, res.table.weights, cfg.report);

  json iterations = json::array();
  std::vector<double> gammas, ess_trace, rw_rates, bd_rates;
  for (const auto& rec : res.system.history) {
    iterations.push_back({{"gamma", rec.gamma},
                          {"ess", rec.ess},
                          {"log_mean_weight", rec.log_mean_weight},
                          {"rw_acceptance", rec.moves.rw_rate()},
                          {"bd_acceptance", rec.moves.bd_rate()},
                          {"k_max_hits", rec.moves.k_max_hits}});
    gammas.push_back(rec.gamma);
    ess_trace.push_back(rec.ess);
    rw_rates.push_back(rec.moves.rw_rate());
    bd_rates.push_back(rec.moves.bd_rate());
  }
  json diag;
  diag["config"] = cfg.to_document().entries();
  diag["n"] = data.size();
  diag["smc"] = {{"iterations", iterations},   {"gamma_schedule", gammas},
                 {"ess_trace", ess_trace},     {"rw_acceptance", rw_rates},
                 {"bd_acceptance", bd_rates},  {"log_evidence", res.system.log_evidence}};
  if (res.corrected) {
    diag["correction"] = {{"enabled", true},
                          {"count", res.corrected->size()},
                          {"ess", res.corrected->ess},
                          {"ess_fraction", res.corrected->ess_fraction},
                          {"failures", res.corrected->failures}};
  } else {
    diag["correction"] = {{"enabled", false}};
  }
  diag["summary"] = summary_json(res.summary);
  write_text(dir / "diagnostics.json", diag.dump(2) + "\n");
  return res;
}

PosteriorSummary cmd_report(const std::string& particles_path, const RunConfig& cfg) {
  cfg.report.validate();
  const ParticleTable table = read_particles_csv(particles_path);
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_report_files(dir, table.particles, table.weights, cfg.report);
  const PosteriorSummary s = summarize(table.particles, table.weights);
  write_text(dir / "summary.json", summary_json(s).dump(2) + "\n");
  return s;
}

McmcTrace run_mcmc_chain(const LogLikelihood& log_lik, const PriorConfig& prior,
                         const McmcSettings& settings, int k_max, std::uint64_t seed) {
  if (settings.gamma > 0.0 && !log_lik) {
    throw ConfigError("mcmc: a likelihood is required when gamma > 0");
  }
  Rng rng = make_stream(seed, 0);
  KernelConfig kcfg;
  kcfg.gamma = settings.gamma;
  kcfg.k_max = k_max;
  for (int k = 0; k <= k_max; ++k) {
    kcfg.set_scale(k, settings.tau * Eigen::MatrixXd::Identity(k + 1, k + 1));
  }
  const TemperedTarget target{prior, settings.gamma > 0.0 ? log_lik : LogLikelihood{}};
  ThetaParams start = sample_prior(prior, rng);
  if (start.order() > k_max) start = ThetaParams(Eigen::VectorXd(start.coords.head(k_max + 1)));
  Particle p{start, target.evaluate(start)};
  McmcTrace trace;
  for (long s = 1; s <= settings.steps; ++s) {
    p = rw_metropolis_step(p, kcfg, target, rng, trace.stats);
    p = birth_death_step(p, kcfg, target, rng, trace.stats);
    if (s % settings.thin == 0) {
      trace.step.push_back(s);
      trace.k.push_back(p.theta.order());
      trace.d.push_back(p.theta.d());
      trace.log_lik.push_back(p.log_lik);
    }
  }
  return trace;
}

McmcResult cmd_mcmc_baseline(const RunConfig& cfg) {
  cfg.validate();
  std::optional<DatasetContext> data;
  LogLikelihood log_lik;
  if (cfg.mcmc.gamma > 0.0) {
    if (cfg.data_path.empty()) throw ConfigError("data.path is required when mcmc.gamma > 0");
    data = prepare_dataset(read_series(cfg.data_path, cfg.scale_by));
    const ApproxMode mode = cfg.smc.mode;
    log_lik = [&data, &cfg, mode](const ThetaParams& theta) {
      return approx_log_lik(theta, *data, cfg.prior, mode);
    };
  }
  const McmcTrace trace = run_mcmc_chain(log_lik, cfg.prior, cfg.mcmc, cfg.smc.k_max, cfg.smc.seed);
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  std::string text = "step,k,d,log_lik\n";
  for (std::size_t i = 0; i < trace.step.size(); ++i) {
    text += std::to_string(trace.step[i]) + "," + std::to_string(trace.k[i]) + "," +
            format_double(trace.d[i]) + "," + format_double(trace.log_lik[i]) + "\n";
  }
  write_text(dir / "trace.csv", text);
  json diag;
  diag["config"] = cfg.to_document().entries();
  diag["rw_acceptance"] = trace.stats.rw_rate();
  diag["bd_acceptance"] = trace.stats.bd_rate();
  diag["k_max_hits"] = trace.stats.k_max_hits;
  diag["rows"] = trace.step.size();
  write_text(dir / "mcmc_diagnostics.json", diag.dump(2) + "\n");
  return {trace.stats, static_cast<long>(trace.step.size())};
}

}  // namespace lmspec
