#include <doctest.h>

#include <sys/wait.h>

#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lmspec/cli_report.hpp"
#include "lmspec/errors.hpp"
#include "test_support.hpp"

using namespace lmspec;
using namespace lmspec::testing;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lmspec_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::size_t count_lines(const fs::path& path) {
  const std::string text = read_text(path);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// log fbar evaluated with complex arithmetic and a direct cosine sum
double log_fbar_oracle(const ThetaParams& th, double lambda) {
  const double mod = std::abs(1.0 - std::polar(1.0, -lambda));
  double s = 0.0;
  for (Eigen::Index j = 1; j <= th.order(); ++j) s += th.xi()[j - 1] * std::cos(j * lambda);
  return -2.0 * th.d() * std::log(mod) + s - std::log(2.0 * kPi);
}

std::vector<ThetaParams> prior_draws(int count, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  std::vector<ThetaParams> out;
  for (int i = 0; i < count; ++i) out.push_back(sample_prior(PriorConfig{}, rng));
  return out;
}

// small fit configuration on a simulated fractional-noise series
RunConfig small_fit(const fs::path& dir, bool correction) {
  RunConfig cfg;
  cfg.sim.model = FexpSpectrum{0.3, {}, 1.0};
  cfg.sim.n = 128;
  cfg.sim.seed = 11;
  cfg.sim.output_path = (dir / "series.csv").string();
  cmd_simulate(cfg);
  cfg.data_path = cfg.sim.output_path;
  cfg.smc.N = 120;
  cfg.smc.M = 2;
  cfg.smc.seed = 12;
  cfg.correction.enabled = correction;
  cfg.report.grid_size = 50;
  cfg.output_dir = (dir / "out").string();
  return cfg;
}

int run_cli(const std::string& args) {
  const char* exe = std::getenv("LMSPEC_CLI");
  REQUIRE_MESSAGE(exe != nullptr, "LMSPEC_CLI is not set");
  const std::string cmd = std::string("\"") + exe + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config grammar: comments, blanks, errors") {
  const ConfigDocument doc = ConfigDocument::parse(
      "# header\n\n smc.N = 250   # trailing\nsim.xi = 0.5, -0.3\ncorrection.enabled = no\n");
  CHECK(doc.get_int("smc.N") == 250);
  CHECK(doc.get_bool("correction.enabled") == false);
  const Eigen::VectorXd xi = *doc.get_list("sim.xi");
  REQUIRE(xi.size() == 2);
  CHECK(xi[1] == -0.3);
  CHECK_FALSE(doc.get_string("smc.M").has_value());

  try {
    ConfigDocument::parse("smc.N = 1\n\nsmc.M 5\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(ConfigDocument::parse("smc.N = 1\nsmc.N = 2\n"), ConfigError);
  CHECK_THROWS_AS(ConfigDocument::parse(" = 2\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_document(ConfigDocument::parse("smc.NN = 1\n")), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_document(ConfigDocument::parse("smc.N = 1.5\n")), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_document(ConfigDocument::parse("smc.c = abc\n")), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_document(ConfigDocument::parse("sim.model = ar\n")), ConfigError);
  CHECK_THROWS_AS(ConfigDocument::load("/nonexistent/lmspec.cfg"), ConfigError);
}

TEST_CASE("RunConfig survives a document round trip") {
  RunConfig cfg;
  cfg.data_path = "x.csv";
  cfg.scale_by = 1000.0;
  cfg.prior.g_mu = 0.3;
  cfg.smc.N = 321;
  cfg.smc.c = 0.7;
  cfg.smc.fixed_order = 1;
  cfg.correction.subsample = 100;
  cfg.report.band_level = 0.9;
  cfg.sim.model = ArfimaSpectrum{0.45, Eigen::VectorXd::Constant(1, -0.9),
                                 Eigen::VectorXd::Constant(1, -0.2), 1.0};
  cfg.mcmc.tau = 0.015;
  const std::string text = cfg.to_document().to_text();
  const RunConfig back = RunConfig::from_document(ConfigDocument::parse(text));
  CHECK(back.to_document().to_text() == text);
  CHECK(back.smc.N == 321);
  CHECK(back.smc.fixed_order == 1);
  CHECK(back.correction.subsample == std::size_t{100});
  CHECK(std::holds_alternative<ArfimaSpectrum>(back.sim.model));
}

TEST_CASE("RunConfig defaults and domain checks") {
  RunConfig cfg;
  CHECK(cfg.report.band_level == 0.8);
  CHECK(cfg.report.grid_size == 200);
  CHECK(cfg.report.hist_bins == 40);
  CHECK_NOTHROW(cfg.validate());
  cfg.report.band_level = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = RunConfig{};
  cfg.correction.subsample = static_cast<std::size_t>(cfg.smc.N) + 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = RunConfig{};
  cfg.mcmc.gamma = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("weighted quantile inverts the right-continuous CDF") {
  const std::vector<double> v{3.0, 1.0, 4.0, 2.0};
  const std::vector<double> eq{1.0, 1.0, 1.0, 1.0};
  CHECK(weighted_quantile(v, eq, 0.0) == 1.0);
  CHECK(weighted_quantile(v, eq, 0.25) == 1.0);
  CHECK(weighted_quantile(v, eq, 0.26) == 2.0);
  CHECK(weighted_quantile(v, eq, 0.5) == 2.0);
  CHECK(weighted_quantile(v, eq, 1.0) == 4.0);
  const std::vector<double> w{0.0, 0.1, 0.9, 0.0};
  CHECK(weighted_quantile(v, w, 0.05) == 1.0);
  CHECK(weighted_quantile(v, w, 0.5) == 4.0);
  CHECK(weighted_quantile(v, w, 1.0) == 4.0);
  CHECK_THROWS_AS(weighted_quantile(v, eq, 1.5), ConfigError);
  CHECK_THROWS_AS(weighted_quantile(v, std::vector<double>(4, 0.0), 0.5), ConfigError);
}

TEST_CASE("lambda grid is log-spaced on [grid_min, pi]") {
  ReportOptions opts;
  const Eigen::VectorXd g = lambda_grid(opts);
  REQUIRE(g.size() == 200);
  CHECK(g[0] == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(g[199] == kPi);
  const double ratio = g[1] / g[0];
  for (Eigen::Index i = 1; i < g.size(); ++i) {
    CHECK(g[i] / g[i - 1] == doctest::Approx(ratio).epsilon(1e-12));
  }
}

TEST_CASE("log_fbar matches a direct evaluation") {
  for (const ThetaParams& th : prior_draws(20, 13)) {
    for (double lam : {1e-3, 0.1, 1.0, 2.5, kPi}) {
      CHECK(log_fbar(th, lam) == doctest::Approx(log_fbar_oracle(th, lam)).epsilon(1e-12));
    }
  }
}

TEST_CASE("a single particle collapses the band onto its curve") {
  const ThetaParams th = ThetaParams::from_d(0.3, Eigen::Vector2d(0.5, -0.3));
  const std::vector<ThetaParams> p{th};
  const std::vector<double> w{1.0};
  const BandTable b = compute_bands(p, w, ReportOptions{});
  for (Eigen::Index i = 0; i < b.lambda.size(); ++i) {
    CHECK(b.lower[i] == b.median[i]);
    CHECK(b.upper[i] == b.median[i]);
    CHECK(b.median[i] == doctest::Approx(log_fbar_oracle(th, b.lambda[i])).epsilon(1e-12));
  }
}

TEST_CASE("two equal-weight particles give the pointwise min and max") {
  const std::vector<ThetaParams> p{ThetaParams::from_d(0.1, Eigen::VectorXd::Constant(1, 0.8)),
                                   ThetaParams::from_d(0.4, Eigen::Vector2d(-0.5, 0.2))};
  const std::vector<double> w{0.5, 0.5};
  const BandTable b = compute_bands(p, w, ReportOptions{});
  for (Eigen::Index i = 0; i < b.lambda.size(); ++i) {
    const double a = log_fbar(p[0], b.lambda[i]);
    const double c = log_fbar(p[1], b.lambda[i]);
    CHECK(b.lower[i] == std::min(a, c));
    CHECK(b.upper[i] == std::max(a, c));
    // F(min) = 1/2 reaches the median level
    CHECK(b.median[i] == std::min(a, c));
  }
}

TEST_CASE("band ordering, histogram and k-mass normalization on random sets") {
  Rng rng = make_stream(14, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const auto p = prior_draws(200, 15 + rep);
    std::vector<double> w(p.size());
    for (double& x : w) x = uniform_open(rng);
    ReportOptions opts;
    opts.grid_size = 40;
    const BandTable b = compute_bands(p, w, opts);
    CHECK((b.lower.array() <= b.median.array()).all());
    CHECK((b.median.array() <= b.upper.array()).all());
    const Histogram h = d_histogram(p, w, 40);
    CHECK(std::abs(h.mass.sum() - 1.0) <= 1e-12);
    CHECK(h.edges[0] == 0.0);
    CHECK(h.edges[40] == 0.5);
    double total = 0.0;
    for (const auto& [k, m] : k_mass(p, w)) total += m;
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(k_mass(std::vector<ThetaParams>{}, std::vector<double>{}), DataError);
}

TEST_CASE("summarize against hand-computed moments") {
  const std::vector<ThetaParams> p{ThetaParams::from_d(0.1), ThetaParams::from_d(0.2),
                                   ThetaParams::from_d(0.4, Eigen::VectorXd::Constant(1, 1.0))};
  const std::vector<double> w{1.0, 2.0, 1.0};
  const PosteriorSummary s = summarize(p, w);
  const double mean = (0.1 + 2 * 0.2 + 0.4) / 4.0;
  const double var = ((0.1 - mean) * (0.1 - mean) + 2 * (0.2 - mean) * (0.2 - mean) +
                      (0.4 - mean) * (0.4 - mean)) / 4.0;
  CHECK(s.mean_d == doctest::Approx(mean).epsilon(1e-14));
  CHECK(s.sd_d == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
  CHECK(s.q10_d == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(s.median_d == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(s.q90_d == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(s.k_mode == 0);
  CHECK(s.k_mass.at(0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(s.k_mass.at(1) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("particle CSV round trip is lossless") {
  const fs::path dir = temp_dir("particles");
  ParticleTable t;
  t.particles = prior_draws(50, 16);
  Rng rng = make_stream(17, 0);
  double total = 0.0;
  for (std::size_t i = 0; i < t.particles.size(); ++i) {
    t.weights.push_back(uniform_open(rng));
    total += t.weights.back();
  }
  for (double& x : t.weights) x /= total;
  t.log_w_corr = std::vector<double>(t.particles.size());
  for (double& x : *t.log_w_corr) x = standard_normal(rng);
  (*t.log_w_corr)[3] = -std::numeric_limits<double>::infinity();

  const std::string path = (dir / "p.csv").string();
  write_particles_csv(path, t);
  const ParticleTable back = read_particles_csv(path);
  REQUIRE(back.particles.size() == t.particles.size());
  for (std::size_t i = 0; i < t.particles.size(); ++i) {
    CHECK(back.particles[i] == t.particles[i]);
    CHECK(back.weights[i] == t.weights[i]);
    CHECK((*back.log_w_corr)[i] == (*t.log_w_corr)[i]);
  }
  t.log_w_corr.reset();
  write_particles_csv(path, t);
  CHECK(read_text(path).rfind("k,t,d,weight,xi\n", 0) == 0);
  CHECK_FALSE(read_particles_csv(path).log_w_corr.has_value());

  write_text(path, "k,t,d,weight,xi\n");
  CHECK_THROWS_AS(read_particles_csv(path), DataError);
  write_text(path, "k,t,d,weight,xi\n1,0.1,0.2,1,\n");
  CHECK_THROWS_AS(read_particles_csv(path), DataError);
  write_text(path, "");
  CHECK_THROWS_AS(read_particles_csv(path), DataError);
}

TEST_CASE("simulate writes n lines and a sidecar") {
  const fs::path dir = temp_dir("simulate");
  RunConfig cfg;
  cfg.sim.n = 10;
  cfg.sim.seed = 5;
  cfg.sim.output_path = (dir / "flat.csv").string();
  const Eigen::VectorXd x = cmd_simulate(cfg);
  CHECK(x.size() == 10);
  CHECK(count_lines(cfg.sim.output_path) == 10);
  CHECK(read_series(cfg.sim.output_path) == x);
  const auto meta = nlohmann::json::parse(read_text(cfg.sim.output_path + ".meta.json"));
  CHECK(meta["seed"] == 5);
  CHECK(meta["model"] == "fexp");
  CHECK(meta["n"] == 10);

  cfg.sim.model = FexpSpectrum{0.7, {}, 1.0};
  cfg.sim.output_path = (dir / "bad.csv").string();
  CHECK_THROWS_AS(cmd_simulate(cfg), ConfigError);
  CHECK_FALSE(fs::exists(dir / "bad.csv"));
  CHECK_FALSE(fs::exists(dir / "bad.csv.meta.json"));
}

TEST_CASE("fit with correction: outputs, report agreement, reproducibility") {
  const fs::path dir = temp_dir("fit");
  const RunConfig cfg = small_fit(dir, true);
  const FitResult res = cmd_fit(cfg);
  REQUIRE(res.corrected.has_value());
  const fs::path out(cfg.output_dir);
  for (const char* f : {"particles.csv", "diagnostics.json", "bands.csv", "d_histogram.csv", "k_mass.csv"}) {
    CHECK(fs::exists(out / f));
  }
  CHECK(read_text(out / "particles.csv").rfind("k,t,d,weight,log_w_corr,xi\n", 0) == 0);
  CHECK(count_lines(out / "bands.csv") == 51);

  const auto diag = nlohmann::json::parse(read_text(out / "diagnostics.json"));
  const auto& gammas = diag["smc"]["gamma_schedule"];
  REQUIRE(gammas.size() >= 1);
  CHECK(gammas.back().get<double>() == 1.0);
  CHECK(diag["smc"]["rw_acceptance"].size() == gammas.size());
  CHECK(diag["smc"]["bd_acceptance"].size() == gammas.size());
  CHECK(diag["correction"]["enabled"] == true);
  CHECK(diag["config"]["smc.N"] == "120");

  // report over the written file reproduces the in-process corrected estimate
  RunConfig rep = cfg;
  rep.output_dir = (dir / "report").string();
  const PosteriorSummary s = cmd_report((out / "particles.csv").string(), rep);
  const double direct = corrected_estimate(*res.corrected, [](const ThetaParams& th) { return th.d(); });
  CHECK(std::abs(s.mean_d - direct) <= 1e-12);
  CHECK(s.mean_d == res.summary.mean_d);
  CHECK(read_text(out / "bands.csv") == read_text(fs::path(rep.output_dir) / "bands.csv"));
  CHECK(read_text(out / "k_mass.csv") == read_text(fs::path(rep.output_dir) / "k_mass.csv"));
  CHECK(fs::exists(fs::path(rep.output_dir) / "summary.json"));

  // same config and seed: byte-identical outputs
  std::map<std::string, std::string> first;
  for (const auto& e : fs::directory_iterator(out)) first[e.path().filename().string()] = read_text(e.path());
  cmd_fit(cfg);
  for (const auto& [name, text] : first) CHECK_MESSAGE(read_text(out / name) == text, name);
}

TEST_CASE("fit without correction omits the correction columns") {
  const fs::path dir = temp_dir("fit_nocorr");
  const RunConfig cfg = small_fit(dir, false);
  const FitResult res = cmd_fit(cfg);
  CHECK_FALSE(res.corrected.has_value());
  const fs::path out(cfg.output_dir);
  CHECK(read_text(out / "particles.csv").rfind("k,t,d,weight,xi\n", 0) == 0);
  const auto diag = nlohmann::json::parse(read_text(out / "diagnostics.json"));
  CHECK(diag["correction"]["enabled"] == false);
  CHECK_FALSE(diag["correction"].contains("ess"));
}

TEST_CASE("fit rejects missing data before running") {
  RunConfig cfg;
  cfg.output_dir = temp_dir("fit_missing").string();
  CHECK_THROWS_AS(cmd_fit(cfg), ConfigError);
  cfg.data_path = "/nonexistent/series.csv";
  CHECK_THROWS_AS(cmd_fit(cfg), DataError);
}

TEST_CASE("mcmc baseline smoke run writes one row per step") {
  const fs::path dir = temp_dir("mcmc");
  RunConfig cfg = small_fit(dir, false);
  cfg.mcmc.steps = 1000;
  cfg.mcmc.gamma = 1.0;
  const McmcResult res = cmd_mcmc_baseline(cfg);
  CHECK(res.rows == 1000);
  const fs::path trace = fs::path(cfg.output_dir) / "trace.csv";
  CHECK(count_lines(trace) == 1001);
  CHECK(read_text(trace).rfind("step,k,d,log_lik\n", 0) == 0);
  const auto diag = nlohmann::json::parse(read_text(fs::path(cfg.output_dir) / "mcmc_diagnostics.json"));
  CHECK(diag["rows"] == 1000);
  CHECK(diag["rw_acceptance"].get<double>() > 0.0);

  cfg.mcmc.thin = 10;
  CHECK(cmd_mcmc_baseline(cfg).rows == 100);
}

TEST_CASE("gamma = 0 baseline chain has Geometric(1/5) k occupancy") {
  McmcSettings s;
  s.gamma = 0.0;
  s.steps = 200000;
  s.thin = 50;
  const McmcTrace tr = run_mcmc_chain({}, PriorConfig{}, s, 50, 18);
  REQUIRE(tr.k.size() == 4000);
  constexpr int kBins = 8;
  std::array<double, kBins> counts{};
  for (int k : tr.k) counts[std::min(k, kBins - 1)] += 1.0;
  double chi2 = 0.0, tail = 1.0;
  for (int k = 0; k < kBins; ++k) {
    const double prob = k < kBins - 1 ? 0.2 * std::pow(0.8, k) : tail;
    tail -= prob;
    const double expected = static_cast<double>(tr.k.size()) * prob;
    chi2 += (counts[k] - expected) * (counts[k] - expected) / expected;
  }
  const double pval = chi_square_sf(chi2, kBins - 1);
  MESSAGE("chi2 " << chi2 << " p " << pval);
  CHECK(pval > 0.01);
  CHECK(ks_uniform(tr.d, 0.0, 0.5) < 0.05);
}

// Known failure: with Sigma_k = tau I the proposal sd sqrt(0.015) is several
// posterior sds per coordinate at n = 10^4, so the rate lands near 1%.
TEST_CASE("tau = 0.015 on ARFIMA(1, 0.45, 1) data gives RW acceptance near 25%" *
          doctest::may_fail()) {
  const fs::path dir = temp_dir("mcmc_arfima");
  RunConfig cfg;
  cfg.sim.model = ArfimaSpectrum{0.45, Eigen::VectorXd::Constant(1, -0.9),
                                 Eigen::VectorXd::Constant(1, -0.2), 1.0};
  cfg.sim.n = 10000;
  cfg.sim.seed = 19;
  cfg.sim.output_path = (dir / "arfima.csv").string();
  cmd_simulate(cfg);
  cfg.data_path = cfg.sim.output_path;
  cfg.mcmc.steps = 4000;
  cfg.mcmc.tau = 0.015;
  cfg.mcmc.gamma = 1.0;
  cfg.smc.seed = 20;
  cfg.output_dir = (dir / "out").string();
  const McmcResult res = cmd_mcmc_baseline(cfg);
  MESSAGE("RW acceptance " << res.stats.rw_rate());
  CHECK(std::abs(res.stats.rw_rate() - 0.25) <= 0.10);
}

TEST_CASE("CLI exit codes") {
  const fs::path dir = temp_dir("cli");
  const std::string cfg_path = (dir / "sim.cfg").string();
  write_text(cfg_path, "sim.n = 10\nsim.seed = 3\nsim.output = " + (dir / "x.csv").string() + "\n");
  CHECK(run_cli("simulate --config " + cfg_path) == 0);
  CHECK(count_lines(dir / "x.csv") == 10);

  // --output overrides the simulate target
  CHECK(run_cli("simulate --config " + cfg_path + " --output " + (dir / "y.csv").string()) == 0);
  CHECK(read_text(dir / "x.csv") == read_text(dir / "y.csv"));
  CHECK(run_cli("simulate --config " + cfg_path + " --seed 4 --output " + (dir / "z.csv").string()) == 0);
  CHECK(read_text(dir / "x.csv") != read_text(dir / "z.csv"));

  const std::string bad_d = (dir / "bad_d.cfg").string();
  write_text(bad_d, "sim.n = 10\nsim.d = 0.7\nsim.output = " + (dir / "bad.csv").string() + "\n");
  CHECK(run_cli("simulate --config " + bad_d) == 2);
  CHECK_FALSE(fs::exists(dir / "bad.csv"));

  const std::string unknown = (dir / "unknown.cfg").string();
  write_text(unknown, "smc.particles = 10\n");
  CHECK(run_cli("fit --config " + unknown) == 2);
  CHECK(run_cli("fit --config " + (dir / "missing.cfg").string()) == 2);
  CHECK(run_cli("fit --config " + cfg_path + " --bogus-flag") == 2);
  CHECK(run_cli("") == 2);

  const std::string no_data = (dir / "nodata.cfg").string();
  write_text(no_data, "data.path = " + (dir / "absent.csv").string() + "\noutput.dir = " +
                          (dir / "out").string() + "\n");
  CHECK(run_cli("fit --config " + no_data) == 3);
  write_text(dir / "garbage.csv", "1\n2\nthree\n");
  write_text(no_data, "data.path = " + (dir / "garbage.csv").string() + "\noutput.dir = " +
                          (dir / "out").string() + "\n");
  CHECK(run_cli("fit --config " + no_data) == 3);
  CHECK(run_cli("report --config " + no_data + " --particles " + (dir / "garbage.csv").string()) == 3);

  // a near-unit AR root makes the dense covariance factorization fail
  const std::string singular = (dir / "singular.cfg").string();
  write_text(singular, "sim.model = arfima\nsim.d = 0.49\nsim.phi = 0.9999999\nsim.n = 2000\nsim.output = " +
                           (dir / "s.csv").string() + "\n");
  CHECK(run_cli("simulate --config " + singular) == 4);

  const std::string fit_cfg = (dir / "fit.cfg").string();
  write_text(fit_cfg, "data.path = " + (dir / "x.csv").string() + "\noutput.dir = " + (dir / "fit").string() +
                          "\nsmc.N = 50\nsmc.M = 1\nreport.grid_size = 10\n");
  CHECK(run_cli("fit --config " + fit_cfg + " --no-correction --threads 2") == 0);
  CHECK(read_text(dir / "fit" / "particles.csv").rfind("k,t,d,weight,xi\n", 0) == 0);
  CHECK(run_cli("report --config " + fit_cfg) == 0);
  CHECK(fs::exists(dir / "fit" / "summary.json"));
  CHECK(run_cli("fit --config " + fit_cfg + " --subsample 20") == 0);
  CHECK(count_lines(dir / "fit" / "particles.csv") == 21);
  CHECK(run_cli("fit --config " + fit_cfg + " --subsample 51") == 2);
}
