#include <doctest.h>

#include "lmspec/errors.hpp"
#include "lmspec/likelihood_approx.hpp"
#include "lmspec/likelihood_exact.hpp"
#include "lmspec/simulate_data.hpp"
#include "lmspec/special_functions.hpp"
#include "test_support.hpp"

using namespace lmspec;
using namespace lmspec::testing;

namespace {

Eigen::VectorXd fractional_noise(double d, Eigen::Index n, std::uint64_t seed) {
  SimConfig cfg;
  cfg.model = FexpSpectrum{d, {}, 1.0};
  cfg.n = n;
  Rng rng = make_stream(seed, 0);
  return simulate_series(cfg, rng);
}

Eigen::VectorXd cosine_signal(Eigen::Index n) {
  Eigen::VectorXd x(n);
  for (Eigen::Index t = 0; t < n; ++t) x[t] = std::cos(2 * kPi * t / n);
  return x;
}

const ThetaParams kWhite(Eigen::VectorXd::Constant(1, -30.0));

}  // namespace

TEST_CASE("prepare_dataset: hand examples") {
  const DatasetContext flat = prepare_dataset(Eigen::Vector4d(1, 1, 1, 1));
  CHECK(flat.x_tilde.cwiseAbs().maxCoeff() == 0.0);
  CHECK(flat.c.cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(flat.periodogram.cwiseAbs().maxCoeff() <= 1e-15);

  const DatasetContext alt = prepare_dataset(Eigen::Vector4d(1, -1, 1, -1));
  CHECK(alt.c[0] == doctest::Approx(4.0));
  CHECK(alt.c[1] == doctest::Approx(-6.0));
  CHECK(alt.c[2] == doctest::Approx(4.0));
  CHECK(alt.c[3] == doctest::Approx(-2.0));

  const DatasetContext cs = prepare_dataset(cosine_signal(64));
  CHECK(cs.periodogram[1] == doctest::Approx(1024.0).epsilon(1e-6));
  CHECK(cs.periodogram[63] == doctest::Approx(1024.0).epsilon(1e-6));
}

TEST_CASE("prepare_dataset: invariants against naive sums") {
  Rng rng = make_stream(31, 0);
  for (Eigen::Index n : {37, 100, 128}) {
    const Eigen::VectorXd x = (normal_vector(n, rng).array() + 3.0).matrix();
    const DatasetContext data = prepare_dataset(x);
    CHECK(std::abs(data.x_tilde.sum()) <= 1e-9 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double naive = 0.0;
      for (Eigen::Index i = 0; i + j < n; ++i) naive += data.x_tilde[i] * data.x_tilde[i + j];
      if (j > 0) naive *= 2.0;
      CHECK(data.c[j] == doctest::Approx(naive).epsilon(1e-10).scale(data.c[0]));
    }
    const Eigen::VectorXcd ref = naive_dft(data.x_tilde.cast<std::complex<double>>());
    for (Eigen::Index j = 1; j < n; ++j) {
      CHECK(data.periodogram[j] >= 0.0);
      CHECK(data.periodogram[j] == doctest::Approx(std::norm(ref[j])).epsilon(1e-9).scale(data.c[0]));
      CHECK(std::abs(data.periodogram[j] - data.periodogram[n - j]) <=
            1e-9 * std::max(data.periodogram[j], 1e-12 * data.c[0]));
    }
  }
}

TEST_CASE("prepare_dataset: errors") {
  CHECK_THROWS_AS(prepare_dataset(Eigen::Vector3d(1, 2, 3)), DataError);
  CHECK_THROWS_AS(prepare_dataset(Eigen::Vector4d(1, NAN, 2, 3)), DataError);
  CHECK(parse_approx_mode("toeplitz") == ApproxMode::toeplitz);
  CHECK_THROWS_AS(parse_approx_mode("exact"), ConfigError);
}

TEST_CASE("quadratic forms: zero data and white-noise identities") {
  const DatasetContext zero = prepare_dataset(Eigen::VectorXd::Constant(16, 2.0));
  const ThetaParams th = ThetaParams::from_d(0.3, Eigen::VectorXd::Constant(1, 0.5));
  CHECK(quadform_approx_toeplitz(th, zero) == 0.0);
  CHECK(quadform_whittle(th, zero) == 0.0);

  Rng rng = make_stream(32, 0);
  const DatasetContext data = prepare_dataset(normal_vector(50, rng));
  CHECK(quadform_approx_toeplitz(kWhite, data) == doctest::Approx(data.c[0]).epsilon(1e-10));
  CHECK(quadform_whittle(kWhite, data) == doctest::Approx(data.c[0]).epsilon(1e-10));

  // single frequency, flat spectrum: (1 / 2 pi n) * 2 pi * (1024 + 1024) = 32
  const DatasetContext cs = prepare_dataset(cosine_signal(64));
  CHECK(quadform_whittle(kWhite, cs) == doctest::Approx(32.0).epsilon(1e-9));
  CHECK(quadform_whittle(kWhite, cs) == doctest::Approx(cs.c[0]).epsilon(1e-9));
}

TEST_CASE("quadform_approx_toeplitz equals the dense quadratic form") {
  Rng rng = make_stream(33, 0);
  const DatasetContext data = prepare_dataset(normal_vector(64, rng));
  const ThetaParams th = ThetaParams::from_d(0.25, Eigen::VectorXd::Constant(1, 0.3));
  const double d = th.d();
  auto h = [&](double lam) {
    return std::pow(abs_one_minus_expi_sq(lam), d) * std::exp(-0.3 * std::cos(lam)) / (2 * kPi);
  };

  // same coefficients, dense assembly: checks the c_j folding
  const FourierGrid grid = FourierGrid::for_length(64);
  const double q = quadform_approx_toeplitz(th, data);
  {
    const double c0 = std::exp(-0.3) / (2 * kPi);
    const double h0 = c0 * std::pow(abs_one_minus_expi_sq(grid.spacing), d) * (1 - 2 * d) / (1 + 2 * d);
    const auto gh = fourier_coeffs_bounded([&](double l) { return l == 0.0 ? h0 : h(l); }, 64, grid);
    const Eigen::MatrixXd t = build_toeplitz<double>(gh, 0.0, 64);
    const double dense = data.x_tilde.dot(t * data.x_tilde);
    CHECK(std::abs(q - dense) <= 1e-8 * std::abs(dense));
  }

  // quadrature coefficients (lambda = u^2 removes the |lambda|^{2d} kink)
  Eigen::VectorXd gq(64);
  for (int j = 0; j < 64; ++j) {
    gq[j] = 2.0 * simpson([&](double u) { return 2 * u * h(u * u) * std::cos(j * u * u); }, 0.0,
                          std::sqrt(kPi), 400000);
  }
  const double oracle = data.x_tilde.dot(build_toeplitz<double>(gq, 0.0, 64) * data.x_tilde);
  const double fine = quadform_approx_toeplitz(th, data, Eigen::Index{1} << 16);
  CHECK(std::abs(fine - oracle) <= 1e-6 * oracle);
  MESSAGE("default grid relative error vs quadrature: " << std::abs(q - oracle) / oracle);
}

TEST_CASE("Whittle and Toeplitz forms agree on fractional noise") {
  const DatasetContext data = prepare_dataset(fractional_noise(0.2, 512, 34));
  for (const ThetaParams& th : {ThetaParams::from_d(0.2), ThetaParams::from_d(0.1),
                                ThetaParams::from_d(0.3, Eigen::VectorXd::Constant(1, 0.2))}) {
    const double w = quadform_whittle(th, data);
    const double t = quadform_approx_toeplitz(th, data);
    CHECK(std::abs(w - t) <= 0.01 * t);
    const PriorConfig cfg;
    CHECK(std::abs(approx_log_lik(th, data, cfg, ApproxMode::whittle) -
                   approx_log_lik(th, data, cfg, ApproxMode::toeplitz)) <= 0.5);
  }
}

TEST_CASE("quadratic forms are invariant under time reversal") {
  const Eigen::VectorXd x = fractional_noise(0.3, 256, 35);
  const DatasetContext a = prepare_dataset(x);
  const DatasetContext b = prepare_dataset(Eigen::VectorXd(x.reverse()));
  const ThetaParams th = ThetaParams::from_d(0.3, Eigen::Vector2d(0.4, -0.2));
  CHECK(quadform_approx_toeplitz(th, a) == doctest::Approx(quadform_approx_toeplitz(th, b)).epsilon(1e-12));
  CHECK(quadform_whittle(th, a) == doctest::Approx(quadform_whittle(th, b)).epsilon(1e-9));
}

TEST_CASE("log_det_approx examples") {
  CHECK(std::abs(log_det_approx(kWhite, 100)) <= 1e-12);
  const ThetaParams k1(Eigen::Vector2d(-30.0, 0.8));
  CHECK(log_det_approx(k1, 100) == doctest::Approx(0.16).epsilon(1e-12));
  const ThetaParams th = ThetaParams::from_d(0.3);
  const double expected = 0.09 * std::log(256.0) + 2 * log_barnes_g(0.7) - log_barnes_g(0.4);
  CHECK(log_det_approx(th, 256) == doctest::Approx(expected).epsilon(1e-14));
  CHECK_THROWS_AS(log_det_approx(th, 1), ConfigError);
}

TEST_CASE("log_det_approx tracks the exact Toeplitz log-determinant") {
  for (double d : {0.1, 0.3}) {
    const ThetaParams th = ThetaParams::from_d(d);
    const auto acf = model_acf(fexp_normalized(th), 256);
    const double exact = cholesky(build_toeplitz<double>(acf, 0.0, 256)).log_det;
    CHECK(std::abs(log_det_approx(th, 256) - exact) / 256.0 <= 0.02);
  }
}

TEST_CASE("log_det_approx is quadratic in xi_j with coefficient j/4") {
  const ThetaParams base = ThetaParams::from_d(0.2, Eigen::Vector3d(0.3, -0.4, 0.1));
  const double step = 0.01;
  for (int j = 1; j <= 3; ++j) {
    ThetaParams up = base, dn = base;
    up.coords[j] += step;
    dn.coords[j] -= step;
    const double second = (log_det_approx(up, 500) - 2 * log_det_approx(base, 500) +
                           log_det_approx(dn, 500)) / (step * step);
    CHECK(second / 2.0 == doctest::Approx(j / 4.0).epsilon(1e-6));
  }
}

TEST_CASE("approx_log_lik: closed form on zero data, monotone in Q, -inf on bad theta") {
  const PriorConfig cfg;
  const DatasetContext zero = prepare_dataset(Eigen::VectorXd::Constant(40, 1.5));
  const ThetaParams th = ThetaParams::from_d(0.25, Eigen::VectorXd::Constant(1, 0.2));
  CHECK(approx_log_lik(th, zero, cfg) ==
        -0.5 * log_det_approx(th, 40) - (cfg.a + 20.0) * std::log(cfg.b));

  Rng rng = make_stream(36, 0);
  const Eigen::VectorXd x = normal_vector(40, rng);
  const double l1 = approx_log_lik(th, prepare_dataset(x), cfg);
  const double l2 = approx_log_lik(th, prepare_dataset(Eigen::VectorXd(2.0 * x)), cfg);
  CHECK(l2 < l1);

  const ThetaParams bad(Eigen::Vector2d(NAN, 0.0));
  CHECK(approx_log_lik(bad, zero, cfg) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("approx_log_lik ranks the true d above a wrong one") {
  const PriorConfig cfg;
  const DatasetContext data = prepare_dataset(fractional_noise(0.3, 2048, 37));
  CHECK(approx_log_lik(ThetaParams::from_d(0.3), data, cfg) >
        approx_log_lik(ThetaParams::from_d(0.05), data, cfg));
}

TEST_CASE("approximation error per observation shrinks with n") {
  const PriorConfig cfg;
  const Eigen::VectorXd full = fractional_noise(0.3, 2048, 38);
  for (const ThetaParams& th : {ThetaParams::from_d(0.3), ThetaParams::from_d(0.28),
                                ThetaParams::from_d(0.32, Eigen::VectorXd::Constant(1, 0.05))}) {
    double prev = INFINITY;
    for (Eigen::Index n : {128, 512, 2048}) {
      const DatasetContext data = prepare_dataset(full.head(n));
      const double gap = std::abs(approx_log_lik(th, data, cfg) - exact_log_marglik(th, data, cfg)) /
                         static_cast<double>(n);
      CHECK(gap < prev);
      prev = gap;
    }
  }
}
