#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "simtomo/sweep.hpp"

using namespace simtomo;

TEST_CASE("logistic threshold extraction on synthetic data") {
  // Success counts generated from a known logistic curve.
  const double a = -30.0, b = 3.3;  // N* at p=0.9: exp((logit(0.9) - a)/b)
  std::vector<long> grid;
  std::vector<int> successes;
  const int trials = 200;
  RngStream rng(5, 0);
  for (double logn = 7.0; logn <= 11.0; logn += 0.5) {
    grid.push_back(static_cast<long>(std::exp(logn)));
    const double p = 1.0 / (1.0 + std::exp(-(a + b * logn)));
    int count = 0;
    for (int t = 0; t < trials; ++t) {
      if (rng.next_double() < p) ++count;
    }
    successes.push_back(count);
  }
  const LogisticFit fit = fit_threshold_shots(grid, successes, trials);
  CHECK(fit.converged);
  const double expected = std::exp((std::log(9.0) - a) / b);
  CHECK(std::abs(std::log(fit.n_star) - std::log(expected)) < 0.15);
}

TEST_CASE("degenerate success data falls back to interpolation or NaN") {
  const std::vector<long> grid = {100, 200, 400, 800};
  const LogisticFit all_fail = fit_threshold_shots(grid, {0, 0, 0, 0}, 50);
  CHECK(all_fail.used_interpolation);
  CHECK_FALSE(std::isfinite(all_fail.n_star));

  const LogisticFit all_pass = fit_threshold_shots(grid, {50, 50, 50, 50}, 50);
  CHECK_FALSE(std::isfinite(all_pass.n_star));

  const LogisticFit crossing = fit_threshold_shots(grid, {10, 30, 44, 50}, 50);
  CHECK(std::isfinite(crossing.n_star));
  CHECK(crossing.n_star > 200);
  CHECK(crossing.n_star < 800);
}

TEST_CASE("scaling families match their definitions") {
  const NoiseMatrix a = scaling_noise_family(0.1);
  CHECK(a.matrix()(0, 0) == doctest::Approx(0.81));
  CHECK(noise_contrast(a) == doctest::Approx(0.56));

  const DensityMatrix rho = scaling_state_family(0.1);
  CHECK(max_pauli_coefficient(rho) == doctest::Approx(0.2));  // 2 tau
  const StateCoefficients coeffs = pauli_coefficients(rho);
  CHECK(coeffs[PauliString::from_label("YI")] == doctest::Approx(0.2));
  CHECK(coeffs[PauliString::from_label("ZZ")] == doctest::Approx(0.2));
  CHECK(std::abs(coeffs[PauliString::from_label("XX")]) < 1e-12);

  CHECK_THROWS_AS(scaling_state_family(0.3), Error);  // not PSD
  CHECK_THROWS_AS(scaling_noise_family(0.6), Error);
}

TEST_CASE("trials are deterministic given master seed and stream") {
  const DensityMatrix rho = DensityMatrix::basis_state(2, "01");
  const NoiseMatrix noise = scaling_noise_family(0.2);
  const double u = noise_contrast(noise);
  const bool a = support_trial(rho, noise, 0.25, u, 4000, 77, 3);
  const bool b = support_trial(rho, noise, 0.25, u, 4000, 77, 3);
  CHECK(a == b);
  const bool c = ratio_trial(rho, noise, 0.25, u, 1.0 / 3.0, 4000, 77, 3);
  const bool d = ratio_trial(rho, noise, 0.25, u, 1.0 / 3.0, 4000, 77, 3);
  CHECK(c == d);
}

TEST_CASE("small support sweep produces a negative slope and full CSV data") {
  SweepSettings settings;
  settings.protocol = SweepProtocol::noise_contrast;
  settings.step = SweepStep::support;
  settings.taus = {0.2, 0.4};
  settings.trials = 20;
  settings.threads = 2;
  settings.master_seed = 21;
  const SweepOutcome outcome = run_scaling_sweep(settings);
  REQUIRE(outcome.points.size() == 2);
  for (const auto& p : outcome.points) {
    CHECK(p.shot_grid.size() == p.successes.size());
    CHECK(std::isfinite(p.fit.n_star));
  }
  CHECK(outcome.loglog_slope < -1.0);
  CHECK(outcome.loglog_slope > -3.5);
}

TEST_CASE("calibration finds a moderate constant on the worked example") {
  const CalibrationResult calib =
      calibrate_constant(DensityMatrix::basis_state(2, "01"), NoiseMatrix::tensor_flip({0.1, 0.1}),
                         RandomizedConfig{0.25, 0.05, 0.12, 0.1, 0.5, 1.0, false}, 20, 0.9, 13,
                         2);
  CHECK(calib.reached_target);
  CHECK(calib.c <= 10.0);  // the analysis promises a constant below 10
  CHECK(calib.success_rate >= 0.9);
  CHECK_FALSE(calib.trace.empty());
}

TEST_CASE("easy instances calibrate at most as high as hard ones") {
  // With the contrast bound held fixed in the budget, an instance whose true
  // contrast far exceeds the bound succeeds with a smaller multiplier than
  // one sitting well below it.
  const DensityMatrix rho = DensityMatrix::basis_state(2, "01");
  // The supplied contrast bound must hold for both instances: the hard one
  // has ||A||_u = 0.24, the easy one 0.73.
  const RandomizedConfig base{0.25, 0.05, 0.12, 0.1, 0.2, 1.0, false};
  const CalibrationResult easy = calibrate_constant(
      rho, NoiseMatrix::tensor_flip({0.01, 0.01}), base, 30, 0.9, 13, 2);
  const CalibrationResult hard = calibrate_constant(
      rho, NoiseMatrix::tensor_flip({0.3, 0.3}), base, 30, 0.9, 13, 8);
  CHECK(easy.reached_target);
  CHECK(hard.reached_target);
  CHECK(easy.c <= hard.c);
}
