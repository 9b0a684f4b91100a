#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simtomo/decoder_rand.hpp"
#include "simtomo/sim.hpp"

namespace simtomo {

// Logistic fit of success counts against log shot count; the threshold shot
// count N* solves fitted_probability(N*) = target.
struct LogisticFit {
  double intercept = 0;
  double slope = 0;
  bool converged = false;
  bool used_interpolation = false;
  double n_star = std::numeric_limits<double>::quiet_NaN();
};

LogisticFit fit_threshold_shots(const std::vector<long>& shot_grid,
                                const std::vector<int>& successes, int trials,
                                double target = 0.9);

// Two-qubit one-parameter families used in the scaling experiments:
// flip noise ((1-tau) I + tau X)^(x)2 and the state I/4 + tau (YI + ZZ).
NoiseMatrix scaling_noise_family(double tau);
DensityMatrix scaling_state_family(double tau);

enum class SweepProtocol { noise_contrast, beta };
enum class SweepStep { support = 1, ratio = 3 };

struct SweepPoint {
  double tau = 0;
  double beta = 0;
  double noise_contrast = 0;
  double swept_value = 0;  // ||A(tau)||_u or beta(tau), per protocol
  std::vector<long> shot_grid;
  std::vector<int> successes;
  int trials = 0;
  LogisticFit fit;
};

struct SweepOutcome {
  SweepProtocol protocol;
  SweepStep step;
  std::vector<SweepPoint> points;
  double loglog_slope = std::numeric_limits<double>::quiet_NaN();
  double loglog_intercept = 0;
};

struct SweepSettings {
  SweepProtocol protocol = SweepProtocol::noise_contrast;
  SweepStep step = SweepStep::support;
  std::vector<double> taus;      // defaults chosen per protocol when empty
  std::vector<long> shot_grid;   // auto grid around the predicted N* when empty
  int trials = 50;
  double beta_fixed = 0.25;      // beta for the noise_contrast protocol
  double epsilon_ratio = 1.0 / 3.0;
  std::uint64_t master_seed = 1;
  int threads = 1;
};

// One success-probability trial of the step-1 (support) experiment.
bool support_trial(const DensityMatrix& rho, const NoiseMatrix& noise, double beta,
                   double contrast, long shots, std::uint64_t master_seed,
                   std::uint64_t stream_id);

// One trial of the step-3 (ratio) experiment: support and reference known,
// success when every ratio lands within the multiplicative tolerance.
bool ratio_trial(const DensityMatrix& rho, const NoiseMatrix& noise, double beta,
                 double contrast, double epsilon, long shots, std::uint64_t master_seed,
                 std::uint64_t stream_id);

SweepOutcome run_scaling_sweep(const SweepSettings& settings);

struct CalibrationResult {
  double c = 0;
  double success_rate = 0;
  bool reached_target = false;
  std::vector<std::pair<double, double>> trace;  // (c, success rate) pairs
};

// Smallest constant c on a doubling grid for which the full randomized
// pipeline meets the stated errors in at least `target` of the trials.
CalibrationResult calibrate_constant(const DensityMatrix& rho, const NoiseMatrix& noise,
                                     const RandomizedConfig& base_config, int trials,
                                     double target, std::uint64_t master_seed, int threads,
                                     double c_cap = 16.0);

}  // namespace simtomo
