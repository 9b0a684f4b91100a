#pragma once

#include <memory>
#include <unordered_map>

#include "simtomo/decoder_exact.hpp"
#include "simtomo/eliminators.hpp"
#include "simtomo/rng.hpp"
#include "simtomo/sim.hpp"
#include "simtomo/types.hpp"

namespace simtomo {

// Source of noisy outcome distributions for the randomized estimators. The
// estimators fetch each circuit's distribution once per batch and then draw
// outcomes from it, so the per-shot cost is one RNG draw plus an inverse-CDF
// walk.
class ShotOracle {
 public:
  virtual ~ShotOracle() = default;
  virtual const VectorXd& distribution(const Circuit& circuit) = 0;

  int sample(const Circuit& circuit, RngStream& rng) {
    return sample_outcome(distribution(circuit), rng);
  }
};

// Simulator-backed oracle with per-circuit caching.
class SimShotOracle : public ShotOracle {
 public:
  SimShotOracle(DensityMatrix rho, NoiseMatrix noise, Povm povm);
  const VectorXd& distribution(const Circuit& circuit) override;

 private:
  DensityMatrix rho_;
  NoiseMatrix noise_;
  Povm povm_;
  std::unordered_map<std::string, VectorXd> cache_;
};

// Explicit shot counts realizing the bracketed complexity expressions with a
// configurable constant c:
//   support: ceil(8^n (cn + ln(1/delta)) / (beta^2 u^2))     (total, step 1)
//   noise:   ceil(2^n (cn + ln(1/delta)) / eps^2)            (one family, step 2)
//   ratio:   ceil(2^n (cn + ln(1/delta)) / (eps beta u / 4)^2) (per family, step 3)
struct ShotBudget {
  long support_total = 0;
  long noise_total = 0;
  long ratio_per_family = 0;
  double beta = 0;
  double epsilon_noise = 0;
  double epsilon_ratio = 0;
  double delta = 0;
  double contrast_lb = 0;  // lower bound on ||A||_u supplied by the caller
  double c = 1.0;
};

ShotBudget compute_shot_budget(int n, double beta, double epsilon_noise, double epsilon_ratio,
                               double delta, double contrast_lb, double c = 1.0);

// z estimates with per-entry shot counts and standard errors.
struct ZEstimates {
  int n = 0;
  long outcomes = 0;
  std::vector<PauliString> basis;
  VectorXd identity;
  VectorXd identity_se;
  long identity_shots = 0;
  std::vector<MatrixXd> signal;     // (i, k) tables
  std::vector<MatrixXd> signal_se;  // matching standard errors
  std::vector<long> family_shots;   // total shots spent on each P family

  long index_of(const PauliString& p) const;
  const MatrixXd& of(const PauliString& p) const;

  ZValues values() const;  // drops the error fields, tags as estimated
};

// One uniformly random X-string per shot; all 2^n entries share the N shots.
struct IdentityEstimate {
  VectorXd z;
  VectorXd se;
  long shots = 0;
};
IdentityEstimate estimate_z_identity(ShotOracle& oracle, int n, long shots, RngStream& rng);

// One uniformly random commuting X-string per shot, applied after U_PQ.
struct PqEstimate {
  VectorXd z;
  VectorXd se;
  long shots = 0;
};
PqEstimate estimate_z_pq(ShotOracle& oracle, const PauliString& p, const PauliString& q,
                         const Circuit& u_pq, long shots, RngStream& rng);

// Affine combination of the identity and PQ estimates through the H table.
// Fresh identity shots are drawn at the 2^n N' split.
struct FamilyEstimate {
  MatrixXd z;   // (i, k)
  MatrixXd se;
  long shots = 0;
};
FamilyEstimate estimate_z_family(ShotOracle& oracle, const PauliString& p, long pq_shots,
                                 RngStream& rng, CliffordMapCache& maps);

// Estimates for a chosen set of Paulis sharing one identity batch; the total
// budget is split as one 2^n N' identity batch plus (2^n - 1) N' shots per
// family.
ZEstimates estimate_z_subset(ShotOracle& oracle, int n, const std::vector<PauliString>& paulis,
                             long total_shots, RngStream& rng, CliffordMapCache& maps);

// Step-1 estimates for every traceless Pauli at the support budget.
ZEstimates estimate_all_z(ShotOracle& oracle, int n, long support_total, RngStream& rng,
                          CliffordMapCache& maps);

// C^ = {P : max_{k,i} |z^{P,i}_k - z^I_k| >= 1.005 beta u_lb}.
std::vector<PauliString> threshold_support(const ZEstimates& z, double beta, double contrast_lb);

// A'_{ki} <- z^{R,i}_k, no inversion.
MatrixXd noise_from_estimates(const ZEstimates& z, const PauliString& reference);

struct RatioEstimates {
  std::vector<PauliString> support;
  std::vector<double> ratios;
  std::vector<double> standard_errors;
  long argmax_i = -1;
  long argmax_k = -1;
};

RatioEstimates ratios_from_estimates(const ZEstimates& z, const PauliString& reference,
                                     const std::vector<PauliString>& support, double beta,
                                     double contrast_lb);

struct RandomizedConfig {
  double beta = 0.25;
  double epsilon_noise = 0.05;
  double epsilon_ratio = 1.0 / 3.0;
  double delta = 0.1;
  double contrast_lb = 0.1;  // caller-supplied lower bound on ||A||_u
  double c = 1.0;
  bool reuse_step1_shots = false;  // ablation: skip the step-3 re-estimation
};

// Algorithm-2 pipeline: thresholded support, transcribed noise matrix from a
// fresh batch, re-estimated ratios. Deterministic given (config, seed).
TomographyResult run_randomized_tomography(ShotOracle& oracle, int n,
                                           const RandomizedConfig& config,
                                           std::uint64_t master_seed);

}  // namespace simtomo
