#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "simtomo/eliminators.hpp"
#include "simtomo/povm.hpp"
#include "simtomo/sim.hpp"
#include "simtomo/types.hpp"

namespace simtomo {

// Noisy outcome distribution for a given circuit. Exact decoders consume the
// full distribution; the randomized decoder samples from it.
using DistributionOracle = std::function<VectorXd(const Circuit&)>;

DistributionOracle make_exact_oracle(const DensityMatrix& rho, const NoiseMatrix& noise,
                                     const Povm& povm);

enum class ZProvenance { exact, estimated };

// z^I_k and z^{P,i}_k grouped per Pauli: signal[b](i, k) for basis[b].
struct ZValues {
  int n = 0;
  long outcomes = 0;
  std::vector<PauliString> basis;
  VectorXd identity;
  std::vector<MatrixXd> signal;
  ZProvenance provenance = ZProvenance::exact;

  const MatrixXd& of(const PauliString& p) const;
  long index_of(const PauliString& p) const;
};

// z = sum_l c_l y~(U_l), componentwise over outcomes.
VectorXd compute_z(const DistributionOracle& oracle, const EliminatorPlan& plan);

// All z values in the computational basis via the closed-form plans; the
// z^{PQ} aggregates are shared across outcome indices i.
ZValues compute_z_values(const DistributionOracle& oracle, int n);
// General-POVM path: one numerically solved plan per (P, i).
ZValues compute_z_values(const DistributionOracle& oracle, const Povm& povm,
                         const std::vector<Circuit>& pool);

struct SupportResult {
  std::vector<PauliString> support;
  long pivot_i = -1;
  long pivot_k = -1;
  long nonzero_row_count = 0;  // |K|
};

// Step 1: support set and reusable pivot from the z tables.
SupportResult find_support(const ZValues& z, double tol = kExactZeroTol);

// Step 2: noise matrix in the gauge alpha = s_R, from the stacked
// (covariance rows + identity-coefficient row) least-squares system.
MatrixXd recover_noise(const ZValues& z, const PauliString& reference, const Povm& povm,
                       double tol = kExactZeroTol);

// Step 3: ratios s_P / s_R at the stored pivot.
std::vector<double> recover_ratios(const ZValues& z, const PauliString& reference,
                                   const std::vector<PauliString>& support, long pivot_i,
                                   long pivot_k, double tol = kExactZeroTol);

struct TomographyResult {
  int n = 0;
  std::vector<PauliString> support;
  PauliString reference;
  long pivot_i = -1;
  long pivot_k = -1;
  std::vector<double> ratios;  // aligned with support; 1 at the reference
  MatrixXd noise_candidate;    // A'(s_R)
  std::optional<double> gauge_alpha;
  ZProvenance provenance = ZProvenance::exact;
  long nonzero_row_count = 0;
  long total_shots = 0;  // randomized decoding only

  double ratio_of(const PauliString& p) const;
};

struct ExactDecodeOptions {
  double zero_tol = kExactZeroTol;
  double condition_metric_tol = 1e-6;
  // Pool for non-computational POVMs; defaults to default_unitary_pool.
  std::optional<std::vector<Circuit>> pool;
};

// Full Algorithm-1 pipeline from a distribution oracle.
TomographyResult decode_exact(const DistributionOracle& oracle, const Povm& povm,
                              const ExactDecodeOptions& options = {});

// Simulator-backed entry point; checks Conditions 1-3 on the ground truth.
TomographyResult run_exact_tomography(const DensityMatrix& rho, const NoiseMatrix& noise,
                                      const Povm& povm, const ExactDecodeOptions& options = {});

}  // namespace simtomo
