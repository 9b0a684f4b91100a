#pragma once

#include <optional>
#include <string>
#include <vector>

#include "simtomo/decoder_exact.hpp"
#include "simtomo/povm.hpp"
#include "simtomo/sim.hpp"
#include "simtomo/types.hpp"

namespace simtomo {

// Resolved gauge parameter: the estimate of s_R for the decoded result.
struct GaugeSolution {
  double alpha = 0;
  std::string method;
  double residual = 0;                    // method-specific fit residual
  double rejected_branch_margin = 0;      // purity: min eigenvalue of the losing sign
  std::optional<double> factor_residual;  // block independence: Kronecker misfit
};

// Reconstructed pair from a result plus a gauge:
//   rho = I/2^n + alpha * sum_P ratio_P P^,  A = (A' - (1 - alpha) w 1^T) / alpha.
struct ReconstructedPair {
  MatrixXcd state;
  MatrixXd noise;
  ValidityReport validity;
};

ReconstructedPair apply_gauge_solution(const TomographyResult& result, double alpha,
                                       const Povm& povm, double tol = 1e-8);

// Purity prior: Tr(rho^2) = nu plus a witness of min-entropy below n-1. The
// magnitude comes from alpha^2 = (nu - 2^-n) / sum ratio^2 and the sign from
// PSD rejection of one branch. Requires n >= 2.
GaugeSolution fix_purity(const TomographyResult& result, double nu, const Povm& povm);

struct ProbeOptions {
  // Residual above which the probe data is declared inconsistent with the
  // decoded noise candidate. Exact pipelines keep the strict default; noisy
  // measured vectors need a caller-supplied allowance.
  double residual_tol_per_outcome = 1e-6;
};

// Known probe state measured under the same noise; alpha solves the linear
// relation between the probe's noisy distribution and the candidate matrix.
GaugeSolution fix_probe(const TomographyResult& result, const DensityMatrix& probe,
                        const VectorXd& measured, const Povm& povm,
                        const ProbeOptions& options = {});

// Block-independent prior A = A1 (x) A2 for a POVM factoring as D1 x D2.
GaugeSolution fix_block_independent(const TomographyResult& result, long d1, long d2,
                                    const Povm& povm);

// Linear prior information. State priors are functionals of the coefficient
// vector (sum_P s_P b_P = d, first one with d != 0 fixes the gauge); noise
// priors are known actions A b = d.
struct LinearPriors {
  std::vector<VectorXd> state_vectors;  // each of length 4^n - 1, basis order
  std::vector<double> state_values;
  std::vector<VectorXd> noise_vectors;  // each of length D
  std::vector<VectorXd> noise_values;   // each of length D
};

struct LinearPriorDecode {
  StateCoefficients coefficients;
  MatrixXd noise;
};

// Full gauge-free decode from exact distributions plus linear priors
// (computational basis). Implements the offset/solve/recover pipeline of the
// prior-information algorithm.
LinearPriorDecode decode_linear_prior(const DistributionOracle& oracle, const LinearPriors& priors,
                                      const Povm& povm);

// Binary symmetric readout noise: per-qubit flips p_i != 1/2.
struct BscDecode {
  std::vector<PauliString> z_basis;  // nonidentity Z-strings
  VectorXd coefficients;             // s_P for each entry of z_basis
  VectorXd flip_probabilities;       // per qubit; meaningful where flip_known
  std::vector<bool> flip_known;
};

BscDecode decode_bsc(const DistributionOracle& oracle, int n);

}  // namespace simtomo
