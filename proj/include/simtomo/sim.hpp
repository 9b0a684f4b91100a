#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "simtomo/pauli.hpp"
#include "simtomo/povm.hpp"
#include "simtomo/rng.hpp"
#include "simtomo/types.hpp"

namespace simtomo {

// 2^n x 2^n Hermitian, unit-trace, PSD (to tolerance) state.
class DensityMatrix {
 public:
  static DensityMatrix from_matrix(int n, MatrixXcd matrix);
  static DensityMatrix basis_state(int n, const std::string& bits);
  static DensityMatrix maximally_mixed(int n);
  static DensityMatrix pure(int n, const VectorXcd& amplitudes);

  int n() const { return n_; }
  const MatrixXcd& matrix() const { return mat_; }
  double purity() const { return (mat_ * mat_).trace().real(); }

 private:
  DensityMatrix(int n, MatrixXcd m) : n_(n), mat_(std::move(m)) {}
  int n_;
  MatrixXcd mat_;
};

// Real coefficients of the traceless part in the normalized Pauli basis:
// rho = I/2^n + sum_P s_P P^, with s_P = Tr(rho P^).
struct StateCoefficients {
  int n = 0;
  std::vector<PauliString> basis;  // traceless_pauli order
  VectorXd values;                 // aligned with basis

  double operator[](const PauliString& p) const;
};

// Column-stochastic D x D matrix acting on outcome distributions, y~ = A y.
class NoiseMatrix {
 public:
  static NoiseMatrix from_matrix(MatrixXd a);
  static NoiseMatrix identity(long outcomes);
  // Tensor product of per-qubit symmetric flips [[1-p, p], [p, 1-p]].
  static NoiseMatrix tensor_flip(const std::vector<double>& flip_probabilities);
  // All columns equal: output independent of input.
  static NoiseMatrix erasure(const VectorXd& output_distribution);

  long outcomes() const { return a_.rows(); }
  const MatrixXd& matrix() const { return a_; }

 private:
  explicit NoiseMatrix(MatrixXd a) : a_(std::move(a)) {}
  MatrixXd a_;
};

struct ShotRecord {
  VectorXl counts;
  long total = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  VectorXd frequencies() const;
};

// y_k(U) = Tr(U rho U^dag M_k).
VectorXd ideal_distribution(const DensityMatrix& rho, const MatrixXcd& unitary, const Povm& povm);
VectorXd ideal_distribution(const DensityMatrix& rho, const Circuit& circuit, const Povm& povm);

// y~ = A y.
VectorXd apply_noise(const VectorXd& distribution, const NoiseMatrix& noise);

// counts ~ multinomial(shots, p), deterministic given the stream.
ShotRecord sample_shots(const VectorXd& distribution, long shots, RngStream& rng);

struct ValidityReport {
  double state_min_eigenvalue = 0;
  double state_trace_error = 0;
  double noise_min_entry = 0;
  double noise_max_entry = 0;
  double noise_column_sum_error = 0;

  bool state_valid(double tol = 1e-8) const {
    return state_min_eigenvalue >= -tol && state_trace_error < tol;
  }
  bool noise_valid(double tol = 1e-8) const {
    return noise_min_entry >= -tol && noise_max_entry <= 1 + tol && noise_column_sum_error < tol;
  }
};

// One-parameter gauge family:
//   A'(alpha)   = alpha A + (1 - alpha) w 1^T,  w_k = sum_j A_kj m_jI / 2^{n/2}
//   rho'(alpha) = rho/alpha + (1 - 1/alpha) I / 2^n
// Candidates are returned without validity enforcement; the report carries
// the PSD and stochasticity margins.
struct GaugePair {
  MatrixXcd state_candidate;
  MatrixXd noise_candidate;
  ValidityReport validity;
};

GaugePair gauge_transform(const DensityMatrix& rho, const NoiseMatrix& noise, double alpha,
                          const Povm& povm);

// Gauge offset vector w (invariant along the gauge orbit).
VectorXd gauge_offset(const MatrixXd& noise, const Povm& povm);

StateCoefficients pauli_coefficients(const DensityMatrix& rho);
DensityMatrix state_from_coefficients(const StateCoefficients& coeffs);
MatrixXcd matrix_from_coefficients(const StateCoefficients& coeffs);

// ||rho||_m = max_P |s_P| over traceless normalized Paulis.
double max_pauli_coefficient(const DensityMatrix& rho);
double max_pauli_coefficient(const StateCoefficients& coeffs);
// ||A||_u = max_{k,k'} |A_kk' - row average|; zero exactly for erasure noise.
double noise_contrast(const NoiseMatrix& noise);
double noise_contrast(const MatrixXd& noise);

// Test/CLI instance generators (deterministic given the stream).
// Mixture of a Haar-random pure state with I/2^n at the given weight.
DensityMatrix random_state(int n, double pure_weight, RngStream& rng);
// Convex combination of the identity and a random column-stochastic matrix.
NoiseMatrix random_noise(long outcomes, double strength, RngStream& rng);
MatrixXcd random_unitary(long dim, RngStream& rng);

}  // namespace simtomo
