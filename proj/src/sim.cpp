#include "simtomo/sim.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace simtomo {

namespace {
constexpr double kHermTol = 1e-10;
constexpr double kTraceTol = 1e-10;
constexpr double kPsdTol = 1e-9;
}  // namespace

DensityMatrix DensityMatrix::from_matrix(int n, MatrixXcd matrix) {
  require(n >= 1 && n <= kDenseQubitLimit, Errc::capacity, "state: qubit count out of range");
  const long d = dim_of(n);
  require(matrix.rows() == d && matrix.cols() == d, Errc::dimension,
          "state: matrix dimension mismatch");
  require((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() < kHermTol, Errc::domain,
          "state: not Hermitian");
  require(std::abs(matrix.trace().real() - 1.0) < kTraceTol, Errc::domain,
          "state: trace is not 1");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(matrix, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= -kPsdTol, Errc::domain, "state: not PSD");
  return DensityMatrix(n, std::move(matrix));
}

DensityMatrix DensityMatrix::basis_state(int n, const std::string& bits) {
  require(static_cast<int>(bits.size()) == n, Errc::parse, "basis state: bitstring length");
  long index = 0;
  for (char c : bits) {
    require(c == '0' || c == '1', Errc::parse, "basis state: bitstring must be 0/1");
    index = (index << 1) | (c == '1');
  }
  const long d = dim_of(n);
  MatrixXcd m = MatrixXcd::Zero(d, d);
  m(index, index) = 1.0;
  return DensityMatrix(n, std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(int n) {
  const long d = dim_of(n);
  return DensityMatrix(n, MatrixXcd::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::pure(int n, const VectorXcd& amplitudes) {
  const long d = dim_of(n);
  require(amplitudes.size() == d, Errc::dimension, "pure state: amplitude length");
  VectorXcd psi = amplitudes / amplitudes.norm();
  return DensityMatrix(n, psi * psi.adjoint());
}

double StateCoefficients::operator[](const PauliString& p) const {
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis[i] == p) return values[static_cast<long>(i)];
  }
  fail(Errc::domain, "coefficient lookup: Pauli not in basis");
}

NoiseMatrix NoiseMatrix::from_matrix(MatrixXd a) {
  require(a.rows() == a.cols() && a.rows() >= 1, Errc::dimension, "noise: matrix must be square");
  require(a.minCoeff() >= -1e-12 && a.maxCoeff() <= 1 + 1e-12, Errc::domain,
          "noise: entries outside [0, 1]");
  for (long c = 0; c < a.cols(); ++c) {
    require(std::abs(a.col(c).sum() - 1.0) < 1e-10, Errc::domain,
            "noise: column " + std::to_string(c) + " does not sum to 1");
  }
  return NoiseMatrix(std::move(a));
}

NoiseMatrix NoiseMatrix::identity(long outcomes) {
  return NoiseMatrix(MatrixXd::Identity(outcomes, outcomes));
}

NoiseMatrix NoiseMatrix::tensor_flip(const std::vector<double>& flip_probabilities) {
  require(!flip_probabilities.empty(), Errc::config, "tensor_flip: no probabilities");
  MatrixXd a = MatrixXd::Ones(1, 1);
  for (double p : flip_probabilities) {
    require(p >= 0 && p <= 1, Errc::config, "tensor_flip: probability outside [0, 1]");
    MatrixXd f(2, 2);
    f << 1 - p, p, p, 1 - p;
    MatrixXd next(a.rows() * 2, a.cols() * 2);
    for (long i = 0; i < a.rows(); ++i) {
      for (long j = 0; j < a.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = a(i, j) * f;
    }
    a = std::move(next);
  }
  return NoiseMatrix(std::move(a));
}

NoiseMatrix NoiseMatrix::erasure(const VectorXd& output_distribution) {
  const long d = output_distribution.size();
  MatrixXd a(d, d);
  for (long c = 0; c < d; ++c) a.col(c) = output_distribution;
  return from_matrix(std::move(a));
}

VectorXd ShotRecord::frequencies() const {
  VectorXd f(counts.size());
  for (long i = 0; i < counts.size(); ++i) {
    f[i] = total > 0 ? static_cast<double>(counts[i]) / static_cast<double>(total) : 0.0;
  }
  return f;
}

VectorXd ideal_distribution(const DensityMatrix& rho, const MatrixXcd& unitary, const Povm& povm) {
  require(rho.n() == povm.n(), Errc::dimension, "ideal_distribution: qubit count mismatch");
  require(unitary.rows() == dim_of(rho.n()), Errc::dimension,
          "ideal_distribution: unitary dimension mismatch");
  const MatrixXcd evolved = unitary * rho.matrix() * unitary.adjoint();
  VectorXd y(povm.outcome_count());
  for (long k = 0; k < povm.outcome_count(); ++k) {
    y[k] = (evolved * povm.element(k)).trace().real();
  }
  return y;
}

VectorXd ideal_distribution(const DensityMatrix& rho, const Circuit& circuit, const Povm& povm) {
  return ideal_distribution(rho, circuit.unitary(), povm);
}

VectorXd apply_noise(const VectorXd& distribution, const NoiseMatrix& noise) {
  require(distribution.size() == noise.outcomes(), Errc::dimension,
          "apply_noise: length mismatch");
  return noise.matrix() * distribution;
}

ShotRecord sample_shots(const VectorXd& distribution, long shots, RngStream& rng) {
  require(shots >= 0, Errc::config, "sample_shots: negative shot count");
  ShotRecord rec;
  rec.counts = VectorXl::Zero(distribution.size());
  rec.total = shots;
  rec.master_seed = rng.master_seed();
  rec.stream_id = rng.stream_id();
  for (long s = 0; s < shots; ++s) rec.counts[sample_outcome(distribution, rng)] += 1;
  return rec;
}

VectorXd gauge_offset(const MatrixXd& noise, const Povm& povm) {
  const long D = povm.outcome_count();
  VectorXd m_id(D);
  for (long k = 0; k < D; ++k) m_id[k] = povm.m_identity(k);
  return noise * m_id / std::pow(2.0, povm.n() / 2.0);
}

GaugePair gauge_transform(const DensityMatrix& rho, const NoiseMatrix& noise, double alpha,
                          const Povm& povm) {
  require(alpha != 0.0, Errc::domain, "gauge_transform: alpha must be nonzero");
  const long d = dim_of(rho.n());
  GaugePair out;
  out.state_candidate =
      rho.matrix() / alpha +
      (1.0 - 1.0 / alpha) / static_cast<double>(d) * MatrixXcd::Identity(d, d);
  const VectorXd w = gauge_offset(noise.matrix(), povm);
  out.noise_candidate = alpha * noise.matrix() + (1.0 - alpha) * w * VectorXd::Ones(noise.outcomes()).transpose();

  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(out.state_candidate, Eigen::EigenvaluesOnly);
  out.validity.state_min_eigenvalue = es.eigenvalues().minCoeff();
  out.validity.state_trace_error = std::abs(out.state_candidate.trace().real() - 1.0);
  out.validity.noise_min_entry = out.noise_candidate.minCoeff();
  out.validity.noise_max_entry = out.noise_candidate.maxCoeff();
  double col_err = 0;
  for (long c = 0; c < out.noise_candidate.cols(); ++c) {
    col_err = std::max(col_err, std::abs(out.noise_candidate.col(c).sum() - 1.0));
  }
  out.validity.noise_column_sum_error = col_err;
  return out;
}

StateCoefficients pauli_coefficients(const DensityMatrix& rho) {
  StateCoefficients out;
  out.n = rho.n();
  out.basis = enumerate_basis(rho.n(), BasisFamily::traceless_pauli);
  out.values.resize(static_cast<long>(out.basis.size()));
  for (std::size_t i = 0; i < out.basis.size(); ++i) {
    out.values[static_cast<long>(i)] =
        (rho.matrix() * pauli_dense(out.basis[i], true)).trace().real();
  }
  return out;
}

MatrixXcd matrix_from_coefficients(const StateCoefficients& coeffs) {
  const long d = dim_of(coeffs.n);
  MatrixXcd m = MatrixXcd::Identity(d, d) / static_cast<double>(d);
  for (std::size_t i = 0; i < coeffs.basis.size(); ++i) {
    m += coeffs.values[static_cast<long>(i)] * pauli_dense(coeffs.basis[i], true);
  }
  return m;
}

DensityMatrix state_from_coefficients(const StateCoefficients& coeffs) {
  return DensityMatrix::from_matrix(coeffs.n, matrix_from_coefficients(coeffs));
}

double max_pauli_coefficient(const StateCoefficients& coeffs) {
  return coeffs.values.cwiseAbs().maxCoeff();
}

double max_pauli_coefficient(const DensityMatrix& rho) {
  return max_pauli_coefficient(pauli_coefficients(rho));
}

double noise_contrast(const MatrixXd& noise) {
  double out = 0;
  for (long k = 0; k < noise.rows(); ++k) {
    const double avg = noise.row(k).mean();
    out = std::max(out, (noise.row(k).array() - avg).abs().maxCoeff());
  }
  return out;
}

double noise_contrast(const NoiseMatrix& noise) { return noise_contrast(noise.matrix()); }

MatrixXcd random_unitary(long dim, RngStream& rng) {
  MatrixXcd g(dim, dim);
  for (long i = 0; i < dim; ++i) {
    for (long j = 0; j < dim; ++j) g(i, j) = Complex(rng.next_normal(), rng.next_normal());
  }
  Eigen::HouseholderQR<MatrixXcd> qr(g);
  MatrixXcd q = qr.householderQ();
  const MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (long j = 0; j < dim; ++j) {
    const Complex rjj = r(j, j);
    q.col(j) *= rjj / std::abs(rjj);
  }
  return q;
}

DensityMatrix random_state(int n, double pure_weight, RngStream& rng) {
  require(pure_weight >= 0 && pure_weight <= 1, Errc::config, "random_state: weight range");
  const long d = dim_of(n);
  VectorXcd psi(d);
  for (long i = 0; i < d; ++i) psi[i] = Complex(rng.next_normal(), rng.next_normal());
  psi /= psi.norm();
  MatrixXcd m = pure_weight * (psi * psi.adjoint()) +
                (1 - pure_weight) / static_cast<double>(d) * MatrixXcd::Identity(d, d);
  return DensityMatrix::from_matrix(n, std::move(m));
}

NoiseMatrix random_noise(long outcomes, double strength, RngStream& rng) {
  require(strength >= 0 && strength <= 1, Errc::config, "random_noise: strength range");
  MatrixXd r(outcomes, outcomes);
  for (long c = 0; c < outcomes; ++c) {
    double sum = 0;
    for (long k = 0; k < outcomes; ++k) {
      r(k, c) = rng.next_double();
      sum += r(k, c);
    }
    r.col(c) /= sum;
  }
  MatrixXd a = (1 - strength) * MatrixXd::Identity(outcomes, outcomes) + strength * r;
  return NoiseMatrix::from_matrix(std::move(a));
}

}  // namespace simtomo
