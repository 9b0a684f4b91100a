#include "simtomo/povm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace simtomo {

namespace {

constexpr double kPovmTol = 1e-10;
constexpr double kRankRelTol = 1e-9;

void validate_elements(int n, const std::vector<MatrixXcd>& elements) {
  require(n >= 1 && n <= kDenseQubitLimit, Errc::capacity, "POVM: qubit count out of range");
  require(!elements.empty(), Errc::dimension, "POVM: no elements");
  const long d = dim_of(n);
  MatrixXcd sum = MatrixXcd::Zero(d, d);
  for (const MatrixXcd& m : elements) {
    require(m.rows() == d && m.cols() == d, Errc::dimension, "POVM: element dimension mismatch");
    require((m - m.adjoint()).cwiseAbs().maxCoeff() < kPovmTol, Errc::domain,
            "POVM: element not Hermitian");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -kPovmTol, Errc::domain, "POVM: element not PSD");
    sum += m;
  }
  require((sum - MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() < kPovmTol, Errc::domain,
          "POVM: elements do not sum to identity");
}

}  // namespace

Povm Povm::computational(int n) {
  require(n >= 1 && n <= kDenseQubitLimit, Errc::capacity, "POVM: qubit count out of range");
  const long d = dim_of(n);
  std::vector<MatrixXcd> elements;
  elements.reserve(d);
  for (long k = 0; k < d; ++k) {
    MatrixXcd m = MatrixXcd::Zero(d, d);
    m(k, k) = 1.0;
    elements.push_back(std::move(m));
  }
  return Povm(n, std::move(elements), PovmKind::computational);
}

Povm Povm::from_elements(int n, std::vector<MatrixXcd> elements) {
  validate_elements(n, elements);
  return Povm(n, std::move(elements), PovmKind::general);
}

MatrixXcd Povm::traceless_element(long k) const {
  const long d = dim_of(n_);
  const double avg = elements_[k].trace().real() / static_cast<double>(d);
  return elements_[k] - avg * MatrixXcd::Identity(d, d);
}

double Povm::m_identity(long k) const {
  return elements_[k].trace().real() / std::pow(2.0, n_ / 2.0);
}

// Gram matrix of the traceless POVM parts. For the computational POVM this is
// Tr(M_i M_j) - Tr(M_i) Tr(M_j)/D; for general outcome counts the divisor is
// the trace dimension 2^n, which is what keeps the rows summing to zero.
MatrixXd covariance(const Povm& povm) {
  const long D = povm.outcome_count();
  const double d = static_cast<double>(dim_of(povm.n()));
  MatrixXd c(D, D);
  VectorXd traces(D);
  for (long k = 0; k < D; ++k) traces[k] = povm.element(k).trace().real();
  for (long i = 0; i < D; ++i) {
    for (long j = i; j < D; ++j) {
      const double tij = (povm.element(i) * povm.element(j)).trace().real();
      c(i, j) = c(j, i) = tij - traces[i] * traces[j] / d;
    }
  }
  return c;
}

MatrixXd coefficient_matrix(const Povm& povm, const std::vector<PauliString>& basis) {
  const long D = povm.outcome_count();
  MatrixXd m(D, static_cast<long>(basis.size()) + 1);
  for (long k = 0; k < D; ++k) m(k, 0) = povm.m_identity(k);
  for (std::size_t b = 0; b < basis.size(); ++b) {
    const MatrixXcd q = pauli_dense(basis[b], true);
    for (long k = 0; k < D; ++k) {
      m(k, static_cast<long>(b) + 1) = (povm.element(k) * q).trace().real();
    }
  }
  return m;
}

namespace {

// Rows are the real-vectorized POVM elements.
MatrixXd vectorized_elements(const Povm& povm) {
  const long D = povm.outcome_count();
  const long d = dim_of(povm.n());
  // Real and imaginary parts stacked; rank is unaffected because the
  // elements are Hermitian.
  MatrixXd v(D, 2 * d * d);
  for (long k = 0; k < D; ++k) {
    long col = 0;
    for (long i = 0; i < d; ++i) {
      for (long j = 0; j < d; ++j) {
        v(k, col++) = povm.element(k)(i, j).real();
        v(k, col++) = povm.element(k)(i, j).imag();
      }
    }
  }
  return v;
}

}  // namespace

long independence_rank(const Povm& povm) {
  const MatrixXd v = vectorized_elements(povm);
  Eigen::JacobiSVD<MatrixXd> svd(v);
  const VectorXd sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cutoff = kRankRelTol * sv[0];
  long rank = 0;
  for (long i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) ++rank;
  }
  return rank;
}

ReducedPovm reduce_povm(const Povm& povm) {
  const long D = povm.outcome_count();
  const MatrixXd v = vectorized_elements(povm);
  Eigen::JacobiSVD<MatrixXd> svd(v, Eigen::ComputeFullU);
  const VectorXd sv = svd.singularValues();
  const double cutoff = kRankRelTol * sv[0];
  long r = 0;
  for (long i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) ++r;
  }
  require(r < D, Errc::already_independent, "reduce_povm: POVM already linearly independent");

  // u_k = Tr(M_k O) with the positive witness O = I; strictly positive for
  // nonzero elements and orthogonal to every null combination.
  VectorXd u(D);
  for (long k = 0; k < D; ++k) u[k] = povm.element(k).trace().real();

  // Left singular vectors with nonzero singular value span the coefficient
  // subspace F orthogonal to all null combinations. Complete u to a basis of
  // F by projecting them off u and orthonormalizing.
  const MatrixXd f_basis = svd.matrixU().leftCols(r);
  const VectorXd u_hat = u / u.norm();
  std::vector<VectorXd> completions;
  for (long j = 0; j < r && static_cast<long>(completions.size()) < r - 1; ++j) {
    VectorXd w = f_basis.col(j);
    w -= u_hat.dot(w) * u_hat;
    for (const VectorXd& prev : completions) w -= prev.dot(w) * prev;
    if (w.norm() > 1e-8) completions.push_back(w / w.norm());
  }
  require(static_cast<long>(completions.size()) == r - 1, Errc::domain,
          "reduce_povm: failed to complete the positive basis");

  // mu_1 = u, mu_j = v_j + alpha_j u with alpha_j making every entry strictly
  // positive.
  MatrixXd mu(r, D);
  mu.row(0) = u.transpose();
  const double u_min = u.minCoeff();
  require(u_min > 0, Errc::domain, "reduce_povm: POVM has a zero element");
  for (long j = 1; j < r; ++j) {
    const VectorXd& w = completions[j - 1];
    const double alpha = w.cwiseAbs().maxCoeff() / u_min + 1.0;
    mu.row(j) = (w + alpha * u).transpose();
  }

  MatrixXd p(r, D);
  for (long i = 0; i < D; ++i) p.col(i) = mu.col(i) / mu.col(i).sum();

  const long d = dim_of(povm.n());
  std::vector<MatrixXcd> reduced(r, MatrixXcd::Zero(d, d));
  for (long j = 0; j < r; ++j) {
    for (long i = 0; i < D; ++i) reduced[j] += p(j, i) * povm.element(i);
  }
  return ReducedPovm{Povm::from_elements(povm.n(), std::move(reduced)), p};
}

}  // namespace simtomo
