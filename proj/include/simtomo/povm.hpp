#pragma once

#include <vector>

#include "simtomo/pauli.hpp"
#include "simtomo/types.hpp"

namespace simtomo {

enum class PovmKind { computational, general };

// D measurement operators M_k: Hermitian, PSD, summing to the identity.
class Povm {
 public:
  static Povm computational(int n);
  static Povm from_elements(int n, std::vector<MatrixXcd> elements);

  int n() const { return n_; }
  long outcome_count() const { return static_cast<long>(elements_.size()); }
  const std::vector<MatrixXcd>& elements() const { return elements_; }
  const MatrixXcd& element(long k) const { return elements_[k]; }
  PovmKind kind() const { return kind_; }

  // Traceless part M_k - Tr(M_k) I / D.
  MatrixXcd traceless_element(long k) const;
  // m_{kI} = Tr(M_k) / 2^{n/2}.
  double m_identity(long k) const;

 private:
  Povm(int n, std::vector<MatrixXcd> elements, PovmKind kind)
      : n_(n), elements_(std::move(elements)), kind_(kind) {}

  int n_;
  std::vector<MatrixXcd> elements_;
  PovmKind kind_;
};

// C_ij = Tr(M_i M_j) - Tr(M_i) Tr(M_j) / D. Rows sum to zero; rank D-1 with
// null space span{1} when the POVM is linearly independent.
MatrixXd covariance(const Povm& povm);

// D x (|basis|+1) matrix: first column m_{kI}, remaining columns
// m_{kQ} = Tr(M_k Q^) over the given traceless normalized basis.
MatrixXd coefficient_matrix(const Povm& povm, const std::vector<PauliString>& basis);

// Numerical rank of the D x 4^n matrix of vectorized elements.
long independence_rank(const Povm& povm);

struct ReducedPovm {
  Povm povm;
  MatrixXd recombination;  // r x D, nonnegative, columns sum to 1
};

// Builds an r-outcome linearly independent POVM from a rank-deficient one by
// recombining elements with positive weights. Errors when already independent.
ReducedPovm reduce_povm(const Povm& povm);

}  // namespace simtomo
