#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simtomo/types.hpp"

namespace simtomo {

// n-qubit Pauli string in symplectic form. Qubit i carries I/X/Z/Y according
// to the bit pair (x_i, z_i) = (0,0)/(1,0)/(0,1)/(1,1). No global phase is
// stored. Qubit 0 is the leftmost label character and the leftmost Kronecker
// factor, so basis index bit j of outcome k is (k >> (n-1-j)) & 1.
class PauliString {
 public:
  PauliString() = default;
  PauliString(int n, std::uint64_t x_bits, std::uint64_t z_bits);

  static PauliString identity(int n) { return PauliString(n, 0, 0); }
  static PauliString from_label(const std::string& label);
  static PauliString single(int n, int qubit, char op);

  int n() const { return n_; }
  std::uint64_t x_bits() const { return x_; }
  std::uint64_t z_bits() const { return z_; }
  bool x_bit(int i) const { return (x_ >> i) & 1; }
  bool z_bit(int i) const { return (z_ >> i) & 1; }
  bool is_identity() const { return x_ == 0 && z_ == 0; }
  int weight() const;

  std::string label() const;

  bool operator==(const PauliString& o) const {
    return n_ == o.n_ && x_ == o.x_ && z_ == o.z_;
  }
  bool operator!=(const PauliString& o) const { return !(*this == o); }
  // Lexicographic in qubit order with I < X < Y < Z.
  bool operator<(const PauliString& o) const;

 private:
  int n_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
};

// True iff p and q commute (symplectic form is even).
bool commutes(const PauliString& p, const PauliString& q);

// Dense 2^n x 2^n matrix; normalized divides by 2^{n/2} so Tr(P^ P^) = 1.
MatrixXcd pauli_dense(const PauliString& p, bool normalized);

enum class BasisFamily { traceless_pauli, x_strings, z_strings };

// Deterministic lexicographic enumeration. traceless_pauli has 4^n - 1
// elements; x_strings / z_strings have 2^n each (identity included).
std::vector<PauliString> enumerate_basis(int n, BasisFamily family);

// ---------------------------------------------------------------------------
// Circuits

struct Gate {
  enum class Kind { H, S, X, Z, CNOT, SWAP };
  Kind kind;
  int q0;
  int q1 = -1;  // second operand for CNOT (target) and SWAP

  std::string name() const;
};

class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(int n) : n_(n) {}
  Circuit(int n, std::vector<Gate> gates) : n_(n), gates_(std::move(gates)) {}

  int n() const { return n_; }
  const std::vector<Gate>& gates() const { return gates_; }
  bool empty() const { return gates_.empty(); }

  Circuit& h(int q) { return push({Gate::Kind::H, q}); }
  Circuit& s(int q) { return push({Gate::Kind::S, q}); }
  Circuit& x(int q) { return push({Gate::Kind::X, q}); }
  Circuit& z(int q) { return push({Gate::Kind::Z, q}); }
  Circuit& cnot(int control, int target) { return push({Gate::Kind::CNOT, control, target}); }
  Circuit& swap(int a, int b) { return push({Gate::Kind::SWAP, a, b}); }

  // Gates of `other` are appended, i.e. applied after this circuit.
  Circuit& then(const Circuit& other);
  Circuit inverse() const;

  // Dense 2^n x 2^n unitary, computed on demand (n <= dense limit).
  MatrixXcd unitary() const;

  // Stable text key, e.g. "H0;CNOT1,0".
  std::string key() const;

 private:
  Circuit& push(Gate g) {
    gates_.push_back(g);
    return *this;
  }

  int n_ = 0;
  std::vector<Gate> gates_;
};

// Circuit applying X on every support qubit of an X-string.
Circuit x_string_circuit(const PauliString& xs);

// Conjugation result U p U^dag = sign * pauli, tracked symplectically.
struct ConjugatedPauli {
  PauliString pauli;
  int sign;  // +1 or -1
};

ConjugatedPauli conjugate(const PauliString& p, const Circuit& circuit);

// Clifford circuit U with U p U^dag = +q exactly (sign +1 enforced by a
// trailing single-qubit Pauli correction when needed). Gate count O(n).
// Identity inputs are rejected: the identity cannot map to a traceless Pauli.
Circuit synthesize_clifford_map(const PauliString& p, const PauliString& q);

// Bit of qubit `qubit` in computational-basis index k (qubit 0 = leftmost).
inline int basis_bit(long k, int qubit, int n) {
  return static_cast<int>((k >> (n - 1 - qubit)) & 1);
}

}  // namespace simtomo
