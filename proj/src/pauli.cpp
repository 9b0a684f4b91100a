#include "simtomo/pauli.hpp"

#include <algorithm>
#include <bit>

#include <unsupported/Eigen/KroneckerProduct>

namespace simtomo {

PauliString::PauliString(int n, std::uint64_t x_bits, std::uint64_t z_bits)
    : n_(n), x_(x_bits), z_(z_bits) {
  require(n >= 1 && n <= 63, Errc::dimension, "qubit count out of range");
  const std::uint64_t mask = (n == 63) ? ~0ULL : ((1ULL << n) - 1);
  require((x_bits & ~mask) == 0 && (z_bits & ~mask) == 0, Errc::dimension,
          "bit vectors longer than qubit count");
}

PauliString PauliString::from_label(const std::string& label) {
  require(!label.empty(), Errc::parse, "empty Pauli label");
  std::uint64_t x = 0, z = 0;
  for (std::size_t i = 0; i < label.size(); ++i) {
    switch (label[i]) {
      case 'I':
        break;
      case 'X':
        x |= 1ULL << i;
        break;
      case 'Y':
        x |= 1ULL << i;
        z |= 1ULL << i;
        break;
      case 'Z':
        z |= 1ULL << i;
        break;
      default:
        fail(Errc::parse, "invalid Pauli character '" + std::string(1, label[i]) +
                              "' at position " + std::to_string(i));
    }
  }
  return PauliString(static_cast<int>(label.size()), x, z);
}

PauliString PauliString::single(int n, int qubit, char op) {
  std::string label(n, 'I');
  label[qubit] = op;
  return from_label(label);
}

int PauliString::weight() const { return std::popcount(x_ | z_); }

std::string PauliString::label() const {
  std::string out(n_, 'I');
  for (int i = 0; i < n_; ++i) {
    const bool x = x_bit(i), z = z_bit(i);
    out[i] = x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
  }
  return out;
}

bool PauliString::operator<(const PauliString& o) const {
  if (n_ != o.n_) return n_ < o.n_;
  return label() < o.label();
}

bool commutes(const PauliString& p, const PauliString& q) {
  require(p.n() == q.n(), Errc::dimension, "commutes: mismatched qubit counts");
  const int form = std::popcount(p.x_bits() & q.z_bits()) + std::popcount(p.z_bits() & q.x_bits());
  return (form & 1) == 0;
}

namespace {

Eigen::Matrix2cd single_pauli_matrix(bool x, bool z) {
  Eigen::Matrix2cd m;
  const Complex i(0, 1);
  if (!x && !z)
    m << 1, 0, 0, 1;
  else if (x && !z)
    m << 0, 1, 1, 0;
  else if (!x && z)
    m << 1, 0, 0, -1;
  else
    m << 0, -i, i, 0;
  return m;
}

}  // namespace

MatrixXcd pauli_dense(const PauliString& p, bool normalized) {
  require(p.n() <= kDenseQubitLimit, Errc::capacity, "pauli_dense: beyond dense qubit limit");
  MatrixXcd out = single_pauli_matrix(p.x_bit(0), p.z_bit(0));
  for (int i = 1; i < p.n(); ++i) {
    out = Eigen::kroneckerProduct(out, single_pauli_matrix(p.x_bit(i), p.z_bit(i))).eval();
  }
  if (normalized) out /= std::pow(2.0, p.n() / 2.0);
  return out;
}

std::vector<PauliString> enumerate_basis(int n, BasisFamily family) {
  require(n >= 1, Errc::dimension, "enumerate_basis: n must be >= 1");
  std::vector<PauliString> out;
  if (family == BasisFamily::traceless_pauli) {
    // Base-4 counter with qubit 0 as the most significant digit, I<X<Y<Z.
    static const char letters[4] = {'I', 'X', 'Y', 'Z'};
    const long total = 1L << (2 * n);
    out.reserve(total - 1);
    for (long code = 1; code < total; ++code) {
      std::string label(n, 'I');
      long c = code;
      for (int q = n - 1; q >= 0; --q) {
        label[q] = letters[c & 3];
        c >>= 2;
      }
      out.push_back(PauliString::from_label(label));
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  const char letter = family == BasisFamily::x_strings ? 'X' : 'Z';
  const long total = 1L << n;
  out.reserve(total);
  for (long code = 0; code < total; ++code) {
    std::string label(n, 'I');
    for (int q = 0; q < n; ++q) {
      if ((code >> (n - 1 - q)) & 1) label[q] = letter;
    }
    out.push_back(PauliString::from_label(label));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Circuit

std::string Gate::name() const {
  switch (kind) {
    case Kind::H:
      return "H" + std::to_string(q0);
    case Kind::S:
      return "S" + std::to_string(q0);
    case Kind::X:
      return "X" + std::to_string(q0);
    case Kind::Z:
      return "Z" + std::to_string(q0);
    case Kind::CNOT:
      return "CNOT" + std::to_string(q0) + "," + std::to_string(q1);
    case Kind::SWAP:
      return "SWAP" + std::to_string(q0) + "," + std::to_string(q1);
  }
  return "?";
}

Circuit& Circuit::then(const Circuit& other) {
  require(n_ == other.n_, Errc::dimension, "circuit composition: mismatched qubit counts");
  gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
  return *this;
}

Circuit Circuit::inverse() const {
  Circuit inv(n_);
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) {
    if (it->kind == Gate::Kind::S) {
      // S^-1 = S S S within the {H,S,X,Z,CNOT,SWAP} alphabet.
      inv.s(it->q0).s(it->q0).s(it->q0);
    } else {
      inv.gates_.push_back(*it);
    }
  }
  return inv;
}

namespace {

MatrixXcd gate_unitary(const Gate& g, int n) {
  const long d = dim_of(n);
  MatrixXcd u = MatrixXcd::Zero(d, d);
  const Complex i(0, 1);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (long col = 0; col < d; ++col) {
    const int b0 = basis_bit(col, g.q0, n);
    switch (g.kind) {
      case Gate::Kind::H: {
        const long flipped = col ^ (1L << (n - 1 - g.q0));
        u(col, col) += (b0 == 0 ? inv_sqrt2 : -inv_sqrt2);
        u(flipped, col) += inv_sqrt2;
        break;
      }
      case Gate::Kind::S:
        u(col, col) = (b0 == 0) ? Complex(1, 0) : i;
        break;
      case Gate::Kind::X:
        u(col ^ (1L << (n - 1 - g.q0)), col) = 1;
        break;
      case Gate::Kind::Z:
        u(col, col) = (b0 == 0) ? 1 : -1;
        break;
      case Gate::Kind::CNOT: {
        const long row = b0 ? (col ^ (1L << (n - 1 - g.q1))) : col;
        u(row, col) = 1;
        break;
      }
      case Gate::Kind::SWAP: {
        const int b1 = basis_bit(col, g.q1, n);
        long row = col;
        if (b0 != b1) row = col ^ (1L << (n - 1 - g.q0)) ^ (1L << (n - 1 - g.q1));
        u(row, col) = 1;
        break;
      }
    }
  }
  return u;
}

}  // namespace

MatrixXcd Circuit::unitary() const {
  require(n_ >= 1 && n_ <= kDenseQubitLimit, Errc::capacity,
          "circuit unitary: beyond dense qubit limit");
  const long d = dim_of(n_);
  MatrixXcd u = MatrixXcd::Identity(d, d);
  for (const Gate& g : gates_) u = (gate_unitary(g, n_) * u).eval();
  return u;
}

std::string Circuit::key() const {
  if (gates_.empty()) return "I";
  std::string out;
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    if (i) out += ';';
    out += gates_[i].name();
  }
  return out;
}

Circuit x_string_circuit(const PauliString& xs) {
  Circuit c(xs.n());
  for (int q = 0; q < xs.n(); ++q) {
    if (xs.x_bit(q)) c.x(q);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Symplectic conjugation with sign tracking

ConjugatedPauli conjugate(const PauliString& p, const Circuit& circuit) {
  require(p.n() == circuit.n(), Errc::dimension, "conjugate: mismatched qubit counts");
  std::uint64_t x = p.x_bits(), z = p.z_bits();
  int sign = 1;
  auto bit = [](std::uint64_t v, int q) -> std::uint64_t { return (v >> q) & 1; };
  for (const Gate& g : circuit.gates()) {
    const int a = g.q0, b = g.q1;
    switch (g.kind) {
      case Gate::Kind::H: {
        if (bit(x, a) && bit(z, a)) sign = -sign;
        const std::uint64_t xa = bit(x, a), za = bit(z, a);
        x ^= (xa ^ za) << a;
        z ^= (xa ^ za) << a;
        break;
      }
      case Gate::Kind::S:
        if (bit(x, a) && bit(z, a)) sign = -sign;
        z ^= bit(x, a) << a;
        break;
      case Gate::Kind::X:
        if (bit(z, a)) sign = -sign;
        break;
      case Gate::Kind::Z:
        if (bit(x, a)) sign = -sign;
        break;
      case Gate::Kind::CNOT: {
        if (bit(x, a) && bit(z, b) && !(bit(x, b) ^ bit(z, a))) sign = -sign;
        x ^= bit(x, a) << b;
        z ^= bit(z, b) << a;
        break;
      }
      case Gate::Kind::SWAP: {
        const std::uint64_t xa = bit(x, a), xb = bit(x, b);
        const std::uint64_t za = bit(z, a), zb = bit(z, b);
        x ^= (xa ^ xb) << a;
        x ^= (xa ^ xb) << b;
        z ^= (za ^ zb) << a;
        z ^= (za ^ zb) << b;
        break;
      }
    }
  }
  return {PauliString(p.n(), x, z), sign};
}

namespace {

// Circuit mapping p to a single Z on the first support qubit, all signs
// tracked by the caller. Per-qubit rotations bring every factor to Z, then a
// CNOT fan-in clears all but the anchor.
Circuit reduce_to_anchor_z(const PauliString& p, int* anchor_out) {
  Circuit c(p.n());
  std::vector<int> support;
  for (int q = 0; q < p.n(); ++q) {
    const bool x = p.x_bit(q), z = p.z_bit(q);
    if (!x && !z) continue;
    support.push_back(q);
    if (x && z) {
      c.s(q).h(q);  // Y -> Z up to sign
    } else if (x) {
      c.h(q);  // X -> Z
    }
  }
  const int anchor = support.front();
  for (std::size_t j = 1; j < support.size(); ++j) {
    // Z_anchor Z_q -> Z_anchor under conjugation by CNOT(q -> anchor).
    c.cnot(support[j], anchor);
  }
  *anchor_out = anchor;
  return c;
}

}  // namespace

Circuit synthesize_clifford_map(const PauliString& p, const PauliString& q) {
  require(p.n() == q.n(), Errc::dimension, "synthesize_clifford_map: mismatched qubit counts");
  require(!p.is_identity() && !q.is_identity(), Errc::domain,
          "synthesize_clifford_map: identity cannot map to a traceless Pauli");
  if (p == q) return Circuit(p.n());

  int anchor_p = 0, anchor_q = 0;
  Circuit forward = reduce_to_anchor_z(p, &anchor_p);
  Circuit backward = reduce_to_anchor_z(q, &anchor_q).inverse();

  Circuit u = forward;
  if (anchor_p != anchor_q) u.swap(anchor_p, anchor_q);
  u.then(backward);

  ConjugatedPauli image = conjugate(p, u);
  require(image.pauli == q, Errc::domain, "synthesize_clifford_map: internal map mismatch");
  if (image.sign < 0) {
    // Append a Pauli that anticommutes with q to absorb the minus sign.
    for (int qi = 0; qi < q.n(); ++qi) {
      if (q.z_bit(qi)) {
        u.x(qi);
        break;
      }
      if (q.x_bit(qi)) {
        u.z(qi);
        break;
      }
    }
  }
  return u;
}

}  // namespace simtomo
