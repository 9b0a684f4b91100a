#include "simtomo/eliminators.hpp"

#include <sstream>

#include <Eigen/QR>

namespace simtomo {

double EliminatorPlan::coefficient_sum() const {
  double s = 0;
  for (const auto& t : terms) s += t.coefficient;
  return s;
}

EliminatorSpec EliminatorSpec::identity(const Povm& povm) {
  EliminatorSpec spec;
  spec.n = povm.n();
  spec.tag = "E_I";
  spec.basis = enumerate_basis(povm.n(), BasisFamily::traceless_pauli);
  spec.targets = MatrixXd::Zero(static_cast<long>(spec.basis.size()), povm.outcome_count());
  return spec;
}

EliminatorSpec EliminatorSpec::transfer_to_outcome(const PauliString& p, long i,
                                                   const Povm& povm) {
  require(i >= 0 && i < povm.outcome_count(), Errc::dimension,
          "eliminator spec: outcome index out of range");
  EliminatorSpec spec = identity(povm);
  spec.tag = "E(" + p.label() + "," + std::to_string(i) + ")";
  // <M~_k | M~_i> is exactly the covariance entry C_ki.
  const MatrixXcd target_op = povm.traceless_element(i);
  for (std::size_t b = 0; b < spec.basis.size(); ++b) {
    if (spec.basis[b] != p) continue;
    for (long k = 0; k < povm.outcome_count(); ++k) {
      spec.targets(static_cast<long>(b), k) =
          (povm.traceless_element(k) * target_op).trace().real();
    }
  }
  return spec;
}

EliminatorSpec EliminatorSpec::transfer_to_pauli(const PauliString& p, const PauliString& q,
                                                 const Povm& povm) {
  EliminatorSpec spec = identity(povm);
  spec.tag = "E(" + p.label() + "->" + q.label() + ")";
  const MatrixXcd target_op = pauli_dense(q, true);
  for (std::size_t b = 0; b < spec.basis.size(); ++b) {
    if (spec.basis[b] != p) continue;
    for (long k = 0; k < povm.outcome_count(); ++k) {
      spec.targets(static_cast<long>(b), k) =
          (povm.traceless_element(k) * target_op).trace().real();
    }
  }
  return spec;
}

double hadamard_coefficient(long outcome, const PauliString& q) {
  require(q.x_bits() == 0, Errc::domain, "hadamard_coefficient: operator must be a Z-string");
  const int n = q.n();
  require(outcome >= 0 && outcome < dim_of(n), Errc::dimension,
          "hadamard_coefficient: outcome out of range");
  int parity = 0;
  for (int j = 0; j < n; ++j) {
    if (q.z_bit(j) && basis_bit(outcome, j, n)) parity ^= 1;
  }
  const double mag = 1.0 / std::pow(2.0, n / 2.0);
  return parity ? -mag : mag;
}

EliminatorPlan plan_identity_eliminator(int n) {
  EliminatorPlan plan;
  plan.n = n;
  plan.target = "E_I";
  const double c = 1.0 / static_cast<double>(dim_of(n));
  for (const PauliString& p : enumerate_basis(n, BasisFamily::x_strings)) {
    plan.terms.push_back({c, x_string_circuit(p)});
  }
  return plan;
}

EliminatorPlan plan_pauli_eliminator(const PauliString& p, const PauliString& q) {
  require(p.n() == q.n(), Errc::dimension, "pauli eliminator: qubit count mismatch");
  require(q.x_bits() == 0 && !q.is_identity(), Errc::domain,
          "pauli eliminator: q must be a nonidentity Z-string");
  require(!p.is_identity(), Errc::domain, "pauli eliminator: p must be traceless");
  const int n = p.n();
  Circuit u_pq = (p == q) ? Circuit(n) : synthesize_clifford_map(p, q);

  EliminatorPlan plan;
  plan.n = n;
  plan.target = "E(" + p.label() + "->" + q.label() + ")";
  const double c = 2.0 / static_cast<double>(dim_of(n));
  for (const PauliString& xs : enumerate_basis(n, BasisFamily::x_strings)) {
    if (!commutes(xs, q)) continue;
    Circuit circuit = u_pq;
    circuit.then(x_string_circuit(xs));
    plan.terms.push_back({c, std::move(circuit)});
  }
  return plan;
}

EliminatorPlan plan_outcome_eliminator(const PauliString& p, long outcome) {
  const int n = p.n();
  require(!p.is_identity(), Errc::domain, "outcome eliminator: p must be traceless");
  require(outcome >= 0 && outcome < dim_of(n), Errc::dimension,
          "outcome eliminator: index out of range");

  double h_sum = 0;
  std::vector<std::pair<PauliString, double>> z_terms;
  for (const PauliString& q : enumerate_basis(n, BasisFamily::z_strings)) {
    if (q.is_identity()) continue;
    const double h = hadamard_coefficient(outcome, q);
    h_sum += h;
    z_terms.emplace_back(q, h);
  }

  EliminatorPlan plan;
  plan.n = n;
  plan.target = "E(" + p.label() + "," + std::to_string(outcome) + ")";
  const EliminatorPlan identity_part = plan_identity_eliminator(n);
  for (const auto& t : identity_part.terms) {
    plan.terms.push_back({(1.0 - h_sum) * t.coefficient, t.circuit});
  }
  for (const auto& [q, h] : z_terms) {
    const EliminatorPlan pq = plan_pauli_eliminator(p, q);
    for (const auto& t : pq.terms) plan.terms.push_back({h * t.coefficient, t.circuit});
  }
  return plan;
}

double verify_plan(const EliminatorPlan& plan, const EliminatorSpec& spec, const Povm& povm) {
  require(plan.n == spec.n && plan.n == povm.n(), Errc::dimension,
          "verify_plan: qubit count mismatch");
  require(plan.n <= kSuperopQubitLimit, Errc::capacity, "verify_plan: beyond superoperator limit");
  const long D = povm.outcome_count();

  std::vector<MatrixXcd> unitaries;
  unitaries.reserve(plan.terms.size());
  for (const auto& t : plan.terms) unitaries.push_back(t.circuit.unitary());

  double residual = std::abs(plan.coefficient_sum() - 1.0);
  for (std::size_t b = 0; b < spec.basis.size(); ++b) {
    const MatrixXcd op = pauli_dense(spec.basis[b], true);
    MatrixXcd image = MatrixXcd::Zero(op.rows(), op.cols());
    for (std::size_t t = 0; t < plan.terms.size(); ++t) {
      image += plan.terms[t].coefficient * (unitaries[t] * op * unitaries[t].adjoint());
    }
    for (long k = 0; k < D; ++k) {
      const double got = (povm.traceless_element(k) * image).trace().real();
      residual = std::max(residual, std::abs(got - spec.targets(static_cast<long>(b), k)));
    }
  }
  return residual;
}

std::vector<Circuit> default_unitary_pool(int n, const PauliString& p) {
  require(n <= 2, Errc::capacity, "default pool: supply an explicit pool beyond n=2");
  std::vector<Circuit> pool;
  std::vector<PauliString> paulis = enumerate_basis(n, BasisFamily::traceless_pauli);

  auto pauli_circuit = [n](const PauliString& w) {
    Circuit c(n);
    for (int q = 0; q < n; ++q) {
      const bool x = w.x_bit(q), z = w.z_bit(q);
      if (x) c.x(q);
      if (z) c.z(q);
    }
    return c;
  };

  pool.push_back(Circuit(n));  // identity
  for (const PauliString& w : paulis) pool.push_back(pauli_circuit(w));
  for (const PauliString& q : paulis) {
    if (q == p) continue;
    const Circuit u_pq = synthesize_clifford_map(p, q);
    pool.push_back(u_pq);
    for (const PauliString& w : paulis) {
      Circuit c = u_pq;
      c.then(pauli_circuit(w));
      pool.push_back(std::move(c));
    }
  }
  return pool;
}

EliminatorPlan solve_eliminator_plan(const Povm& povm, const EliminatorSpec& spec,
                                     const std::vector<Circuit>& pool) {
  require(spec.n <= kSuperopQubitLimit, Errc::capacity,
          "eliminator solve: beyond superoperator limit");
  require(!pool.empty(), Errc::insufficiency, "eliminator solve: empty pool");
  const long D = povm.outcome_count();
  const long rows = static_cast<long>(spec.basis.size()) * D;
  const long L = static_cast<long>(pool.size());

  // Design matrix: column l holds <M~_k | Phi(U_l) P^> over all (P, k).
  MatrixXd design(rows, L);
  std::vector<MatrixXcd> traceless(D);
  for (long k = 0; k < D; ++k) traceless[k] = povm.traceless_element(k);
  for (long l = 0; l < L; ++l) {
    const MatrixXcd u = pool[l].unitary();
    long r = 0;
    for (const PauliString& p : spec.basis) {
      const MatrixXcd image = u * pauli_dense(p, true) * u.adjoint();
      for (long k = 0; k < D; ++k) design(r++, l) = (traceless[k] * image).trace().real();
    }
  }
  VectorXd rhs(rows);
  {
    long r = 0;
    for (std::size_t b = 0; b < spec.basis.size(); ++b) {
      for (long k = 0; k < D; ++k) rhs[r++] = spec.targets(static_cast<long>(b), k);
    }
  }

  // Affine constraint sum(c) = 1 eliminated by substitution c = c0 + B d with
  // c0 uniform and B spanning the zero-sum subspace.
  VectorXd c0 = VectorXd::Constant(L, 1.0 / static_cast<double>(L));
  VectorXd c;
  if (L == 1) {
    c = c0;
  } else {
    MatrixXd zero_sum(L, L - 1);
    zero_sum.setZero();
    for (long j = 0; j < L - 1; ++j) {
      zero_sum(j, j) = 1.0;
      zero_sum(j + 1, j) = -1.0;
    }
    const MatrixXd reduced = design * zero_sum;
    const VectorXd target = rhs - design * c0;
    const VectorXd d =
        reduced.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(target);
    c = c0 + zero_sum * d;
  }

  EliminatorPlan plan;
  plan.n = spec.n;
  plan.target = spec.tag;
  for (long l = 0; l < L; ++l) {
    if (std::abs(c[l]) < 1e-14) continue;
    plan.terms.push_back({c[l], pool[l]});
  }
  if (plan.terms.empty()) plan.terms.push_back({1.0, pool[0]});

  const double residual = verify_plan(plan, spec, povm);
  if (residual > kPlanResidualTol) {
    fail(Errc::insufficiency, "eliminator solve: pool is not tomographically complete for " +
                                  spec.tag + " (residual " + std::to_string(residual) + ")");
  }
  return plan;
}

const Circuit& CliffordMapCache::get(const PauliString& p, const PauliString& q) {
  const auto key = std::make_pair(p.label(), q.label());
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(key, p == q ? Circuit(p.n()) : synthesize_clifford_map(p, q)).first;
  }
  return it->second;
}

std::string plan_to_text(const EliminatorPlan& plan) {
  std::ostringstream out;
  out.precision(17);
  out << "# " << plan.target << "\n";
  for (const auto& t : plan.terms) out << t.coefficient << " " << t.circuit.key() << "\n";
  return out.str();
}

namespace {

Gate parse_gate(const std::string& token) {
  auto split_args = [&](std::size_t offset, Gate::Kind kind) {
    const auto comma = token.find(',', offset);
    require(comma != std::string::npos, Errc::parse, "plan parse: bad gate " + token);
    return Gate{kind, std::stoi(token.substr(offset, comma - offset)),
                std::stoi(token.substr(comma + 1))};
  };
  if (token.rfind("CNOT", 0) == 0) return split_args(4, Gate::Kind::CNOT);
  if (token.rfind("SWAP", 0) == 0) return split_args(4, Gate::Kind::SWAP);
  require(token.size() >= 2, Errc::parse, "plan parse: bad gate " + token);
  const int q = std::stoi(token.substr(1));
  switch (token[0]) {
    case 'H':
      return Gate{Gate::Kind::H, q};
    case 'S':
      return Gate{Gate::Kind::S, q};
    case 'X':
      return Gate{Gate::Kind::X, q};
    case 'Z':
      return Gate{Gate::Kind::Z, q};
    default:
      fail(Errc::parse, "plan parse: unknown gate " + token);
  }
}

}  // namespace

EliminatorPlan plan_from_text(int n, const std::string& text) {
  EliminatorPlan plan;
  plan.n = n;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      plan.target = line.size() > 2 ? line.substr(2) : "";
      continue;
    }
    std::istringstream ls(line);
    double coeff;
    std::string circuit_key;
    ls >> coeff >> circuit_key;
    Circuit c(n);
    if (circuit_key != "I") {
      std::istringstream cs(circuit_key);
      std::string token;
      std::vector<Gate> gates;
      while (std::getline(cs, token, ';')) gates.push_back(parse_gate(token));
      c = Circuit(n, std::move(gates));
    }
    plan.terms.push_back({coeff, std::move(c)});
  }
  return plan;
}

}  // namespace simtomo
