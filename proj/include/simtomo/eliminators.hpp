#pragma once

#include <map>
#include <string>
#include <vector>

#include "simtomo/pauli.hpp"
#include "simtomo/povm.hpp"
#include "simtomo/types.hpp"

namespace simtomo {

// Affine combination of unitary circuits realizing a canonical superoperator.
// The coefficients always sum to 1 (trace preservation).
struct EliminatorTerm {
  double coefficient;
  Circuit circuit;
};

struct EliminatorPlan {
  int n = 0;
  std::string target;  // "E_I", "E(P,i)", "E(P->Q)", or a custom tag
  std::vector<EliminatorTerm> terms;

  double coefficient_sum() const;
};

// Required action of a plan on the observable subspace: for every basis
// operator P and outcome k, the inner product <M~_k | E P^> must match
// targets(row of P, k). Components orthogonal to span{M~_k} are
// unconstrained and never scored.
struct EliminatorSpec {
  int n = 0;
  std::string tag;
  std::vector<PauliString> basis;  // traceless normalized Paulis (B_R)
  MatrixXd targets;                // |basis| x D

  // E_I: annihilates every basis operator on the observable subspace.
  static EliminatorSpec identity(const Povm& povm);
  // E(P, i): sends P to the traceless POVM element M~_i, annihilates the rest.
  static EliminatorSpec transfer_to_outcome(const PauliString& p, long i, const Povm& povm);
  // E(P->Q): sends P to the normalized Pauli Q^, annihilates the rest.
  static EliminatorSpec transfer_to_pauli(const PauliString& p, const PauliString& q,
                                          const Povm& povm);
};

// H_{iQ} = <i|Q|i> / 2^{n/2} for a Z-string Q (+-1/2^{n/2} signs).
double hadamard_coefficient(long outcome, const PauliString& q);

// E_I = (1/2^n) sum_{P in P_X} Phi(P): 2^n uniform terms of X-string circuits.
EliminatorPlan plan_identity_eliminator(int n);

// E_PQ = E_QQ Phi(U_PQ) with q a nonidentity Z-string: 2^{n-1} terms with
// coefficient 2/2^n over X-strings commuting with q, each following U_PQ.
EliminatorPlan plan_pauli_eliminator(const PauliString& p, const PauliString& q);

// E_{P,i} = (1 - sum_{Q != I} H_iQ) E_I + sum_{Q != I} H_iQ E_PQ.
EliminatorPlan plan_outcome_eliminator(const PauliString& p, long outcome);

// Max deviation of the plan's observable-subspace action from the spec,
// evaluated with dense superoperators (independent of plan construction).
double verify_plan(const EliminatorPlan& plan, const EliminatorSpec& spec, const Povm& povm);

// Least-squares synthesis of a plan from a unitary pool under the affine
// constraint. Throws an insufficiency error naming the residual when the pool
// cannot realize the spec to kPlanResidualTol.
EliminatorPlan solve_eliminator_plan(const Povm& povm, const EliminatorSpec& spec,
                                     const std::vector<Circuit>& pool);

// Pool used by default for small-n numeric solves: all Pauli-string circuits
// plus every product W * U_{PQ'} with W a Pauli string and Q' traceless.
std::vector<Circuit> default_unitary_pool(int n, const PauliString& p);

// Synthesized U_PQ circuits are memoized per (p, q) label pair.
class CliffordMapCache {
 public:
  const Circuit& get(const PauliString& p, const PauliString& q);

 private:
  std::map<std::pair<std::string, std::string>, Circuit> cache_;
};

// Plan export/import: text lines "coefficient gate;gate;...".
std::string plan_to_text(const EliminatorPlan& plan);
EliminatorPlan plan_from_text(int n, const std::string& text);

}  // namespace simtomo
