#include "simtomo/decoder_exact.hpp"

#include <algorithm>

#include <Eigen/QR>

namespace simtomo {

DistributionOracle make_exact_oracle(const DensityMatrix& rho, const NoiseMatrix& noise,
                                     const Povm& povm) {
  require(noise.outcomes() == povm.outcome_count(), Errc::dimension,
          "oracle: noise dimension does not match POVM");
  return [rho, noise, povm](const Circuit& circuit) {
    return apply_noise(ideal_distribution(rho, circuit, povm), noise);
  };
}

const MatrixXd& ZValues::of(const PauliString& p) const {
  return signal[static_cast<std::size_t>(index_of(p))];
}

long ZValues::index_of(const PauliString& p) const {
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis[i] == p) return static_cast<long>(i);
  }
  fail(Errc::domain, "z values: Pauli " + p.label() + " not in basis");
}

VectorXd compute_z(const DistributionOracle& oracle, const EliminatorPlan& plan) {
  require(!plan.terms.empty(), Errc::domain, "compute_z: empty plan");
  VectorXd z = plan.terms.front().coefficient * oracle(plan.terms.front().circuit);
  for (std::size_t t = 1; t < plan.terms.size(); ++t) {
    z += plan.terms[t].coefficient * oracle(plan.terms[t].circuit);
  }
  return z;
}

ZValues compute_z_values(const DistributionOracle& oracle, int n) {
  const long D = dim_of(n);
  ZValues z;
  z.n = n;
  z.outcomes = D;
  z.basis = enumerate_basis(n, BasisFamily::traceless_pauli);
  z.identity = compute_z(oracle, plan_identity_eliminator(n));

  const std::vector<PauliString> z_strings = enumerate_basis(n, BasisFamily::z_strings);
  // H table: h(i, q) over nonidentity Z-strings q.
  std::vector<PauliString> zq;
  for (const PauliString& q : z_strings) {
    if (!q.is_identity()) zq.push_back(q);
  }
  MatrixXd h(D, static_cast<long>(zq.size()));
  for (long i = 0; i < D; ++i) {
    for (std::size_t j = 0; j < zq.size(); ++j) {
      h(i, static_cast<long>(j)) = hadamard_coefficient(i, zq[j]);
    }
  }
  const VectorXd h_row_sum = h.rowwise().sum();

  z.signal.reserve(z.basis.size());
  for (const PauliString& p : z.basis) {
    // z^{PQ} aggregates, one per nonidentity Z-string, reused for every i.
    MatrixXd zpq(static_cast<long>(zq.size()), D);
    for (std::size_t j = 0; j < zq.size(); ++j) {
      zpq.row(static_cast<long>(j)) =
          compute_z(oracle, plan_pauli_eliminator(p, zq[j])).transpose();
    }
    MatrixXd table(D, D);  // (i, k)
    for (long i = 0; i < D; ++i) {
      VectorXd row = (1.0 - h_row_sum[i]) * z.identity;
      for (std::size_t j = 0; j < zq.size(); ++j) {
        row += h(i, static_cast<long>(j)) * zpq.row(static_cast<long>(j)).transpose();
      }
      table.row(i) = row.transpose();
    }
    z.signal.push_back(std::move(table));
  }
  return z;
}

ZValues compute_z_values(const DistributionOracle& oracle, const Povm& povm,
                         const std::vector<Circuit>& pool) {
  const int n = povm.n();
  const long D = povm.outcome_count();
  ZValues z;
  z.n = n;
  z.outcomes = D;
  z.basis = enumerate_basis(n, BasisFamily::traceless_pauli);
  z.identity = compute_z(oracle, solve_eliminator_plan(povm, EliminatorSpec::identity(povm), pool));
  for (const PauliString& p : z.basis) {
    MatrixXd table(D, D);
    for (long i = 0; i < D; ++i) {
      const EliminatorPlan plan =
          solve_eliminator_plan(povm, EliminatorSpec::transfer_to_outcome(p, i, povm), pool);
      table.row(i) = compute_z(oracle, plan).transpose();
    }
    z.signal.push_back(std::move(table));
  }
  return z;
}

SupportResult find_support(const ZValues& z, double tol) {
  const long D = z.outcomes;
  std::vector<long> nonzero_rows;
  for (long k = 0; k < D; ++k) {
    if (std::abs(z.identity[k]) > tol) nonzero_rows.push_back(k);
  }
  SupportResult out;
  out.nonzero_row_count = static_cast<long>(nonzero_rows.size());

  for (std::size_t b = 0; b < z.basis.size(); ++b) {
    const MatrixXd& table = z.signal[b];
    bool in_support = false;
    if (out.pivot_i >= 0) {
      // The pivot (j, l) satisfies sum_k' A_lk' C_k'j != 0, which is
      // state-independent, so it alone decides membership for every later P.
      in_support = std::abs(table(out.pivot_i, out.pivot_k) - z.identity[out.pivot_k]) > tol;
    } else {
      for (long i = 0; i < D && !in_support; ++i) {
        for (long k : nonzero_rows) {
          if (std::abs(table(i, k) - z.identity[k]) > tol) {
            in_support = true;
            out.pivot_i = i;
            out.pivot_k = k;
            break;
          }
        }
      }
    }
    if (in_support) out.support.push_back(z.basis[b]);
  }
  if (out.support.empty()) {
    fail(Errc::degeneracy,
         "support detection: no nonzero coefficient found (maximally mixed state or erasure "
         "noise violates Condition 2 or 1)");
  }
  return out;
}

MatrixXd recover_noise(const ZValues& z, const PauliString& reference, const Povm& povm,
                       double tol) {
  const long D = z.outcomes;
  const MatrixXd& table = z.of(reference);
  const MatrixXd c = covariance(povm);
  VectorXd m_id(D);
  for (long k = 0; k < D; ++k) m_id[k] = povm.m_identity(k);
  const double scale = std::pow(2.0, povm.n() / 2.0);

  // Stacked system per row k: C^T a_k = (z^{R,.}_k - z^I_k), m_I^T a_k = 2^{n/2} z^I_k.
  MatrixXd stacked(D + 1, D);
  stacked.topRows(D) = c.transpose();
  stacked.bottomRows(1) = m_id.transpose();
  const auto solver = stacked.colPivHouseholderQr();
  require(solver.rank() == D, Errc::condition3,
          "noise recovery: covariance system singular (POVM not linearly independent)");

  MatrixXd noise = MatrixXd::Zero(D, D);
  for (long k = 0; k < D; ++k) {
    if (std::abs(z.identity[k]) <= tol) continue;  // all-zero row of A
    VectorXd rhs(D + 1);
    for (long i = 0; i < D; ++i) rhs[i] = table(i, k) - z.identity[k];
    rhs[D] = scale * z.identity[k];
    noise.row(k) = solver.solve(rhs).transpose();
  }
  return noise;
}

std::vector<double> recover_ratios(const ZValues& z, const PauliString& reference,
                                   const std::vector<PauliString>& support, long pivot_i,
                                   long pivot_k, double tol) {
  const MatrixXd& ref_table = z.of(reference);
  const double denom = ref_table(pivot_i, pivot_k) - z.identity[pivot_k];
  require(std::abs(denom) > tol, Errc::pivot,
          "ratio recovery: pivot denominator below tolerance");
  std::vector<double> ratios;
  ratios.reserve(support.size());
  for (const PauliString& p : support) {
    if (p == reference) {
      ratios.push_back(1.0);
      continue;
    }
    const MatrixXd& table = z.of(p);
    ratios.push_back((table(pivot_i, pivot_k) - z.identity[pivot_k]) / denom);
  }
  return ratios;
}

double TomographyResult::ratio_of(const PauliString& p) const {
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] == p) return ratios[i];
  }
  fail(Errc::domain, "result: Pauli " + p.label() + " not in support");
}

namespace {

// Reference choice: largest signal max_{i,k} |z^{P,i}_k - z^I_k|, ties broken
// lexicographically (basis order is lexicographic already).
PauliString choose_reference(const ZValues& z, const std::vector<PauliString>& support) {
  double best = -1;
  PauliString best_p = support.front();
  for (const PauliString& p : support) {
    const MatrixXd& table = z.of(p);
    const double signal = (table.rowwise() - z.identity.transpose()).cwiseAbs().maxCoeff();
    if (signal > best + 1e-15) {
      best = signal;
      best_p = p;
    }
  }
  return best_p;
}

}  // namespace

TomographyResult decode_exact(const DistributionOracle& oracle, const Povm& povm,
                              const ExactDecodeOptions& options) {
  ZValues z;
  if (povm.kind() == PovmKind::computational) {
    z = compute_z_values(oracle, povm.n());
  } else {
    std::vector<Circuit> pool;
    if (options.pool.has_value()) {
      pool = *options.pool;
    } else {
      // One pool covering transfers out of every Pauli: union over P would be
      // large; the generic pool anchored at the first basis element suffices
      // because it contains all Pauli products and all U_{PQ} compositions.
      const auto basis = enumerate_basis(povm.n(), BasisFamily::traceless_pauli);
      pool = default_unitary_pool(povm.n(), basis.front());
      for (std::size_t b = 1; b < basis.size(); ++b) {
        const auto extra = default_unitary_pool(povm.n(), basis[b]);
        pool.insert(pool.end(), extra.begin(), extra.end());
      }
    }
    z = compute_z_values(oracle, povm, pool);
  }

  SupportResult sup = find_support(z, options.zero_tol);
  const PauliString reference = choose_reference(z, sup.support);
  TomographyResult result;
  result.n = povm.n();
  result.support = sup.support;
  result.reference = reference;
  result.pivot_i = sup.pivot_i;
  result.pivot_k = sup.pivot_k;
  result.nonzero_row_count = sup.nonzero_row_count;
  result.noise_candidate = recover_noise(z, reference, povm, options.zero_tol);
  result.ratios =
      recover_ratios(z, reference, sup.support, sup.pivot_i, sup.pivot_k, options.zero_tol);
  result.provenance = z.provenance;
  return result;
}

TomographyResult run_exact_tomography(const DensityMatrix& rho, const NoiseMatrix& noise,
                                      const Povm& povm, const ExactDecodeOptions& options) {
  require(max_pauli_coefficient(rho) > options.condition_metric_tol, Errc::condition2,
          "Condition 2 violated: state has no traceless component");
  require(noise_contrast(noise) > options.condition_metric_tol, Errc::condition1,
          "Condition 1 violated: noise is an erasure channel");
  require(independence_rank(povm) == povm.outcome_count(), Errc::condition3,
          "Condition 3 violated: POVM elements are linearly dependent");
  return decode_exact(make_exact_oracle(rho, noise, povm), povm, options);
}

}  // namespace simtomo
