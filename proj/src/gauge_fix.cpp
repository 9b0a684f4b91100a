#include "simtomo/gauge_fix.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace simtomo {

namespace {

MatrixXcd state_from_ratios(const TomographyResult& result, double alpha) {
  const long d = dim_of(result.n);
  MatrixXcd state = MatrixXcd::Identity(d, d) / static_cast<double>(d);
  for (std::size_t i = 0; i < result.support.size(); ++i) {
    state += alpha * result.ratios[i] * pauli_dense(result.support[i], true);
  }
  return state;
}

double min_eigenvalue(const MatrixXcd& hermitian) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

ReconstructedPair apply_gauge_solution(const TomographyResult& result, double alpha,
                                       const Povm& povm, double /*tol*/) {
  require(alpha != 0.0, Errc::domain, "gauge application: alpha must be nonzero");
  ReconstructedPair out;
  out.state = state_from_ratios(result, alpha);

  const VectorXd w = gauge_offset(result.noise_candidate, povm);
  const long D = povm.outcome_count();
  out.noise =
      (result.noise_candidate - (1.0 - alpha) * w * VectorXd::Ones(D).transpose()) / alpha;

  out.validity.state_min_eigenvalue = min_eigenvalue(out.state);
  out.validity.state_trace_error = std::abs(out.state.trace().real() - 1.0);
  out.validity.noise_min_entry = out.noise.minCoeff();
  out.validity.noise_max_entry = out.noise.maxCoeff();
  double col_err = 0;
  for (long c = 0; c < D; ++c) {
    col_err = std::max(col_err, std::abs(out.noise.col(c).sum() - 1.0));
  }
  out.validity.noise_column_sum_error = col_err;
  return out;
}

GaugeSolution fix_purity(const TomographyResult& result, double nu, const Povm& /*povm*/) {
  require(result.n >= 2, Errc::domain, "purity fix: needs at least two qubits");
  const double floor = 1.0 / static_cast<double>(dim_of(result.n));
  require(nu > floor + 1e-12 && nu <= 1.0 + 1e-12, Errc::domain,
          "purity fix: purity must exceed the maximally mixed value");

  // The normalized Pauli basis is orthonormal, so the quadratic form in the
  // ratios is a plain sum of squares.
  double sum_sq = 0;
  for (double r : result.ratios) sum_sq += r * r;
  require(sum_sq > 0, Errc::domain, "purity fix: empty ratio vector");
  const double magnitude = std::sqrt((nu - floor) / sum_sq);

  const double tol = 1e-8;
  const double plus_margin = min_eigenvalue(state_from_ratios(result, magnitude));
  const double minus_margin = min_eigenvalue(state_from_ratios(result, -magnitude));
  const bool plus_ok = plus_margin >= -tol;
  const bool minus_ok = minus_margin >= -tol;
  if (plus_ok && minus_ok) {
    fail(Errc::ambiguity, "purity fix: both sign branches are physical (min eigenvalues " +
                              std::to_string(plus_margin) + ", " + std::to_string(minus_margin) +
                              ")");
  }
  require(plus_ok || minus_ok, Errc::gauge_inconsistent,
          "purity fix: neither sign branch is a valid state");

  GaugeSolution sol;
  sol.method = "purity";
  sol.alpha = plus_ok ? magnitude : -magnitude;
  sol.rejected_branch_margin = plus_ok ? minus_margin : plus_margin;
  return sol;
}

GaugeSolution fix_probe(const TomographyResult& result, const DensityMatrix& probe,
                        const VectorXd& measured, const Povm& povm,
                        const ProbeOptions& options) {
  const long D = povm.outcome_count();
  require(measured.size() == D, Errc::dimension, "probe fix: measured vector length");
  const VectorXd y_probe = ideal_distribution(probe, MatrixXcd::Identity(dim_of(povm.n()),
                                                                         dim_of(povm.n())),
                                              povm);
  const VectorXd w = gauge_offset(result.noise_candidate, povm);
  const VectorXd signal = result.noise_candidate * y_probe - w;
  if (signal.norm() < 1e-9 * static_cast<double>(D)) {
    fail(Errc::uninformative,
         "probe fix: probe distribution is uninformative (alpha cancels)");
  }
  const VectorXd rhs = measured - w;
  const double inverse_alpha = signal.dot(rhs) / signal.squaredNorm();
  require(std::abs(inverse_alpha) > 1e-12, Errc::gauge_inconsistent,
          "probe fix: fitted gauge diverges");

  GaugeSolution sol;
  sol.method = "probe";
  sol.alpha = 1.0 / inverse_alpha;
  sol.residual = (rhs - inverse_alpha * signal).norm();
  if (sol.residual > options.residual_tol_per_outcome * static_cast<double>(D)) {
    fail(Errc::inconsistency, "probe fix: residual " + std::to_string(sol.residual) +
                                  " exceeds tolerance; probe data inconsistent with the "
                                  "decoded noise candidate");
  }
  return sol;
}

namespace {

// Partial contractions of a (D1 D2) x (D1 D2) matrix.
MatrixXd contract_second(const MatrixXd& m, long d1, long d2) {
  MatrixXd out = MatrixXd::Zero(d1, d1);
  for (long a = 0; a < d1; ++a) {
    for (long b = 0; b < d1; ++b) {
      double sum = 0;
      for (long l = 0; l < d2; ++l) {
        for (long lp = 0; lp < d2; ++lp) sum += m(a * d2 + l, b * d2 + lp);
      }
      out(a, b) = sum / static_cast<double>(d2);
    }
  }
  return out;
}

MatrixXd contract_first(const MatrixXd& m, long d1, long d2) {
  MatrixXd out = MatrixXd::Zero(d2, d2);
  for (long a = 0; a < d2; ++a) {
    for (long b = 0; b < d2; ++b) {
      double sum = 0;
      for (long k = 0; k < d1; ++k) {
        for (long kp = 0; kp < d1; ++kp) sum += m(k * d2 + a, kp * d2 + b);
      }
      out(a, b) = sum / static_cast<double>(d1);
    }
  }
  return out;
}

MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i) {
    for (long j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace

GaugeSolution fix_block_independent(const TomographyResult& result, long d1, long d2,
                                    const Povm& povm) {
  const long D = povm.outcome_count();
  require(d1 >= 2 && d2 >= 2 && d1 * d2 == D, Errc::dimension,
          "block fix: partition must multiply to the outcome count");

  const MatrixXd& candidate = result.noise_candidate;
  const VectorXd w = gauge_offset(candidate, povm);
  const MatrixXd offset = w * VectorXd::Ones(D).transpose();

  const MatrixXd b1 = contract_second(candidate, d1, d2);
  const MatrixXd e1 = contract_second(offset, d1, d2);
  const MatrixXd b2 = contract_first(candidate, d1, d2);
  const MatrixXd e2 = contract_first(offset, d1, d2);

  // candidate - B1(x)E2 - E1(x)B2 + offset = alpha~ (B1-E1)(x)(B2-E2), where
  // alpha~ carries the candidate back to the factorized truth.
  const MatrixXd lhs = candidate - kron(b1, e2) - kron(e1, b2) + offset;
  const MatrixXd coeff = kron(b1 - e1, b2 - e2);

  long bi = 0, bj = 0;
  const double peak = coeff.cwiseAbs().maxCoeff(&bi, &bj);
  if (peak < 1e-9) {
    fail(Errc::degenerate_prior,
         "block fix: contracted factors vanish (a block is an erasure channel)");
  }
  const double inverse_alpha = lhs(bi, bj) / coeff(bi, bj);
  require(std::abs(inverse_alpha) > 1e-12, Errc::gauge_inconsistent,
          "block fix: degenerate gauge estimate");

  // Verify that the fixed matrix actually factorizes.
  const MatrixXd fixed = inverse_alpha * candidate + (1.0 - inverse_alpha) * offset;
  const MatrixXd f1 = contract_second(fixed, d1, d2);
  const MatrixXd f2 = contract_first(fixed, d1, d2);
  // Contractions of a stochastic Kronecker pair carry a scale ambiguity; fix
  // it by normalizing the factor columns.
  MatrixXd f1n = f1, f2n = f2;
  for (long c = 0; c < d1; ++c) {
    const double s = f1.col(c).sum();
    if (std::abs(s) > 1e-12) f1n.col(c) = f1.col(c) / s;
  }
  for (long c = 0; c < d2; ++c) {
    const double s = f2.col(c).sum();
    if (std::abs(s) > 1e-12) f2n.col(c) = f2.col(c) / s;
  }
  const double factor_residual = (fixed - kron(f1n, f2n)).cwiseAbs().maxCoeff();
  if (factor_residual > 1e-6) {
    fail(Errc::prior_violated, "block fix: noise does not factorize (residual " +
                                   std::to_string(factor_residual) + ")");
  }

  GaugeSolution sol;
  sol.method = "block_independent";
  sol.alpha = 1.0 / inverse_alpha;
  sol.factor_residual = factor_residual;
  return sol;
}

// ---------------------------------------------------------------------------
// Linear prior information

namespace {

// Orthonormal completion of a set of vectors to a full basis; the input rows
// are kept (unnormalized) and the completion is built from the QR factors.
std::vector<VectorXd> complete_basis(const std::vector<VectorXd>& given, long dim, Errc errc,
                                     const std::string& what) {
  MatrixXd m(dim, static_cast<long>(given.size()));
  for (std::size_t j = 0; j < given.size(); ++j) m.col(static_cast<long>(j)) = given[j];
  if (!given.empty()) {
    Eigen::JacobiSVD<MatrixXd> svd(m);
    require(svd.singularValues().minCoeff() >
                1e-10 * std::max(1.0, svd.singularValues().maxCoeff()),
            errc, what + ": prior vectors are linearly dependent");
  }
  std::vector<VectorXd> completion;
  // Gram-Schmidt of the coordinate axes against the givens.
  std::vector<VectorXd> ortho;
  for (const VectorXd& g : given) {
    VectorXd v = g;
    for (const VectorXd& o : ortho) v -= o.dot(v) * o;
    ortho.push_back(v / v.norm());
  }
  for (long axis = 0; axis < dim && static_cast<long>(completion.size()) <
                                        dim - static_cast<long>(given.size());
       ++axis) {
    VectorXd v = VectorXd::Unit(dim, axis);
    for (const VectorXd& o : ortho) v -= o.dot(v) * o;
    if (v.norm() > 1e-8) {
      v /= v.norm();
      ortho.push_back(v);
      completion.push_back(v);
    }
  }
  require(static_cast<long>(given.size() + completion.size()) == dim, errc,
          what + ": failed to complete the prior basis");
  return completion;
}

}  // namespace

LinearPriorDecode decode_linear_prior(const DistributionOracle& oracle, const LinearPriors& priors,
                                      const Povm& povm) {
  const int n = povm.n();
  const long D = povm.outcome_count();
  const auto basis = enumerate_basis(n, BasisFamily::traceless_pauli);
  const long coeff_dim = static_cast<long>(basis.size());
  const double scale = std::pow(2.0, n / 2.0);

  require(!priors.state_vectors.empty(), Errc::insufficient_prior,
          "linear priors: at least one state functional is required to fix the gauge");
  require(priors.state_vectors.size() == priors.state_values.size() &&
              priors.noise_vectors.size() == priors.noise_values.size(),
          Errc::config, "linear priors: vector/value count mismatch");
  const double gauge_value = priors.state_values.front();
  require(std::abs(gauge_value) > 1e-12, Errc::insufficient_prior,
          "linear priors: the first state functional must be nonzero to fix the gauge");
  require(independence_rank(povm) == D, Errc::condition3,
          "linear priors: POVM must be linearly independent");

  // Complete both prior families to bases.
  const std::vector<VectorXd> state_completion =
      complete_basis(priors.state_vectors, coeff_dim, Errc::insufficient_prior, "state priors");
  const std::vector<VectorXd> noise_completion =
      complete_basis(priors.noise_vectors, D, Errc::insufficient_prior, "noise priors");

  // All noise directions, priors first.
  std::vector<VectorXd> noise_dirs = priors.noise_vectors;
  noise_dirs.insert(noise_dirs.end(), noise_completion.begin(), noise_completion.end());

  // Coefficients of each noise direction in the POVM span: solve
  // m_full bt = b over {I} u B_R columns.
  const MatrixXd m_full = coefficient_matrix(povm, basis);
  const auto m_solver = m_full.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV);
  std::vector<VectorXd> tilde(noise_dirs.size());
  for (std::size_t j = 0; j < noise_dirs.size(); ++j) {
    tilde[j] = m_solver.solve(noise_dirs[j]);
    require((m_full * tilde[j] - noise_dirs[j]).norm() < 1e-8, Errc::condition3,
            "linear priors: noise direction outside the POVM span");
  }

  // z^I and the eliminator pool.
  std::vector<Circuit> pool = default_unitary_pool(n, basis.front());
  for (std::size_t b = 1; b < basis.size(); ++b) {
    const auto extra = default_unitary_pool(n, basis[b]);
    pool.insert(pool.end(), extra.begin(), extra.end());
  }
  const VectorXd z_id =
      compute_z(oracle, solve_eliminator_plan(povm, EliminatorSpec::identity(povm), pool));

  // Rank-one eliminator for a state functional row and a noise direction.
  auto rank_one_spec = [&](const VectorXd& state_row, std::size_t j, const std::string& tag) {
    EliminatorSpec spec = EliminatorSpec::identity(povm);
    spec.tag = tag;
    for (long b = 0; b < coeff_dim; ++b) {
      for (long k = 0; k < D; ++k) {
        spec.targets(b, k) =
            state_row[b] * (noise_dirs[j][k] - tilde[j][0] * m_full(k, 0));
      }
    }
    return spec;
  };

  const VectorXd& gauge_row = priors.state_vectors.front();

  // Step 1: recover the unknown noise contractions through the gauge row.
  const std::size_t first_completion = priors.noise_vectors.size();
  MatrixXd rows(D, D);  // row j: <a_k, b_j> for every k, filled per direction
  for (std::size_t j = 0; j < noise_dirs.size(); ++j) {
    if (j < first_completion) {
      // Known prior action.
      for (long k = 0; k < D; ++k) rows(static_cast<long>(j), k) = priors.noise_values[j][k];
      continue;
    }
    const EliminatorPlan plan = solve_eliminator_plan(
        povm, rank_one_spec(gauge_row, j, "E(prior," + std::to_string(j) + ")"), pool);
    const VectorXd z_j = compute_z(oracle, plan);
    for (long k = 0; k < D; ++k) {
      const double g = (z_j[k] - z_id[k]) / gauge_value;
      rows(static_cast<long>(j), k) = g + tilde[j][0] * scale * z_id[k];
    }
  }

  // Step 2: solve for the noise matrix row by row.
  MatrixXd direction_matrix(D, D);
  for (std::size_t j = 0; j < noise_dirs.size(); ++j) {
    direction_matrix.row(static_cast<long>(j)) = noise_dirs[j].transpose();
  }
  const auto row_solver = direction_matrix.colPivHouseholderQr();
  require(row_solver.rank() == D, Errc::insufficient_prior,
          "linear priors: combined noise system is singular");
  MatrixXd noise(D, D);
  for (long k = 0; k < D; ++k) {
    noise.row(k) = row_solver.solve(rows.col(k)).transpose();
  }

  // Step 3: pick the best-conditioned (k, j) pivot from the known noise.
  long best_j = -1, best_k = -1;
  double best = 0;
  for (std::size_t j = 0; j < noise_dirs.size(); ++j) {
    const VectorXd action = noise * noise_dirs[j];
    for (long k = 0; k < D; ++k) {
      const double g = action[k] - tilde[j][0] * scale * z_id[k];
      if (std::abs(g) > best) {
        best = std::abs(g);
        best_j = static_cast<long>(j);
        best_k = k;
      }
    }
  }
  require(best > 1e-9, Errc::condition1,
          "linear priors: no usable pivot (noise is an erasure channel)");

  const VectorXd pivot_action = noise * noise_dirs[static_cast<std::size_t>(best_j)];
  const double pivot_g =
      pivot_action[best_k] - tilde[static_cast<std::size_t>(best_j)][0] * scale * z_id[best_k];

  // Recover the unknown state functionals against the pivot direction.
  MatrixXd state_rows(coeff_dim, coeff_dim);
  VectorXd state_vals(coeff_dim);
  long row = 0;
  for (std::size_t i = 0; i < priors.state_vectors.size(); ++i, ++row) {
    state_rows.row(row) = priors.state_vectors[i].transpose();
    state_vals[row] = priors.state_values[i];
  }
  for (const VectorXd& completion_row : state_completion) {
    const EliminatorPlan plan = solve_eliminator_plan(
        povm,
        rank_one_spec(completion_row, static_cast<std::size_t>(best_j),
                      "E(state," + std::to_string(row) + ")"),
        pool);
    const VectorXd z_ij = compute_z(oracle, plan);
    state_rows.row(row) = completion_row.transpose();
    state_vals[row] = (z_ij[best_k] - z_id[best_k]) / pivot_g;
    ++row;
  }
  const VectorXd s = state_rows.colPivHouseholderQr().solve(state_vals);

  LinearPriorDecode out;
  out.coefficients.n = n;
  out.coefficients.basis = basis;
  out.coefficients.values = s;
  out.noise = noise;
  return out;
}

// ---------------------------------------------------------------------------
// Binary symmetric channel

namespace {

// Contraction of a noisy distribution against a Z-string's sign vector,
// divided by 2^{n/2}: gives lambda_{S(P)} * s_P for exact BSC data.
double z_string_contraction(const PauliString& zs, const VectorXd& dist) {
  const int n = zs.n();
  double acc = 0;
  for (long k = 0; k < dist.size(); ++k) {
    int parity = 0;
    for (int qb = 0; qb < n; ++qb) {
      if (zs.z_bit(qb) && basis_bit(k, qb, n)) parity ^= 1;
    }
    acc += parity ? -dist[k] : dist[k];
  }
  return acc / std::pow(2.0, n / 2.0);
}

}  // namespace

BscDecode decode_bsc(const DistributionOracle& oracle, int n) {
  require(n >= 2, Errc::domain,
          "bsc decode: needs at least two qubits (single-qubit flips stay gauge-equivalent)");
  constexpr double kZeroTol = 1e-10;
  constexpr double kNearSymmetric = 1e-6;

  BscDecode out;
  for (const PauliString& p : enumerate_basis(n, BasisFamily::z_strings)) {
    if (!p.is_identity()) out.z_basis.push_back(p);
  }
  out.coefficients = VectorXd::Zero(static_cast<long>(out.z_basis.size()));
  out.flip_probabilities = VectorXd::Zero(n);
  out.flip_known.assign(n, false);

  const VectorXd base = oracle(Circuit(n));
  auto image_contraction = [&](const PauliString& p, const Circuit& gate) {
    const ConjugatedPauli img = conjugate(p, gate);
    return static_cast<double>(img.sign) * z_string_contraction(img.pauli, oracle(gate));
  };

  auto record_flip = [&](int qubit, double one_minus_2p) {
    require(std::abs(one_minus_2p) >= kNearSymmetric, Errc::near_symmetric,
            "bsc decode: flip probability on qubit " + std::to_string(qubit) +
                " is too close to 1/2 to identify");
    out.flip_probabilities[qubit] = (1.0 - one_minus_2p) / 2.0;
    out.flip_known[qubit] = true;
  };

  for (std::size_t b = 0; b < out.z_basis.size(); ++b) {
    const PauliString& p = out.z_basis[b];
    const double c_plain = z_string_contraction(p, base);
    if (std::abs(c_plain) <= kZeroTol) continue;  // s_P = 0 or unidentifiable

    std::vector<int> support;
    for (int qb = 0; qb < n; ++qb) {
      if (p.z_bit(qb)) support.push_back(qb);
    }

    if (support.size() == 1) {
      const int i = support[0];
      const int j = (i + 1) % n;
      Circuit swap_gate(n);
      swap_gate.swap(i, j);
      Circuit grow_gate(n);
      grow_gate.cnot(j, i);  // Z_i -> Z_j Z_i under conjugation

      const double c_swap = image_contraction(p, swap_gate);
      const double c_grow = image_contraction(p, grow_gate);
      // c_plain = l_i s, c_swap = l_j s, c_grow = l_i l_j s.
      record_flip(j, c_grow / c_plain);
      require(std::abs(c_swap) > 1e-300, Errc::near_symmetric,
              "bsc decode: degenerate helper contraction");
      record_flip(i, c_grow / c_swap);
      out.coefficients[static_cast<long>(b)] = c_plain * c_swap / c_grow;
    } else {
      double lambda = 1.0;
      for (std::size_t si = 0; si < support.size(); ++si) {
        const int remove = support[si];
        const int anchor = support[(si + 1) % support.size()];
        Circuit shrink(n);
        shrink.cnot(remove, anchor);  // removes Z_remove from the string
        const double c_shrunk = image_contraction(p, shrink);
        require(std::abs(c_shrunk) > 1e-300, Errc::near_symmetric,
                "bsc decode: degenerate contraction while shrinking " + p.label());
        const double one_minus_2p = c_plain / c_shrunk;
        record_flip(remove, one_minus_2p);
        lambda *= one_minus_2p;
      }
      out.coefficients[static_cast<long>(b)] = c_plain / lambda;
    }
  }
  return out;
}

}  // namespace simtomo
