// Acceptance suite: every criterion prints one PASS/FAIL line; the binary
// exits nonzero if any of them fail.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "simtomo/decoder_exact.hpp"
#include "simtomo/decoder_rand.hpp"
#include "simtomo/gauge_fix.hpp"
#include "simtomo/sweep.hpp"

using namespace simtomo;

namespace {

struct Criterion {
  int id;
  const char* name;
  std::function<bool(std::string&)> run;
};

DensityMatrix sampled_state(int n, RngStream& rng, double min_coeff) {
  for (;;) {
    const DensityMatrix rho = random_state(n, rng.next_in(0.25, 1.0), rng);
    if (max_pauli_coefficient(rho) >= min_coeff) return rho;
  }
}

NoiseMatrix sampled_noise(long outcomes, RngStream& rng, double min_contrast) {
  for (;;) {
    const NoiseMatrix a = random_noise(outcomes, rng.next_in(0.1, 0.9), rng);
    if (noise_contrast(a) >= min_contrast) return a;
  }
}

// --------------------------------------------------------------------------
// 1. Golden running example.

bool criterion_running_example(std::string& detail) {
  const Povm povm = Povm::computational(2);
  const DensityMatrix rho = DensityMatrix::basis_state(2, "01");
  const NoiseMatrix noise = NoiseMatrix::tensor_flip({0.1, 0.1});
  const auto oracle = make_exact_oracle(rho, noise, povm);

  const ZValues z = compute_z_values(oracle, 2);
  double worst = 0;
  for (long k = 0; k < 4; ++k) worst = std::max(worst, std::abs(z.identity[k] - 0.25));

  MatrixXd expected_zi(4, 4), expected_iz(4, 4);
  expected_zi << 0.53, 0.17, 0.17, 0.13,
                 0.17, 0.53, 0.13, 0.17,
                 0.17, 0.13, 0.53, 0.17,
                 0.13, 0.17, 0.17, 0.53;
  expected_iz << -0.03, 0.33, 0.33, 0.37,
                  0.33, -0.03, 0.37, 0.33,
                  0.33, 0.37, -0.03, 0.33,
                  0.37, 0.33, 0.33, -0.03;
  worst = std::max(worst,
                   (z.of(PauliString::from_label("ZI")) - expected_zi).cwiseAbs().maxCoeff());
  worst = std::max(worst,
                   (z.of(PauliString::from_label("IZ")) - expected_iz).cwiseAbs().maxCoeff());
  worst = std::max(worst,
                   (z.of(PauliString::from_label("ZZ")) - expected_iz).cwiseAbs().maxCoeff());

  const MatrixXd a_prime = recover_noise(z, PauliString::from_label("ZI"), povm);
  worst = std::max(worst, (a_prime - expected_zi).cwiseAbs().maxCoeff());
  worst = std::max(
      worst, (a_prime - z.of(PauliString::from_label("ZI")).transpose()).cwiseAbs().maxCoeff());

  const SupportResult sup = find_support(z);
  const auto ratios = recover_ratios(z, PauliString::from_label("ZI"), sup.support, sup.pivot_i,
                                     sup.pivot_k);
  if (sup.support.size() != 3) {
    detail = "support size " + std::to_string(sup.support.size());
    return false;
  }
  worst = std::max(worst, std::abs(ratios[0] - (-1.0)));
  worst = std::max(worst, std::abs(ratios[2] - (-1.0)));

  char buf[64];
  std::snprintf(buf, sizeof buf, "max deviation from printed values %.2e", worst);
  detail = buf;
  return worst <= 0.005;
}

// --------------------------------------------------------------------------
// 2. Gauge invariance.

bool criterion_gauge_invariance(std::string& detail) {
  RngStream rng(20260801, 0);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 3;
    const Povm povm = Povm::computational(n);
    const DensityMatrix rho = random_state(n, rng.next_in(0.2, 1.0), rng);
    const NoiseMatrix noise = random_noise(dim_of(n), rng.next_in(0.1, 0.9), rng);
    const double alpha = rng.next_in(0.3, 1.7);
    const GaugePair pair = gauge_transform(rho, noise, alpha, povm);
    for (int u = 0; u < 20; ++u) {
      const MatrixXcd unitary = random_unitary(dim_of(n), rng);
      const VectorXd original = apply_noise(ideal_distribution(rho, unitary, povm), noise);
      const MatrixXcd evolved = unitary * pair.state_candidate * unitary.adjoint();
      VectorXd y(povm.outcome_count());
      for (long k = 0; k < povm.outcome_count(); ++k) {
        y[k] = (evolved * povm.element(k)).trace().real();
      }
      const VectorXd transformed = pair.noise_candidate * y;
      worst = std::max(worst, 0.5 * (original - transformed).cwiseAbs().sum());
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max total-variation distance %.2e", worst);
  detail = buf;
  return worst < 1e-10;
}

// --------------------------------------------------------------------------
// 3. Eliminator dense-oracle residuals.

bool criterion_eliminators(std::string& detail) {
  double worst = 0;

  const Povm povm2 = Povm::computational(2);
  const auto basis2 = enumerate_basis(2, BasisFamily::traceless_pauli);
  for (const auto& p : basis2) {
    for (const auto& q : enumerate_basis(2, BasisFamily::z_strings)) {
      if (q.is_identity()) continue;
      worst = std::max(worst, verify_plan(plan_pauli_eliminator(p, q),
                                          EliminatorSpec::transfer_to_pauli(p, q, povm2), povm2));
    }
    for (long i = 0; i < 4; ++i) {
      worst = std::max(worst, verify_plan(plan_outcome_eliminator(p, i),
                                          EliminatorSpec::transfer_to_outcome(p, i, povm2),
                                          povm2));
    }
  }
  worst = std::max(
      worst, verify_plan(plan_identity_eliminator(2), EliminatorSpec::identity(povm2), povm2));

  const Povm povm3 = Povm::computational(3);
  const auto basis3 = enumerate_basis(3, BasisFamily::traceless_pauli);
  RngStream rng(20260803, 0);
  worst = std::max(
      worst, verify_plan(plan_identity_eliminator(3), EliminatorSpec::identity(povm3), povm3));
  for (int trial = 0; trial < 50; ++trial) {
    const PauliString p = basis3[rng.next_below(basis3.size())];
    const long i = static_cast<long>(rng.next_below(8));
    worst = std::max(worst, verify_plan(plan_outcome_eliminator(p, i),
                                        EliminatorSpec::transfer_to_outcome(p, i, povm3), povm3));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max dense-superoperator residual %.2e", worst);
  detail = buf;
  return worst < 1e-12;
}

// --------------------------------------------------------------------------
// 4. Exact round trip on random instances.

bool criterion_exact_roundtrip(std::string& detail) {
  RngStream rng(20260804, 0);
  double worst_noise = 0, worst_ratio = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 3;
    const Povm povm = Povm::computational(n);
    const DensityMatrix rho = sampled_state(n, rng, 0.1);
    const NoiseMatrix noise = sampled_noise(dim_of(n), rng, 0.1);
    const TomographyResult result = run_exact_tomography(rho, noise, povm);

    const StateCoefficients coeffs = pauli_coefficients(rho);
    std::vector<PauliString> expected_support;
    for (std::size_t i = 0; i < coeffs.basis.size(); ++i) {
      if (std::abs(coeffs.values[static_cast<long>(i)]) > 1e-9) {
        expected_support.push_back(coeffs.basis[i]);
      }
    }
    if (result.support != expected_support) {
      detail = "support mismatch at trial " + std::to_string(trial);
      return false;
    }
    const double s_ref = coeffs[result.reference];
    const GaugePair truth = gauge_transform(rho, noise, s_ref, povm);
    worst_noise = std::max(
        worst_noise, (result.noise_candidate - truth.noise_candidate).cwiseAbs().maxCoeff());
    for (std::size_t i = 0; i < result.support.size(); ++i) {
      worst_ratio = std::max(
          worst_ratio, std::abs(result.ratios[i] - coeffs[result.support[i]] / s_ref));
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "max noise error %.2e, max ratio error %.2e", worst_noise,
                worst_ratio);
  detail = buf;
  return worst_noise < 1e-8 && worst_ratio < 1e-8;
}

// --------------------------------------------------------------------------
// 5. Gauge fixing methods.

bool criterion_gauge_fixing(std::string& detail) {
  RngStream rng(20260805, 0);

  // Purity on pure states.
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 2;
    const Povm povm = Povm::computational(n);
    const DensityMatrix rho = random_state(n, 1.0, rng);
    const NoiseMatrix noise = sampled_noise(dim_of(n), rng, 0.1);
    const TomographyResult result = run_exact_tomography(rho, noise, povm);
    const GaugeSolution sol = fix_purity(result, 1.0, povm);
    const ReconstructedPair pair = apply_gauge_solution(result, sol.alpha, povm);
    if ((pair.state - rho.matrix()).cwiseAbs().maxCoeff() >= 1e-8 ||
        (pair.noise - noise.matrix()).cwiseAbs().maxCoeff() >= 1e-8) {
      detail = "purity reconstruction failed at trial " + std::to_string(trial);
      return false;
    }
  }

  // Probe states.
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 3;
    const Povm povm = Povm::computational(n);
    const DensityMatrix rho = sampled_state(n, rng, 0.1);
    const NoiseMatrix noise = sampled_noise(dim_of(n), rng, 0.1);
    const TomographyResult result = run_exact_tomography(rho, noise, povm);
    const DensityMatrix probe = DensityMatrix::basis_state(n, std::string(n, '0'));
    const VectorXd measured = apply_noise(ideal_distribution(probe, Circuit(n), povm), noise);
    const GaugeSolution sol = fix_probe(result, probe, measured, povm);
    const ReconstructedPair pair = apply_gauge_solution(result, sol.alpha, povm);
    if ((pair.state - rho.matrix()).cwiseAbs().maxCoeff() >= 1e-8 ||
        (pair.noise - noise.matrix()).cwiseAbs().maxCoeff() >= 1e-8) {
      detail = "probe reconstruction failed at trial " + std::to_string(trial);
      return false;
    }
  }

  // Block-independent noise.
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 2;
    const long d1 = 2, d2 = dim_of(n) / 2;
    const Povm povm = Povm::computational(n);
    const DensityMatrix rho = sampled_state(n, rng, 0.1);
    MatrixXd prod;
    for (;;) {
      const MatrixXd a1 = sampled_noise(d1, rng, 0.1).matrix();
      const MatrixXd a2 = sampled_noise(d2, rng, 0.1).matrix();
      prod.resize(d1 * d2, d1 * d2);
      for (long i = 0; i < d1; ++i) {
        for (long j = 0; j < d1; ++j) prod.block(i * d2, j * d2, d2, d2) = a1(i, j) * a2;
      }
      if (noise_contrast(prod) >= 0.05) break;
    }
    const NoiseMatrix noise = NoiseMatrix::from_matrix(prod);
    const TomographyResult result = run_exact_tomography(rho, noise, povm);
    const GaugeSolution sol = fix_block_independent(result, d1, d2, povm);
    const ReconstructedPair pair = apply_gauge_solution(result, sol.alpha, povm);
    if ((pair.state - rho.matrix()).cwiseAbs().maxCoeff() >= 1e-8 ||
        (pair.noise - noise.matrix()).cwiseAbs().maxCoeff() >= 1e-8) {
      detail = "block reconstruction failed at trial " + std::to_string(trial);
      return false;
    }
  }

  // Linear priors at n = 1.
  {
    const Povm povm = Povm::computational(1);
    int done = 0;
    while (done < 50) {
      const DensityMatrix rho = random_state(1, rng.next_in(0.3, 1.0), rng);
      const StateCoefficients truth = pauli_coefficients(rho);
      if (std::abs(truth[PauliString::from_label("Z")]) < 0.1) continue;
      const NoiseMatrix noise = sampled_noise(2, rng, 0.1);
      LinearPriors priors;
      VectorXd b_z = VectorXd::Zero(3);
      b_z[2] = 1.0;
      priors.state_vectors.push_back(b_z);
      priors.state_values.push_back(truth[PauliString::from_label("Z")]);
      const LinearPriorDecode decoded =
          decode_linear_prior(make_exact_oracle(rho, noise, povm), priors, povm);
      if ((decoded.coefficients.values - truth.values).cwiseAbs().maxCoeff() >= 1e-8 ||
          (decoded.noise - noise.matrix()).cwiseAbs().maxCoeff() >= 1e-8) {
        detail = "linear-prior reconstruction failed at trial " + std::to_string(done);
        return false;
      }
      ++done;
    }
  }

  // Binary symmetric channel.
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 2;
    const Povm povm = Povm::computational(n);
    VectorXd diag(dim_of(n));
    double sum = 0;
    for (long k = 0; k < dim_of(n); ++k) {
      diag[k] = rng.next_double() + 0.02;
      sum += diag[k];
    }
    diag /= sum;
    MatrixXcd m = MatrixXcd::Zero(dim_of(n), dim_of(n));
    for (long k = 0; k < dim_of(n); ++k) m(k, k) = diag[k];
    const DensityMatrix rho = DensityMatrix::from_matrix(n, m);
    std::vector<double> flips;
    for (int q = 0; q < n; ++q) flips.push_back(rng.next_in(0.02, 0.35));
    const NoiseMatrix noise = NoiseMatrix::tensor_flip(flips);
    const BscDecode decoded = decode_bsc(make_exact_oracle(rho, noise, povm), n);
    const StateCoefficients truth = pauli_coefficients(rho);
    for (std::size_t b = 0; b < decoded.z_basis.size(); ++b) {
      if (std::abs(decoded.coefficients[static_cast<long>(b)] - truth[decoded.z_basis[b]]) >=
          1e-8) {
        detail = "bsc coefficient mismatch at trial " + std::to_string(trial);
        return false;
      }
    }
    for (int q = 0; q < n; ++q) {
      if (!decoded.flip_known[q] ||
          std::abs(decoded.flip_probabilities[q] - flips[static_cast<std::size_t>(q)]) >= 1e-8) {
        detail = "bsc flip mismatch at trial " + std::to_string(trial);
        return false;
      }
    }
  }

  // Designated errors on incompatible instances.
  try {
    const Povm povm = Povm::computational(2);
    MatrixXcd m = MatrixXcd::Zero(4, 4);
    m(0, 0) = 0.5;
    m(1, 1) = 0.5;
    const TomographyResult result = run_exact_tomography(
        DensityMatrix::from_matrix(2, m), NoiseMatrix::tensor_flip({0.1, 0.1}), povm);
    fix_purity(result, 0.5, povm);
    detail = "purity ambiguity not raised";
    return false;
  } catch (const Error& e) {
    if (e.code() != Errc::ambiguity) {
      detail = "unexpected purity error";
      return false;
    }
  }
  try {
    const Povm povm = Povm::computational(2);
    const DensityMatrix rho = DensityMatrix::basis_state(2, "01");
    const NoiseMatrix noise = NoiseMatrix::tensor_flip({0.5, 0.1});
    decode_bsc(make_exact_oracle(rho, noise, povm), 2);
    detail = "near-symmetric flip not raised";
    return false;
  } catch (const Error& e) {
    if (e.code() != Errc::near_symmetric) {
      detail = "unexpected bsc error";
      return false;
    }
  }

  detail = "purity/probe/block/linear/bsc each passed 50 instances";
  return true;
}

// --------------------------------------------------------------------------
// 6. Finite-shot statistics at the calibrated constant.

bool criterion_finite_shot(std::string& detail) {
  const Povm povm = Povm::computational(2);
  const DensityMatrix rho = DensityMatrix::basis_state(2, "01");
  const NoiseMatrix noise = NoiseMatrix::tensor_flip({0.1, 0.1});
  const StateCoefficients coeffs = pauli_coefficients(rho);

  RandomizedConfig config;
  config.beta = 0.25;
  config.epsilon_noise = 0.05;
  config.epsilon_ratio = 0.12;  // budget-side accuracy for the 1/3 target
  config.delta = 0.1;
  config.contrast_lb = 0.5;
  config.c = 2.0;  // calibrated on this instance family

  int good = 0;
  const int seeds = 50;
  for (int seed = 0; seed < seeds; ++seed) {
    SimShotOracle oracle(rho, noise, povm);
    try {
      const TomographyResult result =
          run_randomized_tomography(oracle, 2, config, 9000 + static_cast<std::uint64_t>(seed));
      if (result.support.size() != 3) continue;
      const double s_ref = coeffs[result.reference];
      const GaugePair truth = gauge_transform(rho, noise, s_ref, povm);
      bool ok = (result.noise_candidate - truth.noise_candidate).cwiseAbs().maxCoeff() <= 0.05;
      for (std::size_t i = 0; ok && i < result.support.size(); ++i) {
        const double expected = coeffs[result.support[i]] / s_ref;
        if (std::abs(result.ratios[i] - expected) > std::abs(expected) / 3.0) ok = false;
      }
      if (ok) ++good;
    } catch (const Error&) {
    }
  }
  detail = std::to_string(good) + "/" + std::to_string(seeds) +
           " trials met noise 0.05 and ratio 1/3";
  return good >= 45;
}

// --------------------------------------------------------------------------
// 7. Scaling-law reproduction.

bool criterion_scaling(std::string& detail) {
  char buf[256];
  std::string parts;
  bool ok = true;
  const struct {
    SweepProtocol protocol;
    SweepStep step;
    const char* name;
  } sweeps[] = {
      {SweepProtocol::noise_contrast, SweepStep::support, "u/step1"},
      {SweepProtocol::noise_contrast, SweepStep::ratio, "u/step3"},
      {SweepProtocol::beta, SweepStep::support, "beta/step1"},
      {SweepProtocol::beta, SweepStep::ratio, "beta/step3"},
  };
  for (const auto& sweep : sweeps) {
    SweepSettings settings;
    settings.protocol = sweep.protocol;
    settings.step = sweep.step;
    settings.trials = 50;
    settings.threads = 2;
    settings.master_seed = 20260807;
    settings.taus = sweep.protocol == SweepProtocol::noise_contrast
                        ? std::vector<double>{0.15, 0.25, 0.32, 0.40, 0.45}
                        : std::vector<double>{0.04, 0.055, 0.08, 0.11, 0.15};
    const SweepOutcome outcome = run_scaling_sweep(settings);
    std::snprintf(buf, sizeof buf, "%s slope %.2f; ", sweep.name, outcome.loglog_slope);
    parts += buf;
    if (!(std::abs(outcome.loglog_slope + 2.0) <= 0.4)) ok = false;
  }
  detail = parts;
  return ok;
}

// --------------------------------------------------------------------------
// 8. POVM structure lemmas.

bool criterion_povm_lemmas(std::string& detail) {
  RngStream rng(20260808, 0);

  // Covariance structure across computational and random POVMs.
  for (int trial = 0; trial < 20; ++trial) {
    Povm povm = Povm::computational(1 + trial % 3);
    if (trial % 2 == 1) {
      // Random 3-outcome qubit POVM.
      for (;;) {
        std::vector<MatrixXcd> raw;
        MatrixXcd total = MatrixXcd::Zero(2, 2);
        for (int k = 0; k < 3; ++k) {
          MatrixXcd g(2, 2);
          for (long i = 0; i < 2; ++i) {
            for (long j = 0; j < 2; ++j) g(i, j) = Complex(rng.next_normal(), rng.next_normal());
          }
          raw.push_back(g * g.adjoint());
          total += raw.back();
        }
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(total);
        std::vector<MatrixXcd> elements;
        for (auto& w : raw) {
          elements.push_back(es.operatorInverseSqrt() * w * es.operatorInverseSqrt());
        }
        povm = Povm::from_elements(1, std::move(elements));
        if (independence_rank(povm) == 3) break;
      }
    }
    const MatrixXd c = covariance(povm);
    const long D = povm.outcome_count();
    if ((c * VectorXd::Ones(D)).cwiseAbs().maxCoeff() >= 1e-9) {
      detail = "covariance rows do not sum to zero";
      return false;
    }
    Eigen::JacobiSVD<MatrixXd> svd(c);
    long rank = 0;
    for (long i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()[i] > 1e-9 * svd.singularValues()[0]) ++rank;
    }
    if (rank != D - 1) {
      detail = "covariance rank is not D-1";
      return false;
    }
  }

  // Reduction of a linearly dependent POVM.
  const Povm comp = Povm::computational(1);
  std::vector<MatrixXcd> elements = {comp.element(0), 0.4 * comp.element(1),
                                     0.6 * comp.element(1)};
  const Povm dependent = Povm::from_elements(1, std::move(elements));
  const ReducedPovm reduced = reduce_povm(dependent);
  if (reduced.povm.outcome_count() != 2 || independence_rank(reduced.povm) != 2) {
    detail = "reduced POVM is not independent";
    return false;
  }
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix rho = random_state(1, rng.next_in(0.2, 1.0), rng);
    VectorXd old_probs(3), new_probs(2);
    for (long k = 0; k < 3; ++k) {
      old_probs[k] = (rho.matrix() * dependent.element(k)).trace().real();
    }
    for (long k = 0; k < 2; ++k) {
      new_probs[k] = (rho.matrix() * reduced.povm.element(k)).trace().real();
    }
    if ((new_probs - reduced.recombination * old_probs).cwiseAbs().maxCoeff() >= 1e-10) {
      detail = "recombined probabilities mismatch";
      return false;
    }
  }
  detail = "covariance, rank, and reduction checks passed";
  return true;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "golden running example", criterion_running_example},
      {2, "gauge-invariance suite", criterion_gauge_invariance},
      {3, "eliminator oracle suite", criterion_eliminators},
      {4, "exact round-trip", criterion_exact_roundtrip},
      {5, "gauge-fixing suite", criterion_gauge_fixing},
      {6, "finite-shot statistical", criterion_finite_shot},
      {7, "scaling-law reproduction", criterion_scaling},
      {8, "POVM structure lemmas", criterion_povm_lemmas},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d: %s (%.1fs) - %s\n", ok ? "PASS" : "FAIL", criterion.id,
                criterion.name, seconds, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
