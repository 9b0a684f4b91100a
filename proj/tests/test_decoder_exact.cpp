#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "simtomo/decoder_exact.hpp"
#include "simtomo/rng.hpp"

using namespace simtomo;

namespace {

struct RunningExample {
  Povm povm = Povm::computational(2);
  DensityMatrix rho = DensityMatrix::basis_state(2, "01");
  NoiseMatrix noise = NoiseMatrix::tensor_flip({0.1, 0.1});
  DistributionOracle oracle = make_exact_oracle(rho, noise, povm);
};

DensityMatrix sampled_state(int n, RngStream& rng, double min_coeff) {
  for (;;) {
    const DensityMatrix rho = random_state(n, rng.next_in(0.3, 1.0), rng);
    if (max_pauli_coefficient(rho) >= min_coeff) return rho;
  }
}

NoiseMatrix sampled_noise(long outcomes, RngStream& rng, double min_contrast) {
  for (;;) {
    const NoiseMatrix a = random_noise(outcomes, rng.next_in(0.1, 0.9), rng);
    if (noise_contrast(a) >= min_contrast) return a;
  }
}

}  // namespace

TEST_CASE("running example z tables match the published decimals") {
  RunningExample ex;
  const ZValues z = compute_z_values(ex.oracle, 2);

  for (long k = 0; k < 4; ++k) CHECK(z.identity[k] == doctest::Approx(0.25).epsilon(1e-10));

  const MatrixXd& z_zi = z.of(PauliString::from_label("ZI"));
  MatrixXd expected_zi(4, 4);
  expected_zi << 0.53, 0.17, 0.17, 0.13,
                 0.17, 0.53, 0.13, 0.17,
                 0.17, 0.13, 0.53, 0.17,
                 0.13, 0.17, 0.17, 0.53;
  CHECK((z_zi - expected_zi).cwiseAbs().maxCoeff() < 1e-10);

  MatrixXd expected_iz(4, 4);
  expected_iz << -0.03, 0.33, 0.33, 0.37,
                  0.33, -0.03, 0.37, 0.33,
                  0.33, 0.37, -0.03, 0.33,
                  0.37, 0.33, 0.33, -0.03;
  CHECK((z.of(PauliString::from_label("IZ")) - expected_iz).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((z.of(PauliString::from_label("ZZ")) - expected_iz).cwiseAbs().maxCoeff() < 1e-10);

  // All other Paulis give the uniform table.
  const MatrixXd& z_xx = z.of(PauliString::from_label("XX"));
  CHECK((z_xx.array() - 0.25).abs().maxCoeff() < 1e-10);
}

TEST_CASE("noiseless mixed state gives flat z tables") {
  const Povm povm = Povm::computational(2);
  const auto oracle =
      make_exact_oracle(DensityMatrix::maximally_mixed(2), NoiseMatrix::identity(4), povm);
  const ZValues z = compute_z_values(oracle, 2);
  for (const auto& table : z.signal) {
    CHECK((table.array() - 0.25).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("running example support and pivot") {
  RunningExample ex;
  const ZValues z = compute_z_values(ex.oracle, 2);
  const SupportResult sup = find_support(z);
  REQUIRE(sup.support.size() == 3);
  CHECK(sup.support[0] == PauliString::from_label("IZ"));
  CHECK(sup.support[1] == PauliString::from_label("ZI"));
  CHECK(sup.support[2] == PauliString::from_label("ZZ"));
  CHECK(sup.nonzero_row_count == 4);
  CHECK(sup.pivot_i >= 0);
  CHECK(sup.pivot_k >= 0);
}

TEST_CASE("maximally mixed state raises a degeneracy error") {
  const Povm povm = Povm::computational(2);
  const auto oracle = make_exact_oracle(DensityMatrix::maximally_mixed(2),
                                        NoiseMatrix::tensor_flip({0.1, 0.1}), povm);
  const ZValues z = compute_z_values(oracle, 2);
  CHECK_THROWS_AS(find_support(z), Error);
}

TEST_CASE("full-support random state matches coefficient support") {
  RngStream rng(101, 0);
  const DensityMatrix rho = sampled_state(2, rng, 0.1);
  const NoiseMatrix noise = sampled_noise(4, rng, 0.1);
  const Povm povm = Povm::computational(2);
  const ZValues z = compute_z_values(make_exact_oracle(rho, noise, povm), 2);
  const SupportResult sup = find_support(z);

  const StateCoefficients coeffs = pauli_coefficients(rho);
  std::vector<PauliString> expected;
  for (std::size_t i = 0; i < coeffs.basis.size(); ++i) {
    if (std::abs(coeffs.values[static_cast<long>(i)]) > 1e-9) expected.push_back(coeffs.basis[i]);
  }
  CHECK(sup.support == expected);
}

TEST_CASE("running example noise recovery reproduces the gauge matrix") {
  RunningExample ex;
  const ZValues z = compute_z_values(ex.oracle, 2);
  const MatrixXd a_prime = recover_noise(z, PauliString::from_label("ZI"), ex.povm);
  MatrixXd expected(4, 4);
  expected << 0.53, 0.17, 0.17, 0.13,
              0.17, 0.53, 0.13, 0.17,
              0.17, 0.13, 0.53, 0.17,
              0.13, 0.17, 0.17, 0.53;
  CHECK((a_prime - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("noise recovery at s_R = 1 scale on one qubit") {
  // Noiseless |0><0| with R = Z has s_R = 1/sqrt(2).
  const Povm povm = Povm::computational(1);
  const DensityMatrix rho = DensityMatrix::basis_state(1, "0");
  const NoiseMatrix noise = NoiseMatrix::identity(2);
  const ZValues z = compute_z_values(make_exact_oracle(rho, noise, povm), 1);
  const MatrixXd a_prime = recover_noise(z, PauliString::from_label("Z"), povm);
  const double s = 1.0 / std::sqrt(2.0);
  const MatrixXd expected =
      s * MatrixXd::Identity(2, 2) + (1 - s) * 0.5 * MatrixXd::Ones(2, 2);
  CHECK((a_prime - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("noise recovery matches the gauge formula on random instances") {
  RngStream rng(103, 0);
  const Povm povm = Povm::computational(2);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix rho = sampled_state(2, rng, 0.1);
    const NoiseMatrix noise = sampled_noise(4, rng, 0.1);
    const ZValues z = compute_z_values(make_exact_oracle(rho, noise, povm), 2);
    const SupportResult sup = find_support(z);
    const StateCoefficients coeffs = pauli_coefficients(rho);
    for (const PauliString& reference : {sup.support.front(), sup.support.back()}) {
      const MatrixXd a_prime = recover_noise(z, reference, povm);
      const double s_r = coeffs[reference];
      const GaugePair expected = gauge_transform(rho, noise, s_r, povm);
      CHECK((a_prime - expected.noise_candidate).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("running example ratios are -1") {
  RunningExample ex;
  const ZValues z = compute_z_values(ex.oracle, 2);
  const SupportResult sup = find_support(z);
  const PauliString reference = PauliString::from_label("ZI");
  const auto ratios =
      recover_ratios(z, reference, sup.support, sup.pivot_i, sup.pivot_k);
  REQUIRE(ratios.size() == 3);
  CHECK(ratios[0] == doctest::Approx(-1.0).epsilon(1e-10));  // IZ
  CHECK(ratios[1] == doctest::Approx(1.0).epsilon(1e-12));   // ZI itself
  CHECK(ratios[2] == doctest::Approx(-1.0).epsilon(1e-10));  // ZZ
}

TEST_CASE("ratios match coefficient quotients and are pivot independent") {
  RngStream rng(107, 0);
  const Povm povm = Povm::computational(2);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMatrix rho = sampled_state(2, rng, 0.1);
    const NoiseMatrix noise = sampled_noise(4, rng, 0.1);
    const ZValues z = compute_z_values(make_exact_oracle(rho, noise, povm), 2);
    const SupportResult sup = find_support(z);
    const StateCoefficients coeffs = pauli_coefficients(rho);
    const PauliString reference = sup.support.front();
    const auto ratios =
        recover_ratios(z, reference, sup.support, sup.pivot_i, sup.pivot_k);
    for (std::size_t i = 0; i < sup.support.size(); ++i) {
      CHECK(std::abs(ratios[i] - coeffs[sup.support[i]] / coeffs[reference]) < 1e-10);
    }
    // Any other valid pivot gives the same ratios on exact data.
    const MatrixXd& ref_table = z.of(reference);
    int alternates = 0;
    for (long i = 0; i < 4 && alternates < 3; ++i) {
      for (long k = 0; k < 4 && alternates < 3; ++k) {
        if (std::abs(ref_table(i, k) - z.identity[k]) <= 1e-4) continue;
        const auto alt = recover_ratios(z, reference, sup.support, i, k);
        for (std::size_t j = 0; j < ratios.size(); ++j) {
          CHECK(std::abs(alt[j] - ratios[j]) < 1e-10);
        }
        ++alternates;
      }
    }
  }
}

TEST_CASE("end-to-end exact decoding satisfies the reconstruction identity") {
  RngStream rng(109, 0);
  int checked = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const int n = 1 + trial % 3;
    const Povm povm = Povm::computational(n);
    const DensityMatrix rho = sampled_state(n, rng, 0.1);
    const NoiseMatrix noise = sampled_noise(dim_of(n), rng, 0.1);
    const TomographyResult result = run_exact_tomography(rho, noise, povm);

    // Gauge consistency: the candidate equals the alpha = s_R transform.
    const StateCoefficients coeffs = pauli_coefficients(rho);
    const double s_r = coeffs[result.reference];
    const GaugePair expected = gauge_transform(rho, noise, s_r, povm);
    CHECK((result.noise_candidate - expected.noise_candidate).cwiseAbs().maxCoeff() < 1e-10);

    // Ratio consistency.
    for (std::size_t i = 0; i < result.support.size(); ++i) {
      CHECK(std::abs(result.ratios[i] - coeffs[result.support[i]] / s_r) < 1e-9);
    }

    // Reconstructing (rho', A') from the result at alpha = s_R reproduces the
    // noisy statistics of the truth for random unitaries.
    StateCoefficients recon;
    recon.n = n;
    recon.basis = enumerate_basis(n, BasisFamily::traceless_pauli);
    recon.values = VectorXd::Zero(static_cast<long>(recon.basis.size()));
    for (std::size_t i = 0; i < recon.basis.size(); ++i) {
      for (std::size_t j = 0; j < result.support.size(); ++j) {
        if (recon.basis[i] == result.support[j]) {
          recon.values[static_cast<long>(i)] = result.ratios[j];  // s_P / s_R
        }
      }
    }
    const MatrixXcd rho_prime = matrix_from_coefficients(recon);  // gauge alpha = 1/s_R image
    for (int u = 0; u < 10; ++u) {
      const MatrixXcd unitary = random_unitary(dim_of(n), rng);
      const VectorXd truth = apply_noise(ideal_distribution(rho, unitary, povm), noise);
      const MatrixXcd evolved = unitary * rho_prime * unitary.adjoint();
      VectorXd y(povm.outcome_count());
      for (long k = 0; k < povm.outcome_count(); ++k) {
        y[k] = (evolved * povm.element(k)).trace().real();
      }
      const VectorXd reproduced = result.noise_candidate * y;
      CHECK((truth - reproduced).cwiseAbs().maxCoeff() < 1e-9);
    }
    ++checked;
  }
  CHECK(checked == 24);
}

TEST_CASE("reference covariance: two references related by the gauge transform") {
  RngStream rng(211, 0);
  const Povm povm = Povm::computational(2);
  const DensityMatrix rho = sampled_state(2, rng, 0.15);
  const NoiseMatrix noise = sampled_noise(4, rng, 0.15);
  const ZValues z = compute_z_values(make_exact_oracle(rho, noise, povm), 2);
  const SupportResult sup = find_support(z);
  REQUIRE(sup.support.size() >= 2);
  const PauliString r1 = sup.support[0];
  const PauliString r2 = sup.support[1];
  const MatrixXd a1 = recover_noise(z, r1, povm);
  const MatrixXd a2 = recover_noise(z, r2, povm);
  const auto ratios1 = recover_ratios(z, r1, sup.support, sup.pivot_i, sup.pivot_k);
  const double alpha = ratios1[1];  // s_{R2} / s_{R1}

  // a2 = alpha a1 + (1 - alpha) w 1^T with the shared gauge offset w.
  const VectorXd w = gauge_offset(a1, povm);
  const MatrixXd predicted =
      alpha * a1 + (1 - alpha) * w * VectorXd::Ones(4).transpose();
  CHECK((a2 - predicted).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("condition violations carry their condition number") {
  const Povm povm = Povm::computational(2);
  const DensityMatrix rho = DensityMatrix::basis_state(2, "01");
  try {
    run_exact_tomography(rho, NoiseMatrix::erasure(VectorXd::Constant(4, 0.25)), povm);
    FAIL("expected Condition 1 error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::condition1);
    CHECK(std::string(e.what()).find("Condition 1") != std::string::npos);
  }
  try {
    run_exact_tomography(DensityMatrix::maximally_mixed(2), NoiseMatrix::tensor_flip({0.1, 0.1}),
                         povm);
    FAIL("expected Condition 2 error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::condition2);
  }
}

TEST_CASE("general POVM decoding on one qubit via solved plans") {
  RngStream rng(307, 0);
  // Random 3-outcome, linearly independent qubit POVM.
  Povm povm = Povm::computational(1);
  for (;;) {
    std::vector<MatrixXcd> raw;
    MatrixXcd total = MatrixXcd::Zero(2, 2);
    for (int k = 0; k < 3; ++k) {
      MatrixXcd g(2, 2);
      for (long i = 0; i < 2; ++i)
        for (long j = 0; j < 2; ++j) g(i, j) = Complex(rng.next_normal(), rng.next_normal());
      raw.push_back(g * g.adjoint());
      total += raw.back();
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(total);
    std::vector<MatrixXcd> elements;
    for (auto& m : raw) elements.push_back(es.operatorInverseSqrt() * m * es.operatorInverseSqrt());
    povm = Povm::from_elements(1, std::move(elements));
    if (independence_rank(povm) == 3) break;
  }

  const DensityMatrix rho = sampled_state(1, rng, 0.15);
  MatrixXd a(3, 3);
  a << 0.8, 0.1, 0.05,
       0.1, 0.8, 0.05,
       0.1, 0.1, 0.9;
  const NoiseMatrix noise = NoiseMatrix::from_matrix(a);

  const TomographyResult result = run_exact_tomography(rho, noise, povm);
  const StateCoefficients coeffs = pauli_coefficients(rho);
  const double s_r = coeffs[result.reference];
  const GaugePair expected = gauge_transform(rho, noise, s_r, povm);
  CHECK((result.noise_candidate - expected.noise_candidate).cwiseAbs().maxCoeff() < 1e-8);
  for (std::size_t i = 0; i < result.support.size(); ++i) {
    CHECK(std::abs(result.ratios[i] - coeffs[result.support[i]] / s_r) < 1e-8);
  }
}
