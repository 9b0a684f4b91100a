#include "simtomo/decoder_rand.hpp"

#include <algorithm>
#include <cmath>

namespace simtomo {

SimShotOracle::SimShotOracle(DensityMatrix rho, NoiseMatrix noise, Povm povm)
    : rho_(std::move(rho)), noise_(std::move(noise)), povm_(std::move(povm)) {
  require(noise_.outcomes() == povm_.outcome_count(), Errc::dimension,
          "shot oracle: noise dimension does not match POVM");
}

const VectorXd& SimShotOracle::distribution(const Circuit& circuit) {
  const std::string key = circuit.key();
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(key, apply_noise(ideal_distribution(rho_, circuit, povm_), noise_))
             .first;
  }
  return it->second;
}

ShotBudget compute_shot_budget(int n, double beta, double epsilon_noise, double epsilon_ratio,
                               double delta, double contrast_lb, double c) {
  require(n >= 1, Errc::budget, "shot budget: n must be positive");
  require(beta > 0 && beta < 1, Errc::budget, "shot budget: beta must lie in (0, 1)");
  require(epsilon_noise > 0 && epsilon_ratio > 0, Errc::budget,
          "shot budget: accuracies must be positive");
  require(delta > 0 && delta < 1, Errc::budget, "shot budget: delta must lie in (0, 1)");
  require(contrast_lb > 0, Errc::budget, "shot budget: contrast bound must be positive");
  require(c > 0, Errc::budget, "shot budget: constant must be positive");
  require(epsilon_ratio < beta / 2, Errc::budget,
          "shot budget: the ratio step requires epsilon < beta / 2");

  const double factor = c * n + std::log(1.0 / delta);
  const double eight_n = std::pow(8.0, n);
  const double two_n = std::pow(2.0, n);

  ShotBudget b;
  b.beta = beta;
  b.epsilon_noise = epsilon_noise;
  b.epsilon_ratio = epsilon_ratio;
  b.delta = delta;
  b.contrast_lb = contrast_lb;
  b.c = c;
  b.support_total =
      static_cast<long>(std::ceil(eight_n * factor / (beta * beta * contrast_lb * contrast_lb)));
  b.noise_total = static_cast<long>(std::ceil(two_n * factor / (epsilon_noise * epsilon_noise)));
  const double ratio_additive = epsilon_ratio * beta * contrast_lb / 4.0;
  b.ratio_per_family =
      static_cast<long>(std::ceil(two_n * factor / (ratio_additive * ratio_additive)));
  return b;
}

long ZEstimates::index_of(const PauliString& p) const {
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis[i] == p) return static_cast<long>(i);
  }
  fail(Errc::domain, "z estimates: Pauli " + p.label() + " not in basis");
}

const MatrixXd& ZEstimates::of(const PauliString& p) const {
  return signal[static_cast<std::size_t>(index_of(p))];
}

ZValues ZEstimates::values() const {
  ZValues z;
  z.n = n;
  z.outcomes = outcomes;
  z.basis = basis;
  z.identity = identity;
  z.signal = signal;
  z.provenance = ZProvenance::estimated;
  return z;
}

namespace {

VectorXd binomial_se(const VectorXd& freq, long shots) {
  VectorXd se(freq.size());
  for (long i = 0; i < freq.size(); ++i) {
    const double p = std::clamp(freq[i], 0.0, 1.0);
    se[i] = shots > 0 ? std::sqrt(p * (1 - p) / static_cast<double>(shots)) : 1.0;
  }
  return se;
}

// Frequencies of outcomes when each shot applies a uniformly chosen circuit
// from the list.
VectorXd sample_uniform_mixture(const std::vector<const VectorXd*>& dists, long outcomes,
                                long shots, RngStream& rng) {
  VectorXd counts = VectorXd::Zero(outcomes);
  const std::uint64_t choices = dists.size();
  for (long s = 0; s < shots; ++s) {
    const VectorXd& d = *dists[rng.next_below(choices)];
    counts[sample_outcome(d, rng)] += 1.0;
  }
  return shots > 0 ? VectorXd(counts / static_cast<double>(shots)) : counts;
}

struct HadamardTable {
  MatrixXd h;              // (i, q) over nonidentity Z-strings
  VectorXd row_sums;       // sum_q H_iq
  std::vector<PauliString> z_strings;
};

HadamardTable hadamard_table(int n) {
  HadamardTable t;
  for (const PauliString& q : enumerate_basis(n, BasisFamily::z_strings)) {
    if (!q.is_identity()) t.z_strings.push_back(q);
  }
  const long D = dim_of(n);
  t.h.resize(D, static_cast<long>(t.z_strings.size()));
  for (long i = 0; i < D; ++i) {
    for (std::size_t j = 0; j < t.z_strings.size(); ++j) {
      t.h(i, static_cast<long>(j)) = hadamard_coefficient(i, t.z_strings[j]);
    }
  }
  t.row_sums = t.h.rowwise().sum();
  return t;
}

// Combine an identity estimate and per-Q PQ estimates into the (i, k) table.
void combine_family(const HadamardTable& table, const VectorXd& z_id, const VectorXd& z_id_se,
                    const std::vector<PqEstimate>& pq, MatrixXd* z_out, MatrixXd* se_out) {
  const long D = z_id.size();
  z_out->resize(D, D);
  se_out->resize(D, D);
  for (long i = 0; i < D; ++i) {
    const double id_coeff = 1.0 - table.row_sums[i];
    VectorXd row = id_coeff * z_id;
    VectorXd var = (id_coeff * z_id_se.array()).square().matrix();
    for (std::size_t j = 0; j < pq.size(); ++j) {
      const double h = table.h(i, static_cast<long>(j));
      row += h * pq[j].z;
      var += (h * pq[j].se.array()).square().matrix();
    }
    z_out->row(i) = row.transpose();
    se_out->row(i) = var.cwiseSqrt().transpose();
  }
}

std::vector<const VectorXd*> commutant_distributions(ShotOracle& oracle, const PauliString& q,
                                                     const Circuit& u_pq) {
  std::vector<const VectorXd*> dists;
  for (const PauliString& xs : enumerate_basis(q.n(), BasisFamily::x_strings)) {
    if (!commutes(xs, q)) continue;
    Circuit circuit = u_pq;
    circuit.then(x_string_circuit(xs));
    dists.push_back(&oracle.distribution(circuit));
  }
  return dists;
}

}  // namespace

IdentityEstimate estimate_z_identity(ShotOracle& oracle, int n, long shots, RngStream& rng) {
  require(shots >= 1, Errc::budget, "identity estimate: at least one shot required");
  std::vector<const VectorXd*> dists;
  for (const PauliString& xs : enumerate_basis(n, BasisFamily::x_strings)) {
    dists.push_back(&oracle.distribution(x_string_circuit(xs)));
  }
  IdentityEstimate est;
  est.z = sample_uniform_mixture(dists, dim_of(n), shots, rng);
  est.se = binomial_se(est.z, shots);
  est.shots = shots;
  return est;
}

PqEstimate estimate_z_pq(ShotOracle& oracle, const PauliString& p, const PauliString& q,
                         const Circuit& u_pq, long shots, RngStream& rng) {
  require(shots >= 1, Errc::budget, "pq estimate: at least one shot required");
  require(q.x_bits() == 0 && !q.is_identity(), Errc::domain,
          "pq estimate: q must be a nonidentity Z-string");
  require(!p.is_identity(), Errc::domain, "pq estimate: p must be traceless");
  const auto dists = commutant_distributions(oracle, q, u_pq);
  PqEstimate est;
  est.z = sample_uniform_mixture(dists, dim_of(p.n()), shots, rng);
  est.se = binomial_se(est.z, shots);
  est.shots = shots;
  return est;
}

FamilyEstimate estimate_z_family(ShotOracle& oracle, const PauliString& p, long pq_shots,
                                 RngStream& rng, CliffordMapCache& maps) {
  const int n = p.n();
  require(pq_shots >= 1, Errc::budget, "family estimate: at least one shot required");
  const HadamardTable table = hadamard_table(n);

  // Identity part gets the 2^n N' split so its error matches the PQ parts.
  const long id_shots = dim_of(n) * pq_shots;
  const IdentityEstimate id = estimate_z_identity(oracle, n, id_shots, rng);

  std::vector<PqEstimate> pq;
  pq.reserve(table.z_strings.size());
  for (const PauliString& q : table.z_strings) {
    pq.push_back(estimate_z_pq(oracle, p, q, maps.get(p, q), pq_shots, rng));
  }

  FamilyEstimate est;
  combine_family(table, id.z, id.se, pq, &est.z, &est.se);
  est.shots = id_shots + static_cast<long>(table.z_strings.size()) * pq_shots;
  return est;
}

ZEstimates estimate_z_subset(ShotOracle& oracle, int n, const std::vector<PauliString>& paulis,
                             long total_shots, RngStream& rng, CliffordMapCache& maps) {
  require(total_shots >= 1, Errc::budget, "z estimation: empty shot budget");
  require(!paulis.empty(), Errc::domain, "z estimation: no Paulis requested");
  const long D = dim_of(n);
  const HadamardTable table = hadamard_table(n);

  // Split: every P family uses (2^n - 1) N' shots, one shared identity batch
  // uses 2^n N'.
  const long families = static_cast<long>(paulis.size());
  const long weight = families * (D - 1) + D;
  const long pq_shots = std::max<long>(1, total_shots / weight);
  const long id_shots = D * pq_shots;

  ZEstimates z;
  z.n = n;
  z.outcomes = D;
  z.basis = paulis;

  const IdentityEstimate id = estimate_z_identity(oracle, n, id_shots, rng);
  z.identity = id.z;
  z.identity_se = id.se;
  z.identity_shots = id.shots;

  for (const PauliString& p : paulis) {
    std::vector<PqEstimate> pq;
    pq.reserve(table.z_strings.size());
    for (const PauliString& q : table.z_strings) {
      pq.push_back(estimate_z_pq(oracle, p, q, maps.get(p, q), pq_shots, rng));
    }
    MatrixXd zt, se;
    combine_family(table, id.z, id.se, pq, &zt, &se);
    z.signal.push_back(std::move(zt));
    z.signal_se.push_back(std::move(se));
    z.family_shots.push_back(static_cast<long>(table.z_strings.size()) * pq_shots);
  }
  return z;
}

ZEstimates estimate_all_z(ShotOracle& oracle, int n, long support_total, RngStream& rng,
                          CliffordMapCache& maps) {
  return estimate_z_subset(oracle, n, enumerate_basis(n, BasisFamily::traceless_pauli),
                           support_total, rng, maps);
}

std::vector<PauliString> threshold_support(const ZEstimates& z, double beta,
                                           double contrast_lb) {
  require(beta > 0, Errc::budget, "support threshold: beta must be positive");
  require(contrast_lb > 0, Errc::budget, "support threshold: contrast bound must be positive");
  const double threshold = 1.005 * beta * contrast_lb;
  std::vector<PauliString> support;
  for (std::size_t b = 0; b < z.basis.size(); ++b) {
    const double signal =
        (z.signal[b].rowwise() - z.identity.transpose()).cwiseAbs().maxCoeff();
    if (signal >= threshold) support.push_back(z.basis[b]);
  }
  if (support.empty()) {
    fail(Errc::support,
         "support threshold: no Pauli passed; increase the shot budget or decrease beta");
  }
  return support;
}

MatrixXd noise_from_estimates(const ZEstimates& z, const PauliString& reference) {
  const MatrixXd& table = z.of(reference);
  return table.transpose();  // A'_{ki} = z^{R,i}_k
}

RatioEstimates ratios_from_estimates(const ZEstimates& z, const PauliString& reference,
                                     const std::vector<PauliString>& support, double beta,
                                     double contrast_lb) {
  const MatrixXd& ref = z.of(reference);
  const long ref_index = z.index_of(reference);
  const MatrixXd deviation = (ref.rowwise() - z.identity.transpose()).cwiseAbs();
  long best_i = 0, best_k = 0;
  deviation.maxCoeff(&best_i, &best_k);

  const double denom = ref(best_i, best_k) - z.identity[best_k];
  require(std::abs(denom) >= beta * contrast_lb / 2.0, Errc::conditioning,
          "ratio estimation: reference signal below beta * contrast / 2");
  const double denom_se = std::hypot(z.signal_se[static_cast<std::size_t>(ref_index)](best_i, best_k),
                                     z.identity_se[best_k]);

  RatioEstimates out;
  out.support = support;
  out.argmax_i = best_i;
  out.argmax_k = best_k;
  for (const PauliString& p : support) {
    if (p == reference) {
      out.ratios.push_back(1.0);
      out.standard_errors.push_back(0.0);
      continue;
    }
    const long idx = z.index_of(p);
    const double numer = z.of(p)(best_i, best_k) - z.identity[best_k];
    const double numer_se = std::hypot(z.signal_se[static_cast<std::size_t>(idx)](best_i, best_k),
                                       z.identity_se[best_k]);
    const double ratio = numer / denom;
    // First-order propagation; the identity term is shared but small.
    const double se = std::abs(ratio) * std::hypot(numer_se / std::max(std::abs(numer), 1e-300),
                                                   denom_se / std::abs(denom));
    out.ratios.push_back(ratio);
    out.standard_errors.push_back(se);
  }
  return out;
}

TomographyResult run_randomized_tomography(ShotOracle& oracle, int n,
                                           const RandomizedConfig& config,
                                           std::uint64_t master_seed) {
  const ShotBudget budget =
      compute_shot_budget(n, config.beta, config.epsilon_noise, config.epsilon_ratio,
                          config.delta, config.contrast_lb, config.c);
  CliffordMapCache maps;
  long total_shots = 0;

  // Step 1: thresholded support from the full z sweep.
  RngStream step1(master_seed, 1);
  ZEstimates z = estimate_all_z(oracle, n, budget.support_total, step1, maps);
  total_shots += z.identity_shots;
  for (long s : z.family_shots) total_shots += s;

  std::vector<PauliString> support;
  try {
    support = threshold_support(z, config.beta, config.contrast_lb);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("step 1: ") + e.what());
  }

  // Reference: largest observed signal.
  PauliString reference = support.front();
  double best_signal = -1;
  for (const PauliString& p : support) {
    const double signal = (z.of(p).rowwise() - z.identity.transpose()).cwiseAbs().maxCoeff();
    if (signal > best_signal + 1e-15) {
      best_signal = signal;
      reference = p;
    }
  }

  // Step 2: fresh batch for the noise matrix at the noise budget.
  MatrixXd noise_candidate;
  if (config.reuse_step1_shots) {
    noise_candidate = noise_from_estimates(z, reference);
  } else {
    RngStream step2(master_seed, 2);
    const long pq_shots = std::max<long>(1, budget.noise_total / (2 * dim_of(n)));
    const FamilyEstimate fresh = estimate_z_family(oracle, reference, pq_shots, step2, maps);
    total_shots += fresh.shots;
    const long idx = z.index_of(reference);
    if (fresh.shots > z.family_shots[static_cast<std::size_t>(idx)]) {
      z.signal[static_cast<std::size_t>(idx)] = fresh.z;
      z.signal_se[static_cast<std::size_t>(idx)] = fresh.se;
      z.family_shots[static_cast<std::size_t>(idx)] = fresh.shots;
    }
    noise_candidate = z.of(reference).transpose();
  }

  // Step 3: re-estimate the identity and every supported family at the ratio
  // budget, then keep whichever estimate used more shots.
  if (!config.reuse_step1_shots) {
    RngStream step3(master_seed, 3);
    const long pq_shots = std::max<long>(1, budget.ratio_per_family / (2 * dim_of(n)));
    const long id_shots = dim_of(n) * pq_shots;
    if (id_shots > z.identity_shots) {
      const IdentityEstimate id = estimate_z_identity(oracle, n, id_shots, step3);
      z.identity = id.z;
      z.identity_se = id.se;
      z.identity_shots = id.shots;
      total_shots += id.shots;
    }
    for (const PauliString& p : support) {
      const FamilyEstimate fresh = estimate_z_family(oracle, p, pq_shots, step3, maps);
      total_shots += fresh.shots;
      const long idx = z.index_of(p);
      if (fresh.shots > z.family_shots[static_cast<std::size_t>(idx)]) {
        z.signal[static_cast<std::size_t>(idx)] = fresh.z;
        z.signal_se[static_cast<std::size_t>(idx)] = fresh.se;
        z.family_shots[static_cast<std::size_t>(idx)] = fresh.shots;
      }
    }
  }

  RatioEstimates ratios;
  try {
    ratios = ratios_from_estimates(z, reference, support, config.beta, config.contrast_lb);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("step 3: ") + e.what());
  }

  TomographyResult result;
  result.n = n;
  result.support = support;
  result.reference = reference;
  result.pivot_i = ratios.argmax_i;
  result.pivot_k = ratios.argmax_k;
  result.ratios = ratios.ratios;
  result.noise_candidate = noise_candidate;
  result.provenance = ZProvenance::estimated;
  result.total_shots = total_shots;
  return result;
}

}  // namespace simtomo
