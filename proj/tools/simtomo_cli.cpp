#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "simtomo/decoder_exact.hpp"
#include "simtomo/decoder_rand.hpp"
#include "simtomo/gauge_fix.hpp"
#include "simtomo/io.hpp"
#include "simtomo/sweep.hpp"

namespace {

using namespace simtomo;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitCondition = 2;
constexpr int kExitGolden = 3;
constexpr int kExitConfig = 4;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::parse:
    case Errc::config:
    case Errc::dimension:
    case Errc::capacity:
    case Errc::budget:
      return kExitConfig;
    case Errc::golden_mismatch:
      return kExitGolden;
    default:
      return kExitCondition;
  }
}

std::string provenance_line(const ExperimentConfig& cfg) {
  return "config=" + cfg.hash() + " seed=" + std::to_string(cfg.master_seed) +
         " version=" + std::string(kArtifactVersion);
}

void print_matrix(std::ostream& out, const MatrixXd& m) {
  char buf[32];
  for (long r = 0; r < m.rows(); ++r) {
    out << " ";
    for (long c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, " %6.2f", m(r, c));
      out << buf;
    }
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// run-example: decode the two-qubit worked example and check every printed
// value against its published two-decimal form.

int cmd_run_example(const std::string& out_dir) {
  const Povm povm = Povm::computational(2);
  const DensityMatrix rho = DensityMatrix::basis_state(2, "01");
  const NoiseMatrix noise = NoiseMatrix::tensor_flip({0.1, 0.1});
  const auto oracle = make_exact_oracle(rho, noise, povm);

  const ZValues z = compute_z_values(oracle, 2);
  const PauliString reference = PauliString::from_label("ZI");

  std::vector<std::string> failures;
  auto check = [&](const std::string& name, double got, double expected) {
    if (std::abs(got - expected) > 0.005) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%s: got %.4f, expected %.2f", name.c_str(), got, expected);
      failures.push_back(buf);
    }
  };

  std::cout << "z^I:\n ";
  for (long k = 0; k < 4; ++k) {
    std::cout << " " << z.identity[k];
    check("z^I[" + std::to_string(k) + "]", z.identity[k], 0.25);
  }
  std::cout << "\n";

  MatrixXd expected_zi(4, 4), expected_iz(4, 4);
  expected_zi << 0.53, 0.17, 0.17, 0.13,
                 0.17, 0.53, 0.13, 0.17,
                 0.17, 0.13, 0.53, 0.17,
                 0.13, 0.17, 0.17, 0.53;
  expected_iz << -0.03, 0.33, 0.33, 0.37,
                  0.33, -0.03, 0.37, 0.33,
                  0.33, 0.37, -0.03, 0.33,
                  0.37, 0.33, 0.33, -0.03;

  const struct {
    const char* label;
    const MatrixXd* expected;
  } tables[] = {{"ZI", &expected_zi}, {"IZ", &expected_iz}, {"ZZ", &expected_iz}};
  for (const auto& t : tables) {
    const MatrixXd& got = z.of(PauliString::from_label(t.label));
    std::cout << "z^{" << t.label << "} (rows i, cols k):\n";
    print_matrix(std::cout, got);
    for (long i = 0; i < 4; ++i) {
      for (long k = 0; k < 4; ++k) {
        check(std::string("z^{") + t.label + "}[" + std::to_string(i) + "][" + std::to_string(k) +
                  "]",
              got(i, k), (*t.expected)(i, k));
      }
    }
  }

  const TomographyResult result = run_exact_tomography(rho, noise, povm);
  const MatrixXd a_prime = recover_noise(z, reference, povm);
  std::cout << "A'(s_ZI):\n";
  print_matrix(std::cout, a_prime);
  for (long r = 0; r < 4; ++r) {
    for (long c = 0; c < 4; ++c) {
      check("A'[" + std::to_string(r) + "][" + std::to_string(c) + "]", a_prime(r, c),
            expected_zi(r, c));
    }
  }

  const auto ratios = recover_ratios(z, reference, result.support, result.pivot_i,
                                     result.pivot_k);
  std::cout << "ratios to s_ZI:\n";
  for (std::size_t i = 0; i < result.support.size(); ++i) {
    std::cout << "  " << result.support[i].label() << ": " << ratios[i] << "\n";
    const double expected = result.support[i] == reference ? 1.0 : -1.0;
    check("ratio " + result.support[i].label(), ratios[i], expected);
  }

  // Purity prior pins the gauge; print the reconstructed pair.
  const GaugeSolution gauge = fix_purity(result, 1.0, povm);
  const ReconstructedPair pair = apply_gauge_solution(result, gauge.alpha, povm);
  std::cout << "gauge alpha (purity): " << gauge.alpha << "\n";
  std::cout << "reconstructed state diagonal:\n ";
  for (long k = 0; k < 4; ++k) std::cout << " " << pair.state(k, k).real();
  std::cout << "\nreconstructed noise:\n";
  print_matrix(std::cout, pair.noise);
  check("state[1][1]", pair.state(1, 1).real(), 1.0);
  check("noise[0][0]", pair.noise(0, 0), 0.81);
  check("noise[0][1]", pair.noise(0, 1), 0.09);
  check("noise[0][3]", pair.noise(0, 3), 0.01);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    ExperimentConfig cfg;
    cfg.command = "run-example";
    std::ofstream out(out_dir + "/run_example_result.json");
    json j = result_to_json(result);
    j["gauge_alpha"] = gauge.alpha;
    j["provenance"] = provenance_line(cfg);
    out << j.dump(2) << "\n";
  }

  if (!failures.empty()) {
    std::cerr << "golden mismatches:\n";
    for (const auto& f : failures) std::cerr << "  " << f << "\n";
    return kExitGolden;
  }
  std::cout << "all values match the published example\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// decode

int cmd_decode(const ExperimentConfig& cfg) {
  const Povm povm = parse_povm_spec(cfg.povm_spec, cfg.n);
  const DensityMatrix rho = parse_state_spec(cfg.state_spec, cfg.n);
  const NoiseMatrix noise = parse_noise_spec(cfg.noise_spec, povm.outcome_count());

  TomographyResult result;
  if (cfg.mode == DecoderMode::exact) {
    result = run_exact_tomography(rho, noise, povm);
  } else {
    require(povm.kind() == PovmKind::computational, Errc::config,
            "randomized decoding requires the computational POVM");
    require(max_pauli_coefficient(rho) > 1e-6, Errc::condition2,
            "Condition 2 violated: state has no traceless component");
    require(noise_contrast(noise) > 1e-6, Errc::condition1,
            "Condition 1 violated: noise is an erasure channel");
    SimShotOracle oracle(rho, noise, povm);
    result = run_randomized_tomography(oracle, cfg.n, cfg.randomized, cfg.master_seed);
  }

  switch (cfg.gauge.method) {
    case GaugeMethod::none:
      break;
    case GaugeMethod::purity:
      result.gauge_alpha = fix_purity(result, cfg.gauge.purity, povm).alpha;
      break;
    case GaugeMethod::probe: {
      const DensityMatrix probe = parse_state_spec(cfg.gauge.probe_state, cfg.n);
      const VectorXd measured = apply_noise(ideal_distribution(probe, Circuit(cfg.n), povm),
                                            noise);
      result.gauge_alpha = fix_probe(result, probe, measured, povm).alpha;
      break;
    }
    case GaugeMethod::block_independent:
      result.gauge_alpha =
          fix_block_independent(result, cfg.gauge.block_d1, cfg.gauge.block_d2, povm).alpha;
      break;
    case GaugeMethod::bsc: {
      const BscDecode decoded = decode_bsc(make_exact_oracle(rho, noise, povm), cfg.n);
      std::cout << "bsc flip probabilities:";
      for (long q = 0; q < decoded.flip_probabilities.size(); ++q) {
        std::cout << " " << decoded.flip_probabilities[q];
      }
      std::cout << "\n";
      break;
    }
  }

  std::filesystem::create_directories(cfg.out_dir);
  json j = result_to_json(result);
  j["provenance"] = provenance_line(cfg);
  {
    std::ofstream out(cfg.out_dir + "/result.json");
    out << j.dump(2) << "\n";
  }
  {
    std::ofstream out(cfg.out_dir + "/result.txt");
    out << format_result_summary(result);
  }
  std::cout << format_result_summary(result);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// scaling

int cmd_scaling(const ExperimentConfig& cfg) {
  SweepSettings settings;
  settings.protocol = cfg.sweep.protocol == "beta" ? SweepProtocol::beta
                                                   : SweepProtocol::noise_contrast;
  settings.step = cfg.sweep.step == 3 ? SweepStep::ratio : SweepStep::support;
  settings.taus = cfg.sweep.taus;
  settings.shot_grid = cfg.sweep.shot_grid;
  settings.trials = cfg.sweep.trials;
  settings.master_seed = cfg.master_seed;
  settings.threads = cfg.threads;
  settings.beta_fixed = cfg.randomized.beta;
  settings.epsilon_ratio = cfg.randomized.epsilon_ratio;

  const SweepOutcome outcome = run_scaling_sweep(settings);

  std::filesystem::create_directories(cfg.out_dir);
  const std::string provenance = provenance_line(cfg);

  std::vector<std::vector<std::string>> rows;
  for (const auto& point : outcome.points) {
    for (std::size_t g = 0; g < point.shot_grid.size(); ++g) {
      rows.push_back({std::to_string(cfg.n), format_double(point.beta),
                      format_double(point.noise_contrast), std::to_string(point.shot_grid[g]),
                      std::to_string(point.trials), std::to_string(point.successes[g]),
                      std::to_string(cfg.sweep.step), std::to_string(cfg.master_seed)});
    }
  }
  write_csv(cfg.out_dir + "/sweep.csv", provenance,
            {"n", "beta", "u_norm", "N", "trials", "successes", "step_id", "seed_base"}, rows);

  std::vector<std::vector<std::string>> summary;
  for (const auto& point : outcome.points) {
    summary.push_back({cfg.sweep.protocol + "/step" + std::to_string(cfg.sweep.step),
                       format_double(point.tau), format_double(point.beta),
                       format_double(point.noise_contrast), format_double(point.swept_value),
                       format_double(point.fit.n_star),
                       point.fit.used_interpolation ? "interpolation" : "logistic",
                       format_double(outcome.loglog_slope)});
  }
  write_csv(cfg.out_dir + "/n_star.csv", provenance,
            {"sweep_id", "tau", "beta", "u_norm", "swept_value", "n_star", "fit_kind",
             "loglog_slope"},
            summary);

  std::cout << "log-log slope of N* versus swept quantity: " << outcome.loglog_slope << "\n";
  for (const auto& point : outcome.points) {
    std::cout << "  tau=" << point.tau << " swept=" << point.swept_value
              << " N*=" << point.fit.n_star
              << (point.fit.used_interpolation ? " (interpolated)" : "") << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// calibrate

int cmd_calibrate(const ExperimentConfig& cfg) {
  require(cfg.sweep.trials >= 1, Errc::config, "calibrate: trials must be positive");
  const Povm povm = parse_povm_spec(cfg.povm_spec, cfg.n);
  require(povm.kind() == PovmKind::computational, Errc::config,
          "calibrate: randomized pipeline needs the computational POVM");
  const DensityMatrix rho = parse_state_spec(cfg.state_spec, cfg.n);
  const NoiseMatrix noise = parse_noise_spec(cfg.noise_spec, povm.outcome_count());

  const CalibrationResult calib = calibrate_constant(rho, noise, cfg.randomized,
                                                     cfg.sweep.trials, 0.9, cfg.master_seed,
                                                     cfg.threads);

  std::filesystem::create_directories(cfg.out_dir);
  json j;
  j["provenance"] = provenance_line(cfg);
  j["recommended_c"] = calib.c;
  j["success_rate"] = calib.success_rate;
  j["reached_target"] = calib.reached_target;
  json trace = json::array();
  for (const auto& [c, rate] : calib.trace) trace.push_back({{"c", c}, {"rate", rate}});
  j["trace"] = trace;
  std::ofstream out(cfg.out_dir + "/calibration.json");
  out << j.dump(2) << "\n";

  std::cout << "recommended c = " << calib.c << " (success rate " << calib.success_rate << ")"
            << (calib.reached_target ? "" : " [budget cap reached]") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simultaneous tomography of quantum states and measurement noise"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string mode;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON experiment config");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "master seed")->each([&](const std::string&) {
      seed_set = true;
    });
    cmd->add_option("--threads", threads, "worker threads");
    cmd->add_option("--mode", mode, "decoder mode: exact|randomized");
  };

  CLI::App* example = app.add_subcommand("run-example", "reproduce the two-qubit worked example");
  add_common(example);
  CLI::App* decode = app.add_subcommand("decode", "run one decoding job");
  add_common(decode);
  CLI::App* scaling = app.add_subcommand("scaling", "sample-complexity sweep");
  add_common(scaling);
  CLI::App* calibrate = app.add_subcommand("calibrate", "search the budget constant c");
  add_common(calibrate);

  CLI11_PARSE(app, argc, argv);

  try {
    if (example->parsed()) return cmd_run_example(out_dir);

    simtomo::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = simtomo::load_config(config_path);
    if (seed_set) cfg.master_seed = seed;
    if (threads > 0) cfg.threads = threads;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!mode.empty()) {
      cfg.mode = mode == "randomized" ? simtomo::DecoderMode::randomized
                                      : simtomo::DecoderMode::exact;
    }

    if (decode->parsed()) {
      cfg.command = "decode";
      return cmd_decode(cfg);
    }
    if (scaling->parsed()) {
      cfg.command = "scaling";
      return cmd_scaling(cfg);
    }
    if (calibrate->parsed()) {
      cfg.command = "calibrate";
      return cmd_calibrate(cfg);
    }
  } catch (const simtomo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
