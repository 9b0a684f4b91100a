#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "simtomo/decoder_exact.hpp"
#include "simtomo/decoder_rand.hpp"
#include "simtomo/gauge_fix.hpp"
#include "simtomo/sim.hpp"

namespace simtomo {

// State specs: "basis:<bitstring>", "mixed:<w>:<seed>", or a JSON matrix.
DensityMatrix parse_state_spec(const std::string& spec, int n);
// Noise specs: "tensor_flip:<p1,p2,...>", "random:<seed>:<strength>", or a
// JSON matrix.
NoiseMatrix parse_noise_spec(const std::string& spec, long outcomes);
// POVM specs: "computational" or a JSON list of row-major [re, im] matrices.
Povm parse_povm_spec(const std::string& spec, int n);

// Explicit-matrix forms used inside JSON configs.
MatrixXcd parse_complex_matrix(const nlohmann::json& j);
MatrixXd parse_real_matrix(const nlohmann::json& j);

enum class DecoderMode { exact, randomized };
enum class GaugeMethod { none, purity, probe, block_independent, bsc };

struct GaugeConfig {
  GaugeMethod method = GaugeMethod::none;
  double purity = 1.0;
  std::string probe_state;     // state spec for the probe
  long block_d1 = 0, block_d2 = 0;
};

struct SweepConfig {
  std::string protocol;         // "noise_contrast" or "beta"
  std::vector<double> taus;     // swept family parameter
  std::vector<long> shot_grid;  // measurement counts per grid point
  int trials = 50;
  int step = 1;                 // 1 = support recovery, 3 = ratio recovery
};

struct ExperimentConfig {
  std::string command;
  int n = 2;
  std::string state_spec = "basis:01";
  std::string noise_spec = "tensor_flip:0.1,0.1";
  std::string povm_spec = "computational";
  DecoderMode mode = DecoderMode::exact;
  RandomizedConfig randomized;
  GaugeConfig gauge;
  SweepConfig sweep;
  std::uint64_t master_seed = 1;
  int threads = 1;
  std::string out_dir = ".";

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  // FNV-1a over the canonical JSON dump; stamped into every output file.
  std::string hash() const;
};

ExperimentConfig load_config(const std::string& path);

nlohmann::json result_to_json(const TomographyResult& result);
TomographyResult result_from_json(const nlohmann::json& j, int n);

std::string format_result_summary(const TomographyResult& result);

// CSV writing with a provenance header line ("# config=<hash> seed=<seed>
// version=<v>"). Bodies are byte-stable for fixed inputs.
void write_csv(const std::string& path, const std::string& provenance,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

std::string format_double(double value);

inline constexpr const char* kArtifactVersion = "1.0.0";

}  // namespace simtomo
