#include "simtomo/io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace simtomo {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream in(s);
  while (std::getline(in, token, sep)) out.push_back(token);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    require(pos == s.size(), Errc::config, what + ": trailing characters in '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail(Errc::config, what + ": cannot parse number '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    fail(Errc::config, what + ": cannot parse integer '" + s + "'");
  }
}

}  // namespace

MatrixXcd parse_complex_matrix(const json& j) {
  require(j.is_array() && !j.empty(), Errc::config, "matrix: expected a nonempty array of rows");
  const long rows = static_cast<long>(j.size());
  const long cols = static_cast<long>(j[0].size());
  MatrixXcd m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    require(static_cast<long>(j[r].size()) == cols, Errc::config, "matrix: ragged rows");
    for (long c = 0; c < cols; ++c) {
      const auto& cell = j[r][c];
      if (cell.is_number()) {
        m(r, c) = Complex(cell.get<double>(), 0.0);
      } else {
        require(cell.is_array() && cell.size() == 2, Errc::config,
                "matrix: cells must be numbers or [re, im] pairs");
        m(r, c) = Complex(cell[0].get<double>(), cell[1].get<double>());
      }
    }
  }
  return m;
}

MatrixXd parse_real_matrix(const json& j) {
  const MatrixXcd m = parse_complex_matrix(j);
  require(m.imag().cwiseAbs().maxCoeff() < 1e-12, Errc::config, "matrix: expected real entries");
  return m.real();
}

DensityMatrix parse_state_spec(const std::string& spec, int n) {
  if (spec.rfind("basis:", 0) == 0) {
    return DensityMatrix::basis_state(n, spec.substr(6));
  }
  if (spec.rfind("mixed:", 0) == 0) {
    const auto parts = split(spec.substr(6), ':');
    require(parts.size() == 2, Errc::config, "state spec: expected mixed:<w>:<seed>");
    const double w = parse_double(parts[0], "state spec weight");
    RngStream rng(parse_u64(parts[1], "state spec seed"), 0);
    return random_state(n, w, rng);
  }
  // Explicit matrix as inline JSON.
  json j = json::parse(spec, nullptr, false);
  require(!j.is_discarded(), Errc::config, "state spec: unknown format '" + spec + "'");
  return DensityMatrix::from_matrix(n, parse_complex_matrix(j));
}

NoiseMatrix parse_noise_spec(const std::string& spec, long outcomes) {
  if (spec.rfind("tensor_flip:", 0) == 0) {
    const auto parts = split(spec.substr(12), ',');
    std::vector<double> flips;
    for (const auto& p : parts) flips.push_back(parse_double(p, "noise spec flip"));
    const NoiseMatrix a = NoiseMatrix::tensor_flip(flips);
    require(a.outcomes() == outcomes, Errc::config, "noise spec: dimension mismatch");
    return a;
  }
  if (spec.rfind("random:", 0) == 0) {
    const auto parts = split(spec.substr(7), ':');
    require(parts.size() == 2, Errc::config, "noise spec: expected random:<seed>:<strength>");
    RngStream rng(parse_u64(parts[0], "noise spec seed"), 0);
    return random_noise(outcomes, parse_double(parts[1], "noise spec strength"), rng);
  }
  json j = json::parse(spec, nullptr, false);
  require(!j.is_discarded(), Errc::config, "noise spec: unknown format '" + spec + "'");
  return NoiseMatrix::from_matrix(parse_real_matrix(j));
}

Povm parse_povm_spec(const std::string& spec, int n) {
  if (spec == "computational") return Povm::computational(n);
  json j = json::parse(spec, nullptr, false);
  require(!j.is_discarded() && j.is_array(), Errc::config,
          "povm spec: expected 'computational' or a JSON list of matrices");
  std::vector<MatrixXcd> elements;
  for (const auto& item : j) elements.push_back(parse_complex_matrix(item));
  return Povm::from_elements(n, std::move(elements));
}

namespace {

DecoderMode parse_mode(const std::string& s) {
  if (s == "exact") return DecoderMode::exact;
  if (s == "randomized") return DecoderMode::randomized;
  fail(Errc::config, "mode: expected exact|randomized, got '" + s + "'");
}

GaugeMethod parse_gauge_method(const std::string& s) {
  if (s == "none") return GaugeMethod::none;
  if (s == "purity") return GaugeMethod::purity;
  if (s == "probe") return GaugeMethod::probe;
  if (s == "block_independent") return GaugeMethod::block_independent;
  if (s == "bsc") return GaugeMethod::bsc;
  fail(Errc::config, "gauge method: unknown '" + s + "'");
}

std::string gauge_method_name(GaugeMethod m) {
  switch (m) {
    case GaugeMethod::none: return "none";
    case GaugeMethod::purity: return "purity";
    case GaugeMethod::probe: return "probe";
    case GaugeMethod::block_independent: return "block_independent";
    case GaugeMethod::bsc: return "bsc";
  }
  return "none";
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  auto get_or = [&](const char* key, auto fallback) {
    using T = decltype(fallback);
    return j.contains(key) ? j.at(key).get<T>() : fallback;
  };
  cfg.command = get_or("command", std::string("decode"));
  cfg.n = get_or("n", 2);
  require(cfg.n >= 1 && cfg.n <= kDenseQubitLimit, Errc::config, "config.n: out of range");
  cfg.state_spec = get_or("state", std::string("basis:01"));
  cfg.noise_spec = get_or("noise", std::string("tensor_flip:0.1,0.1"));
  cfg.povm_spec = get_or("povm", std::string("computational"));
  cfg.mode = parse_mode(get_or("mode", std::string("exact")));
  cfg.master_seed = get_or("seed", std::uint64_t{1});
  cfg.threads = get_or("threads", 1);
  cfg.out_dir = get_or("out", std::string("."));

  if (j.contains("randomized")) {
    const json& r = j.at("randomized");
    auto rget = [&](const char* key, double fallback) {
      return r.contains(key) ? r.at(key).get<double>() : fallback;
    };
    cfg.randomized.beta = rget("beta", cfg.randomized.beta);
    cfg.randomized.epsilon_noise = rget("epsilon_noise", cfg.randomized.epsilon_noise);
    cfg.randomized.epsilon_ratio = rget("epsilon_ratio", cfg.randomized.epsilon_ratio);
    cfg.randomized.delta = rget("delta", cfg.randomized.delta);
    cfg.randomized.contrast_lb = rget("contrast_lb", cfg.randomized.contrast_lb);
    cfg.randomized.c = rget("c", cfg.randomized.c);
    if (r.contains("reuse_step1_shots")) {
      cfg.randomized.reuse_step1_shots = r.at("reuse_step1_shots").get<bool>();
    }
  }
  if (j.contains("gauge")) {
    const json& g = j.at("gauge");
    cfg.gauge.method = parse_gauge_method(g.value("method", "none"));
    cfg.gauge.purity = g.value("purity", 1.0);
    cfg.gauge.probe_state = g.value("probe_state", std::string());
    cfg.gauge.block_d1 = g.value("block_d1", 0L);
    cfg.gauge.block_d2 = g.value("block_d2", 0L);
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    cfg.sweep.protocol = s.value("protocol", "noise_contrast");
    if (s.contains("taus")) cfg.sweep.taus = s.at("taus").get<std::vector<double>>();
    if (s.contains("shot_grid")) cfg.sweep.shot_grid = s.at("shot_grid").get<std::vector<long>>();
    cfg.sweep.trials = s.value("trials", 50);
    cfg.sweep.step = s.value("step", 1);
  }
  return cfg;
}

json ExperimentConfig::to_json() const {
  json j;
  j["command"] = command;
  j["n"] = n;
  j["state"] = state_spec;
  j["noise"] = noise_spec;
  j["povm"] = povm_spec;
  j["mode"] = mode == DecoderMode::exact ? "exact" : "randomized";
  j["seed"] = master_seed;
  j["threads"] = threads;
  j["out"] = out_dir;
  j["randomized"] = {{"beta", randomized.beta},
                     {"epsilon_noise", randomized.epsilon_noise},
                     {"epsilon_ratio", randomized.epsilon_ratio},
                     {"delta", randomized.delta},
                     {"contrast_lb", randomized.contrast_lb},
                     {"c", randomized.c},
                     {"reuse_step1_shots", randomized.reuse_step1_shots}};
  j["gauge"] = {{"method", gauge_method_name(gauge.method)},
                {"purity", gauge.purity},
                {"probe_state", gauge.probe_state},
                {"block_d1", gauge.block_d1},
                {"block_d2", gauge.block_d2}};
  j["sweep"] = {{"protocol", sweep.protocol},
                {"taus", sweep.taus},
                {"shot_grid", sweep.shot_grid},
                {"trials", sweep.trials},
                {"step", sweep.step}};
  return j;
}

std::string ExperimentConfig::hash() const {
  const std::string dump = to_json().dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::config, "config: cannot open " + path);
  json j = json::parse(in, nullptr, false);
  require(!j.is_discarded(), Errc::config, "config: invalid JSON in " + path);
  return ExperimentConfig::from_json(j);
}

json result_to_json(const TomographyResult& result) {
  json j;
  j["n"] = result.n;
  json support = json::array();
  for (std::size_t i = 0; i < result.support.size(); ++i) {
    support.push_back({{"pauli", result.support[i].label()}, {"ratio", result.ratios[i]}});
  }
  j["support"] = support;
  j["reference"] = result.reference.label();
  j["pivot"] = {result.pivot_i, result.pivot_k};
  json noise = json::array();
  for (long r = 0; r < result.noise_candidate.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < result.noise_candidate.cols(); ++c) {
      row.push_back(result.noise_candidate(r, c));
    }
    noise.push_back(row);
  }
  j["noise_candidate"] = noise;
  j["provenance"] = result.provenance == ZProvenance::exact ? "exact" : "estimated";
  j["nonzero_rows"] = result.nonzero_row_count;
  j["total_shots"] = result.total_shots;
  if (result.gauge_alpha.has_value()) {
    j["gauge_alpha"] = *result.gauge_alpha;
  } else {
    j["gauge_alpha"] = nullptr;
  }
  return j;
}

TomographyResult result_from_json(const json& j, int n) {
  TomographyResult r;
  r.n = n;
  for (const auto& item : j.at("support")) {
    r.support.push_back(PauliString::from_label(item.at("pauli").get<std::string>()));
    r.ratios.push_back(item.at("ratio").get<double>());
  }
  r.reference = PauliString::from_label(j.at("reference").get<std::string>());
  r.pivot_i = j.at("pivot")[0].get<long>();
  r.pivot_k = j.at("pivot")[1].get<long>();
  const auto& noise = j.at("noise_candidate");
  const long rows = static_cast<long>(noise.size());
  const long cols = rows > 0 ? static_cast<long>(noise[0].size()) : 0;
  r.noise_candidate.resize(rows, cols);
  for (long a = 0; a < rows; ++a) {
    for (long b = 0; b < cols; ++b) r.noise_candidate(a, b) = noise[a][b].get<double>();
  }
  r.provenance = j.value("provenance", "exact") == std::string("exact") ? ZProvenance::exact
                                                                        : ZProvenance::estimated;
  r.nonzero_row_count = j.value("nonzero_rows", 0L);
  r.total_shots = j.value("total_shots", 0L);
  if (j.contains("gauge_alpha") && !j.at("gauge_alpha").is_null()) {
    r.gauge_alpha = j.at("gauge_alpha").get<double>();
  }
  return r;
}

std::string format_double(double value) {
  std::ostringstream out;
  out.precision(12);
  out << value;
  return out.str();
}

std::string format_result_summary(const TomographyResult& result) {
  std::ostringstream out;
  out << "qubits: " << result.n << "\n";
  out << "reference: " << result.reference.label() << "\n";
  out << "support (ratio to reference):\n";
  for (std::size_t i = 0; i < result.support.size(); ++i) {
    out << "  " << result.support[i].label() << "  " << format_double(result.ratios[i]) << "\n";
  }
  out << "noise candidate A'(s_R):\n";
  for (long r = 0; r < result.noise_candidate.rows(); ++r) {
    out << " ";
    for (long c = 0; c < result.noise_candidate.cols(); ++c) {
      char buf[16];
      std::snprintf(buf, sizeof buf, " %8.4f", result.noise_candidate(r, c));
      out << buf;
    }
    out << "\n";
  }
  if (result.gauge_alpha.has_value()) {
    out << "gauge alpha: " << format_double(*result.gauge_alpha) << "\n";
  } else {
    out << "gauge alpha: unresolved\n";
  }
  if (result.total_shots > 0) out << "total shots: " << result.total_shots << "\n";
  return out.str();
}

void write_csv(const std::string& path, const std::string& provenance,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  require(out.good(), Errc::config, "csv: cannot open " + path + " for writing");
  out << "# " << provenance << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out << (i ? "," : "") << columns[i];
  }
  out << "\n";
  for (const auto& row : rows) {
    require(row.size() == columns.size(), Errc::config, "csv: row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << row[i];
    }
    out << "\n";
  }
}

}  // namespace simtomo
