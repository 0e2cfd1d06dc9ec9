#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "daqec/circuit.hpp"
#include "daqec/lindblad.hpp"
#include "daqec/states.hpp"

namespace daqec {

enum class ScenarioKind { Prepare, Protect, Scan, Leakage, DecomposeCheck, DepthTheory };
enum class Strategy { NoQEC, SingleQEC, InterleavedQEC };

const char* to_string(ScenarioKind k);
ScenarioKind scenario_from_string(const std::string& s);
const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

// Spec as written in a config: levels may be given in dB or natural units.
struct SpecConfig {
  std::string family = "SqVac";
  std::optional<double> squeezing_db;
  std::optional<double> r;
  std::optional<double> trisqueezing_db;
  std::optional<double> xi;
  double eta = 0.0;
  double alpha_re = 0.0;
  double alpha_im = 0.0;
  int sign = +1;

  NullifierSpec to_spec() const;
  bool operator==(const SpecConfig&) const = default;
};

struct NoiseConfig {
  double photon_loss_hz = 0.0;
  double dephasing_hz = 0.0;
  std::optional<double> qubit_T1_s;
  std::optional<double> qubit_T2_s;

  NoiseModel to_model() const;
  // Same model without the ancilla terms.
  NoiseModel mode_only() const;
  bool operator==(const NoiseConfig&) const = default;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::Prepare;
  SpecConfig spec;
  Scheme scheme = Scheme::sBs;
  double gamma_hz = 1e7;
  std::vector<double> dt_grid;
  std::vector<int> n_grid;
  NoiseConfig noise;
  std::vector<Strategy> strategies;  // protect; empty means all three
  double horizon_s = 0.0;
  double round_interval_s = 0.0;
  int cutoff = 40;
  std::string output_path = "out";

  // scenario extras
  double fidelity_threshold = 0.95;
  double tail_tolerance = 1e-8;
  std::vector<double> level_grid_db;      // prepare: squeezing sweep at dt_grid[0]
  bool qec_noise = true;                  // prepare/protect/scan: also run with noise during QEC
  int noisy_readout_stride = 1;           // protect: noisy points every k rounds
  std::vector<SpecConfig> states;         // scan
  std::vector<Scheme> schemes;            // scan, leakage
  double storage_s = 0.0;                 // scan: storage noise before QEC (error-suppression states)
  std::vector<double> epsilon_grid;       // leakage
  int leakage_steps = 200;                // leakage
  std::vector<double> alpha_grid;         // leakage A(alpha, r) sub-run
  std::vector<double> r_grid;

  bool operator==(const ScenarioConfig&) const = default;
};

// Throws Error(ConfigError) with a line-precise message.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& cfg);
void validate_config(const ScenarioConfig& cfg);

// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string config_hash(const ScenarioConfig& cfg);

const char* library_version();

}  // namespace daqec
