#include "daqec/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace daqec {

const char* library_version() { return DAQEC_VERSION; }

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Prepare: return "prepare";
    case ScenarioKind::Protect: return "protect";
    case ScenarioKind::Scan: return "scan";
    case ScenarioKind::Leakage: return "leakage";
    case ScenarioKind::DecomposeCheck: return "decompose-check";
    case ScenarioKind::DepthTheory: return "depth-theory";
  }
  return "?";
}

ScenarioKind scenario_from_string(const std::string& s) {
  for (auto k : {ScenarioKind::Prepare, ScenarioKind::Protect, ScenarioKind::Scan, ScenarioKind::Leakage,
                 ScenarioKind::DecomposeCheck, ScenarioKind::DepthTheory})
    if (s == to_string(k)) return k;
  throw Error(ErrorKind::ConfigError, "unknown scenario '" + s + "'");
}

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::NoQEC: return "no-qec";
    case Strategy::SingleQEC: return "single-qec";
    case Strategy::InterleavedQEC: return "interleaved-qec";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& s) {
  for (auto k : {Strategy::NoQEC, Strategy::SingleQEC, Strategy::InterleavedQEC})
    if (s == to_string(k)) return k;
  throw Error(ErrorKind::ConfigError, "unknown strategy '" + s + "'");
}

NullifierSpec SpecConfig::to_spec() const {
  NullifierSpec s;
  s.family = family_from_string(family);
  if (squeezing_db && r) throw Error(ErrorKind::ConfigError, "give either squeezing_db or r, not both");
  if (trisqueezing_db && xi) throw Error(ErrorKind::ConfigError, "give either trisqueezing_db or xi, not both");
  if (squeezing_db) s.r = db_to_natural(*squeezing_db);
  if (r) s.r = *r;
  if (trisqueezing_db) s.xi = db_to_natural(*trisqueezing_db);
  if (xi) s.xi = *xi;
  s.eta = eta;
  s.alpha = cplx(alpha_re, alpha_im);
  s.sign = sign;
  if (!s.parity_symmetric()) s.sign = +1;
  s.validate();
  return s;
}

NoiseModel NoiseConfig::to_model() const {
  NoiseModel m;
  m.photon_loss = photon_loss_hz;
  m.dephasing = dephasing_hz;
  if (qubit_T1_s) m.qubit_T1 = *qubit_T1_s;
  if (qubit_T2_s) m.qubit_T2 = *qubit_T2_s;
  return m;
}

NoiseModel NoiseConfig::mode_only() const {
  NoiseModel m;
  m.photon_loss = photon_loss_hz;
  m.dephasing = dephasing_hz;
  return m;
}

namespace {

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) {
  const auto mk = n.Mark();
  if (mk.line >= 0) throw Error(ErrorKind::ConfigError, fmt::format("line {}: {}", mk.line + 1, msg));
  throw Error(ErrorKind::ConfigError, msg);
}

template <class T>
T as(const YAML::Node& n, const std::string& what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, "cannot read '" + what + "'");
  }
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& where) {
  if (!map.IsMap()) fail(map, where + " must be a mapping");
  for (auto it = map.begin(); it != map.end(); ++it) {
    const auto k = it->first.as<std::string>();
    if (!allowed.count(k)) fail(it->first, "unknown key '" + k + "' in " + where);
  }
}

std::vector<double> double_list(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) fail(n, what + " must be a list");
  std::vector<double> v;
  for (const auto& e : n) v.push_back(as<double>(e, what));
  return v;
}

std::vector<int> int_list(const YAML::Node& n, const std::string& what) {
  if (n.IsMap()) {
    check_keys(n, {"from", "to"}, what);
    if (!n["from"] || !n["to"]) fail(n, what + " range needs 'from' and 'to'");
    const int a = as<int>(n["from"], what + ".from"), b = as<int>(n["to"], what + ".to");
    if (b < a) fail(n, what + " range is empty");
    std::vector<int> v;
    for (int k = a; k <= b; ++k) v.push_back(k);
    return v;
  }
  if (!n.IsSequence()) fail(n, what + " must be a list or a {from, to} range");
  std::vector<int> v;
  for (const auto& e : n) v.push_back(as<int>(e, what));
  return v;
}

SpecConfig parse_spec(const YAML::Node& n, const std::string& where) {
  check_keys(n, {"family", "squeezing_db", "r", "trisqueezing_db", "xi", "eta", "alpha", "sign"}, where);
  SpecConfig s;
  if (!n["family"]) fail(n, where + " needs 'family'");
  s.family = as<std::string>(n["family"], "family");
  try {
    family_from_string(s.family);
  } catch (const Error&) {
    fail(n["family"], "unknown family '" + s.family + "'");
  }
  // reject parameters the family does not use at the offending key
  std::set<std::string> used{"family"};
  if (s.family == "SqVac" || s.family == "CPS" || s.family == "SqCAT") used.insert({"squeezing_db", "r"});
  if (s.family == "CPS") used.insert("eta");
  if (s.family == "TSS") used.insert({"trisqueezing_db", "xi"});
  if (s.family == "CAT" || s.family == "SqCAT") used.insert({"alpha", "sign"});
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!used.count(key)) fail(kv.first, "parameter '" + key + "' is not used by family " + s.family);
  }
  if (n["squeezing_db"]) s.squeezing_db = as<double>(n["squeezing_db"], "squeezing_db");
  if (n["r"]) s.r = as<double>(n["r"], "r");
  if (n["trisqueezing_db"]) s.trisqueezing_db = as<double>(n["trisqueezing_db"], "trisqueezing_db");
  if (n["xi"]) s.xi = as<double>(n["xi"], "xi");
  if (n["eta"]) s.eta = as<double>(n["eta"], "eta");
  if (const auto a = n["alpha"]) {
    if (a.IsSequence()) {
      if (a.size() != 2) fail(a, "alpha must be a number or [re, im]");
      s.alpha_re = as<double>(a[0], "alpha");
      s.alpha_im = as<double>(a[1], "alpha");
    } else {
      s.alpha_re = as<double>(a, "alpha");
    }
  }
  if (n["sign"]) s.sign = as<int>(n["sign"], "sign");
  try {
    s.to_spec();
  } catch (const Error& e) {
    fail(n, e.what());
  }
  return s;
}

NoiseConfig parse_noise(const YAML::Node& n) {
  check_keys(n, {"photon_loss_hz", "dephasing_hz", "qubit_T1_s", "qubit_T2_s"}, "noise");
  NoiseConfig c;
  if (n["photon_loss_hz"]) c.photon_loss_hz = as<double>(n["photon_loss_hz"], "photon_loss_hz");
  if (n["dephasing_hz"]) c.dephasing_hz = as<double>(n["dephasing_hz"], "dephasing_hz");
  if (n["qubit_T1_s"]) c.qubit_T1_s = as<double>(n["qubit_T1_s"], "qubit_T1_s");
  if (n["qubit_T2_s"]) c.qubit_T2_s = as<double>(n["qubit_T2_s"], "qubit_T2_s");
  try {
    c.to_model().validate();
  } catch (const Error& e) {
    fail(n, e.what());
  }
  return c;
}

Scheme parse_scheme(const YAML::Node& n) {
  try {
    return scheme_from_string(as<std::string>(n, "scheme"));
  } catch (const Error& e) {
    fail(n, e.what());
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::ConfigError, fmt::format("line {}: {}", e.mark.line + 1, e.msg));
  }
  if (!root.IsMap()) throw Error(ErrorKind::ConfigError, "config must be a mapping");
  check_keys(root,
             {"scenario", "spec", "scheme", "gamma_hz", "dt_grid", "n_grid", "noise", "strategy", "horizon_s",
              "round_interval_s", "cutoff", "output_path", "fidelity_threshold", "tail_tolerance", "level_grid_db",
              "qec_noise", "noisy_readout_stride", "states", "schemes", "storage_s", "epsilon_grid",
              "leakage_steps", "alpha_grid", "r_grid"},
             "config");
  ScenarioConfig c;
  if (!root["scenario"]) throw Error(ErrorKind::ConfigError, "missing 'scenario'");
  try {
    c.scenario = scenario_from_string(as<std::string>(root["scenario"], "scenario"));
  } catch (const Error& e) {
    fail(root["scenario"], e.what());
  }
  if (root["spec"]) c.spec = parse_spec(root["spec"], "spec");
  if (root["scheme"]) c.scheme = parse_scheme(root["scheme"]);
  if (root["gamma_hz"]) c.gamma_hz = as<double>(root["gamma_hz"], "gamma_hz");
  if (root["dt_grid"]) c.dt_grid = double_list(root["dt_grid"], "dt_grid");
  if (root["n_grid"]) c.n_grid = int_list(root["n_grid"], "n_grid");
  if (root["noise"]) c.noise = parse_noise(root["noise"]);
  if (const auto s = root["strategy"]) {
    auto one = [&](const YAML::Node& e) {
      try {
        c.strategies.push_back(strategy_from_string(as<std::string>(e, "strategy")));
      } catch (const Error& err) {
        fail(e, err.what());
      }
    };
    if (s.IsSequence())
      for (const auto& e : s) one(e);
    else
      one(s);
  }
  if (root["horizon_s"]) c.horizon_s = as<double>(root["horizon_s"], "horizon_s");
  if (root["round_interval_s"]) c.round_interval_s = as<double>(root["round_interval_s"], "round_interval_s");
  if (root["cutoff"]) c.cutoff = as<int>(root["cutoff"], "cutoff");
  if (root["output_path"]) c.output_path = as<std::string>(root["output_path"], "output_path");
  if (root["fidelity_threshold"]) c.fidelity_threshold = as<double>(root["fidelity_threshold"], "fidelity_threshold");
  if (root["tail_tolerance"]) c.tail_tolerance = as<double>(root["tail_tolerance"], "tail_tolerance");
  if (root["level_grid_db"]) c.level_grid_db = double_list(root["level_grid_db"], "level_grid_db");
  if (root["qec_noise"]) c.qec_noise = as<bool>(root["qec_noise"], "qec_noise");
  if (root["noisy_readout_stride"]) c.noisy_readout_stride = as<int>(root["noisy_readout_stride"], "noisy_readout_stride");
  if (const auto st = root["states"]) {
    if (!st.IsSequence()) fail(st, "states must be a list of spec mappings");
    for (const auto& e : st) c.states.push_back(parse_spec(e, "states entry"));
  }
  if (const auto sc = root["schemes"]) {
    if (!sc.IsSequence()) fail(sc, "schemes must be a list");
    for (const auto& e : sc) c.schemes.push_back(parse_scheme(e));
  }
  if (root["storage_s"]) c.storage_s = as<double>(root["storage_s"], "storage_s");
  if (root["epsilon_grid"]) c.epsilon_grid = double_list(root["epsilon_grid"], "epsilon_grid");
  if (root["leakage_steps"]) c.leakage_steps = as<int>(root["leakage_steps"], "leakage_steps");
  if (root["alpha_grid"]) c.alpha_grid = double_list(root["alpha_grid"], "alpha_grid");
  if (root["r_grid"]) c.r_grid = double_list(root["r_grid"], "r_grid");
  validate_config(c);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const ScenarioConfig& c) {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::ConfigError, m); };
  if (c.cutoff < 2) bad("cutoff must be >= 2");
  if (!(c.gamma_hz > 0)) bad("gamma_hz must be positive");
  if (c.dt_grid.empty()) bad("dt_grid must be nonempty");
  for (double dt : c.dt_grid)
    if (!(dt > 0)) bad("dt_grid entries must be positive");
  for (int n : c.n_grid)
    if (n < 0) bad("n_grid entries must be >= 0");
  if (!(c.fidelity_threshold > 0 && c.fidelity_threshold < 1)) bad("fidelity_threshold must be in (0, 1)");
  if (!(c.tail_tolerance > 0)) bad("tail_tolerance must be positive");
  if (c.noisy_readout_stride < 1) bad("noisy_readout_stride must be >= 1");
  c.noise.to_model().validate();
  switch (c.scenario) {
    case ScenarioKind::Prepare:
    case ScenarioKind::Scan:
      if (c.n_grid.empty()) bad("n_grid must be nonempty");
      break;
    case ScenarioKind::Protect: {
      if (c.n_grid.empty()) bad("n_grid must be nonempty (depth per interleaved round)");
      if (!(c.horizon_s > 0) || !(c.round_interval_s > 0)) bad("protect needs positive horizon_s and round_interval_s");
      const double k = c.horizon_s / c.round_interval_s;
      if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) bad("horizon_s must be a multiple of round_interval_s");
      break;
    }
    case ScenarioKind::Leakage:
      if (std::count_if(c.epsilon_grid.begin(), c.epsilon_grid.end(), [](double x) { return x > 0; }) < 3)
        bad("leakage needs at least 3 positive epsilon values");
      if (c.leakage_steps < 1) bad("leakage_steps must be >= 1");
      break;
    default: break;
  }
  c.spec.to_spec();
  for (const auto& s : c.states) s.to_spec();
}

namespace {
void emit_spec(YAML::Emitter& e, const SpecConfig& s) {
  e << YAML::BeginMap;
  e << YAML::Key << "family" << YAML::Value << s.family;
  if (s.squeezing_db) e << YAML::Key << "squeezing_db" << YAML::Value << *s.squeezing_db;
  if (s.r) e << YAML::Key << "r" << YAML::Value << *s.r;
  if (s.trisqueezing_db) e << YAML::Key << "trisqueezing_db" << YAML::Value << *s.trisqueezing_db;
  if (s.xi) e << YAML::Key << "xi" << YAML::Value << *s.xi;
  if (s.family == "CPS") e << YAML::Key << "eta" << YAML::Value << s.eta;
  if (s.family == "CAT" || s.family == "SqCAT") {
    e << YAML::Key << "alpha" << YAML::Value << YAML::Flow << YAML::BeginSeq << s.alpha_re << s.alpha_im << YAML::EndSeq;
    e << YAML::Key << "sign" << YAML::Value << s.sign;
  }
  e << YAML::EndMap;
}

template <class T>
void emit_list(YAML::Emitter& e, const char* key, const std::vector<T>& v) {
  e << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& x : v) e << x;
  e << YAML::EndSeq;
}
}  // namespace

std::string serialize_config(const ScenarioConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "scenario" << YAML::Value << to_string(c.scenario);
  e << YAML::Key << "spec" << YAML::Value;
  emit_spec(e, c.spec);
  e << YAML::Key << "scheme" << YAML::Value << to_string(c.scheme);
  e << YAML::Key << "gamma_hz" << YAML::Value << c.gamma_hz;
  emit_list(e, "dt_grid", c.dt_grid);
  emit_list(e, "n_grid", c.n_grid);
  e << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "photon_loss_hz" << YAML::Value << c.noise.photon_loss_hz;
  e << YAML::Key << "dephasing_hz" << YAML::Value << c.noise.dephasing_hz;
  if (c.noise.qubit_T1_s) e << YAML::Key << "qubit_T1_s" << YAML::Value << *c.noise.qubit_T1_s;
  if (c.noise.qubit_T2_s) e << YAML::Key << "qubit_T2_s" << YAML::Value << *c.noise.qubit_T2_s;
  e << YAML::EndMap;
  if (!c.strategies.empty()) {
    e << YAML::Key << "strategy" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (auto s : c.strategies) e << to_string(s);
    e << YAML::EndSeq;
  }
  e << YAML::Key << "horizon_s" << YAML::Value << c.horizon_s;
  e << YAML::Key << "round_interval_s" << YAML::Value << c.round_interval_s;
  e << YAML::Key << "cutoff" << YAML::Value << c.cutoff;
  e << YAML::Key << "output_path" << YAML::Value << c.output_path;
  e << YAML::Key << "fidelity_threshold" << YAML::Value << c.fidelity_threshold;
  e << YAML::Key << "tail_tolerance" << YAML::Value << c.tail_tolerance;
  emit_list(e, "level_grid_db", c.level_grid_db);
  e << YAML::Key << "qec_noise" << YAML::Value << c.qec_noise;
  e << YAML::Key << "noisy_readout_stride" << YAML::Value << c.noisy_readout_stride;
  e << YAML::Key << "states" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : c.states) emit_spec(e, s);
  e << YAML::EndSeq;
  e << YAML::Key << "schemes" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto s : c.schemes) e << to_string(s);
  e << YAML::EndSeq;
  e << YAML::Key << "storage_s" << YAML::Value << c.storage_s;
  emit_list(e, "epsilon_grid", c.epsilon_grid);
  e << YAML::Key << "leakage_steps" << YAML::Value << c.leakage_steps;
  emit_list(e, "alpha_grid", c.alpha_grid);
  emit_list(e, "r_grid", c.r_grid);
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::string config_hash(const ScenarioConfig& cfg) {
  const std::string s = serialize_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace daqec
