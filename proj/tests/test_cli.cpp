#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "daqec/analysis.hpp"
#include "daqec/error.hpp"
#include "daqec/scenarios.hpp"

using namespace daqec;
namespace fs = std::filesystem;

namespace {
const char* kPrepare = R"(# comment lines are fine
scenario: prepare
spec:
  family: SqVac
  squeezing_db: 3   # natural units computed at load
scheme: sBs
gamma_hz: 1.0e7
dt_grid: [2.0e-8, 4.0e-8]
n_grid: {from: 1, to: 6}
noise:
  photon_loss_hz: 5.0e3
  qubit_T1_s: 1.0e-4
  qubit_T2_s: 1.0e-4
cutoff: 14
tail_tolerance: 1.0e-4
)";

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    return e.what();
  }
  return "";
}
}  // namespace

TEST(Config, RoundTrip) {
  const ScenarioConfig c = parse_config(kPrepare);
  EXPECT_EQ(c.n_grid.size(), 6u);
  EXPECT_NEAR(c.spec.to_spec().r, db_to_natural(3.0), 1e-15);
  const std::string s = serialize_config(c);
  const ScenarioConfig back = parse_config(s);
  EXPECT_EQ(back, c);
  EXPECT_EQ(serialize_config(back), s);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
}

TEST(Config, RoundTripAllScenarioShapes) {
  for (const char* name : {"cps_prepare", "cps_levels", "cat_dephasing", "sqcat_dephasing",
                           "loss_cps_protect", "loss_tss_protect", "sqcat_leakage", "leakage_rate_grid", "scan_states",
                           "depth_theory_cps", "decompose_sqcat"}) {
    const ScenarioConfig c = load_config(std::string(DAQEC_CONFIG_DIR) + "/" + name + ".yaml");
    EXPECT_EQ(parse_config(serialize_config(c)), c) << name;
  }
}

TEST(Config, LinePreciseErrors) {
  std::string bad = kPrepare;
  bad.replace(bad.find("cutoff: 14"), 10, "cutof: 14");
  EXPECT_NE(error_of(bad).find("line 14"), std::string::npos) << error_of(bad);
  std::string fam = kPrepare;
  fam.replace(fam.find("SqVac"), 5, "GKP");
  EXPECT_NE(error_of(fam).find("line 4"), std::string::npos) << error_of(fam);
  std::string extra = kPrepare;
  extra.replace(extra.find("squeezing_db: 3"), 15, "squeezing_db: 3\n  eta: 0.2");
  EXPECT_NE(error_of(extra).find("line 6"), std::string::npos) << error_of(extra);
  EXPECT_NE(error_of("scenario: prepare\ndt_grid: []\nn_grid: [1]\n").find("dt_grid"), std::string::npos);
  EXPECT_NE(error_of("scenario: protect\ndt_grid: [1e-8]\nn_grid: [1]\nhorizon_s: 1e-4\nround_interval_s: 3e-5\n")
                .find("multiple"),
            std::string::npos);
  EXPECT_NE(error_of("scenario: [1, 2\n").find("line"), std::string::npos);
}

TEST(Cli, PrepareTableShape) {
  const ScenarioConfig c = parse_config(kPrepare);
  const ScenarioResult r = run_prepare(c);
  ASSERT_EQ(r.tables.size(), 1u);
  const Table& t = r.tables[0];
  EXPECT_EQ(t.rows.size(), 2u * 7u);
  // N = 0 row: vacuum against the target
  const NullifierSpec s = c.spec.to_spec();
  const Vec target = build_state_vector(s, c.cutoff, {1e-4, 0});
  EXPECT_EQ(std::get<long long>(t.rows[0][2]), 0);
  EXPECT_NEAR(std::get<double>(t.rows[0][3]), std::abs(target(0)), 1e-14);
  // noisy column present and close to noiseless at these rates
  for (const auto& row : t.rows) EXPECT_LT(std::abs(std::get<double>(row[3]) - std::get<double>(row[4])), 0.02);
}

TEST(Cli, ProtectStartsAtOne) {
  ScenarioConfig c;
  c.scenario = ScenarioKind::Protect;
  c.spec.family = "CAT";
  c.spec.alpha_re = 1.5;
  c.spec.sign = -1;
  c.scheme = Scheme::BsB;
  c.dt_grid = {1e-8};
  c.n_grid = {1};
  c.noise.dephasing_hz = 5e3;
  c.horizon_s = 4e-5;
  c.round_interval_s = 1e-5;
  c.cutoff = 24;
  c.tail_tolerance = 1e-4;
  c.qec_noise = false;
  const ScenarioResult r = run_protect(c);
  int zero_rows = 0;
  for (const auto& row : r.tables[0].rows)
    if (std::get<double>(row[0]) == 0.0) {
      ++zero_rows;
      EXPECT_NEAR(std::get<double>(row[3]), 1.0, 1e-12);
    }
  EXPECT_EQ(zero_rows, 3);
  EXPECT_EQ(r.tables[0].rows.size(), 15u);
}

TEST(Cli, SingleCellScanIsOneRow) {
  ScenarioConfig c;
  c.scenario = ScenarioKind::Scan;
  c.spec.family = "SqVac";
  c.spec.r = 0.3;
  c.dt_grid = {3e-8};
  c.n_grid = {4};
  c.cutoff = 16;
  const ScenarioResult r = run_scan(c);
  ASSERT_EQ(r.tables.size(), 1u);
  EXPECT_EQ(r.tables[0].rows.size(), 1u);
}

TEST(Cli, LeakageZeroEpsilonIsNoiseFree) {
  ScenarioConfig c;
  c.scenario = ScenarioKind::Leakage;
  c.spec.family = "SqCAT";
  c.spec.alpha_re = 1.0;
  c.spec.r = 0.5;
  c.dt_grid = {1.3e-8};
  c.epsilon_grid = {0.0, 0.005, 0.01, 0.02};
  c.schemes = {Scheme::BsB};
  c.leakage_steps = 30;
  c.cutoff = 24;
  c.tail_tolerance = 1e-4;
  const ScenarioResult r = run_leakage(c);
  const NullifierSpec s = c.spec.to_spec();
  const Vec plus = build_state_vector(s, 24, {1e-4, 0});
  const auto traj = run_protocol(plus * plus.adjoint(), s, Scheme::BsB, 30, 0.13);
  const double w0 = leakage(traj.back(), code_projector(s, 24, {1e-4, 0}));
  EXPECT_NEAR(std::get<double>(r.tables[0].rows[0][2]), w0, 1e-12);
  const auto j = nlohmann::json::parse(r.summary_json);
  EXPECT_TRUE(j.contains("A_perturbative"));
}

TEST(Cli, DeterministicOutputWithProvenance) {
  ScenarioConfig c = parse_config(kPrepare);
  c.qec_noise = false;
  const fs::path d1 = fs::temp_directory_path() / "daqec_det_1", d2 = fs::temp_directory_path() / "daqec_det_2";
  write_result(run_scenario(c, {1}), c, d1.string());
  write_result(run_scenario(c, {2}), c, d2.string());
  const std::string a = slurp(d1 / "prepare.csv"), b = slurp(d2 / "prepare.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  EXPECT_EQ(slurp(d1 / "prepare_summary.json"), slurp(d2 / "prepare_summary.json"));
  std::istringstream lines(a);
  std::string header, row;
  std::getline(lines, header);
  EXPECT_NE(header.find("config_hash,version"), std::string::npos);
  while (std::getline(lines, row)) EXPECT_NE(row.find(config_hash(c) + "," + library_version()), std::string::npos);
}

TEST(Cli, CsvNumbersRoundTrip) {
  Table t{"t", {"v"}, {{0.1}, {1.0 / 3.0}}};
  const std::string csv = table_to_csv(t, "h");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(std::stod(line.substr(0, line.find(','))), 0.1);
  std::getline(in, line);
  EXPECT_EQ(std::stod(line.substr(0, line.find(','))), 1.0 / 3.0);
}

#ifdef DAQEC_CLI_PATH
TEST(Cli, ExitCodes) {
  const fs::path dir = fs::temp_directory_path() / "daqec_cli";
  fs::create_directories(dir);
  auto run = [&](const std::string& args) {
    const int rc = std::system((std::string(DAQEC_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
  };
  std::ofstream(dir / "bad.yaml") << "scenario: prepare\ndt_grid: [1e-8]\nn_grid: [1]\nbogus: 1\n";
  std::ofstream(dir / "ok.yaml") << "scenario: depth-theory\nspec: {family: SqVac, r: 0.4}\ndt_grid: [1e-8]\ncutoff: 12\n";
  std::ofstream(dir / "tiny.yaml") << "scenario: prepare\nspec: {family: CAT, alpha: 4}\ndt_grid: [1e-8]\nn_grid: [1]\ncutoff: 10\n";
  EXPECT_EQ(run("depth-theory --config " + (dir / "ok.yaml").string() + " --out " + (dir / "o").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "o" / "depth_theory.csv"));
  EXPECT_EQ(run("prepare --config " + (dir / "bad.yaml").string()), 2);
  EXPECT_EQ(run("prepare --config " + (dir / "ok.yaml").string()), 2);  // scenario mismatch
  EXPECT_EQ(run("prepare --config " + (dir / "tiny.yaml").string() + " --out " + (dir / "t").string()), 3);
  EXPECT_EQ(run("depth-theory --config " + (dir / "ok.yaml").string() + " --cutoff-override 1"), 2);
}
#endif
