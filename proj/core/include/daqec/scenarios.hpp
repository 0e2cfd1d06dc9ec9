#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "daqec/config.hpp"

namespace daqec {

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct ScenarioResult {
  std::vector<Table> tables;
  std::string summary_json;  // object; provenance keys are added on write
};

struct RunOptions {
  int threads = 1;
};

ScenarioResult run_prepare(const ScenarioConfig& cfg, const RunOptions& opt = {});
ScenarioResult run_protect(const ScenarioConfig& cfg, const RunOptions& opt = {});
ScenarioResult run_scan(const ScenarioConfig& cfg, const RunOptions& opt = {});
ScenarioResult run_leakage(const ScenarioConfig& cfg, const RunOptions& opt = {});
ScenarioResult run_decompose_check(const ScenarioConfig& cfg, const RunOptions& opt = {});
ScenarioResult run_depth_theory(const ScenarioConfig& cfg, const RunOptions& opt = {});
ScenarioResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {});

std::string table_to_csv(const Table& t, const std::string& hash);
// Writes <dir>/<table>.csv and <dir>/<scenario>_summary.json.
void write_result(const ScenarioResult& res, const ScenarioConfig& cfg, const std::string& dir);

// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace daqec
