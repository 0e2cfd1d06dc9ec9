// daqec: batch scenario runner. One subcommand per scenario kind.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "daqec/error.hpp"
#include "daqec/scenarios.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

bool is_config_error(daqec::ErrorKind k) {
  using K = daqec::ErrorKind;
  return k == K::ConfigError || k == K::SpecError || k == K::InvalidCutoff || k == K::NegativeRate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Digital autonomous QEC scenario runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", daqec::library_version());

  std::string config_path, out_dir;
  int cutoff_override = 0, threads = 1;
  for (const char* name : {"prepare", "protect", "scan", "leakage", "decompose-check", "depth-theory"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " scenario");
    sub->add_option("--config", config_path, "YAML scenario config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (default: output_path from the config)");
    sub->add_option("--cutoff-override", cutoff_override, "replace the Fock cutoff D")->check(CLI::PositiveNumber);
    sub->add_option("--threads", threads, "worker threads for grid points")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  daqec::ScenarioConfig cfg;
  try {
    cfg = daqec::load_config(config_path);
    if (cutoff_override > 0) cfg.cutoff = cutoff_override;
    if (daqec::to_string(cfg.scenario) != sub)
      throw daqec::Error(daqec::ErrorKind::ConfigError,
                         "config describes scenario '" + std::string(daqec::to_string(cfg.scenario)) +
                             "' but subcommand is '" + sub + "'");
    daqec::validate_config(cfg);
  } catch (const daqec::Error& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return kConfigError;
  }

  try {
    const auto res = daqec::run_scenario(cfg, {threads});
    const std::string dir = out_dir.empty() ? cfg.output_path : out_dir;
    daqec::write_result(res, cfg, dir);
    std::cout << res.summary_json << "\n";
  } catch (const daqec::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_config_error(e.kind()) ? kConfigError : kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericError;
  }
  return 0;
}
