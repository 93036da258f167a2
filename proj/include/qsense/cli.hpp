#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsense/attack.hpp"
#include "qsense/device.hpp"

namespace qsense {

// One experiment description. Values resolve with precedence
// flags > config file > these defaults.
struct ExperimentConfig {
  std::string device = "linear5";  // preset name or calibration file path
  std::vector<int> victims = {0};
  int adversary = 1;
  uint64_t shots = 8192;
  uint64_t repetitions = 37;
  uint64_t n_tests = 200;
  DepthRange rb_depth{1, 10};
  uint64_t seed = 1;
  bool defense = true;
  std::string out = "qsense_out";  // never embedded in result files

  // Applies the file's keys over the current values; unknown keys rejected.
  void apply_json(const nlohmann::json& j);
  // Canonical form embedded into every result file (excludes `out`).
  nlohmann::json to_json() const;
  void validate(const DeviceModel& device_model) const;
};

// Preset name or calibration file path -> validated model.
DeviceModel resolve_device(const std::string& name_or_path);

// Subcommand bodies; each writes its result files under config.out and
// returns a process exit code. All randomness flows from config.seed via
// labeled substreams, so e.g. changing n_tests never perturbs reference
// collection.
int cmd_collect(const ExperimentConfig& config);
int cmd_attack(const ExperimentConfig& config);
int cmd_defend(const ExperimentConfig& config);
int cmd_report(const ExperimentConfig& config);

// argv-style entry point (program name excluded). Maps errors to exit
// codes: 0 success, 2 bad configuration, 3 data mismatch, 4 anything else.
int run_cli(const std::vector<std::string>& args);

}  // namespace qsense
