#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "roughchaos/grid.hpp"

namespace roughchaos {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Batch experiment configuration. Parsed from flat key-value text with
/// dotted keys (grid.steps = 256); unknown keys are an error.
struct ExperimentConfig {
  std::string experiment = "diagnose";  // diagnose | iid-rate | chaos-rate | coupling
  bool experiment_set = false;          // true when the config file named it

  DriverKind driver = DriverKind::brownian();
  GridSpec grid{1.0, 256, 1};

  std::string coefficient_name = "moment_tanh";
  double coefficient_a = 0.5;
  double coefficient_b = 0.5;

  int state_dim = 1;  // d

  std::vector<int> ns = {16, 32, 64, 128, 256, 512};
  int replications = 64;
  int n_ref = 4096;
  std::uint64_t seed = 1;

  double p = 2.5;
  double q = 8.0;
  double alpha = 1.0;

  std::string law = "normal";  // iid-rate sampling law: normal | uniform
  std::string x0_kind = "normal";  // normal | zero
  double x0_scale = 1.0;

  std::string output_dir = "out";
  std::string format = "csv";  // csv | json

  int workers = 0;    // 0: hardware concurrency
  int block_cap = 4;  // max equal-size blocks for d >= 2 reference distances

  bool log_correction = false;
  bool log_correction_set = false;  // default: on exactly when d == 2

  void validate() const;
  bool use_log_correction() const {
    return log_correction_set ? log_correction : state_dim == 2;
  }
};

/// Parses a config file; keys not listed in the schema are an error.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Worker-count resolution order: explicit CLI flag, then the
/// ROUGH_CHAOS_WORKERS environment variable, then the config value.
int resolve_workers(const ExperimentConfig& config, int cli_workers);

}  // namespace roughchaos
