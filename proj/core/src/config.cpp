#include "roughchaos/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace roughchaos {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + value + "'");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("bad boolean value for " + key + ": '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream stream(value);
  std::string token;
  while (std::getline(stream, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    out.push_back(static_cast<int>(parse_int(key, token)));
  }
  if (out.empty()) throw ConfigError("empty list for " + key);
  return out;
}

const std::set<std::string> kExperiments = {"diagnose", "iid-rate", "chaos-rate", "coupling"};

}  // namespace

void ExperimentConfig::validate() const {
  if (!kExperiments.count(experiment)) throw ConfigError("unknown experiment: " + experiment);
  try {
    grid.validate();
    driver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (state_dim < 1) throw ConfigError("state.dim must be >= 1");
  if (ns.empty()) throw ConfigError("ns must be non-empty");
  if (!std::is_sorted(ns.begin(), ns.end())) throw ConfigError("ns must be sorted ascending");
  if (ns.front() < 1) throw ConfigError("ns entries must be >= 1");
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (n_ref < 1) throw ConfigError("n_ref must be >= 1");
  if ((experiment == "chaos-rate" || experiment == "coupling") && n_ref < 4 * ns.back()) {
    throw ConfigError("n_ref must be at least 4 * max(ns) for chaos-rate/coupling");
  }
  if (!(p >= 2.0 && p < 3.0)) throw ConfigError("analytics.p must lie in [2, 3)");
  if (q < 1.0) throw ConfigError("analytics.q must be >= 1");
  if (!(alpha > 0.0)) throw ConfigError("analytics.alpha must be positive");
  if (coefficient_name != "moment_tanh" && coefficient_name != "conv_tanh") {
    throw ConfigError("coefficient.name must be moment_tanh or conv_tanh");
  }
  if (law != "normal" && law != "uniform") throw ConfigError("law must be normal or uniform");
  if (x0_kind != "normal" && x0_kind != "zero") throw ConfigError("x0.kind must be normal or zero");
  if (format != "csv" && format != "json") throw ConfigError("output.format must be csv or json");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  if (block_cap < 1) throw ConfigError("block_cap must be >= 1");
  if (experiment == "iid-rate" && state_dim > 3) {
    throw ConfigError("iid-rate supports state.dim in {1, 2, 3}");
  }
  if ((experiment == "chaos-rate" || experiment == "coupling") &&
      (state_dim != 1 || grid.dim != 1)) {
    throw ConfigError("chaos-rate/coupling are wired for d = m = 1 configurations");
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::stringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");
    }

    if (key == "experiment") {
      config.experiment = value;
      config.experiment_set = true;
    } else if (key == "driver.kind") {
      if (value == "brownian") {
        config.driver = DriverKind::brownian();
      } else if (value == "fbm") {
        config.driver = DriverKind::fbm(config.driver.hurst_index);
      } else {
        throw ConfigError("driver.kind must be brownian or fbm");
      }
    } else if (key == "driver.hurst") {
      config.driver.hurst_index = parse_double(key, value);
    } else if (key == "grid.horizon") {
      config.grid.horizon = parse_double(key, value);
    } else if (key == "grid.steps") {
      config.grid.steps = static_cast<int>(parse_int(key, value));
    } else if (key == "grid.dim") {
      config.grid.dim = static_cast<int>(parse_int(key, value));
    } else if (key == "coefficient.name") {
      config.coefficient_name = value;
    } else if (key == "coefficient.a") {
      config.coefficient_a = parse_double(key, value);
    } else if (key == "coefficient.b") {
      config.coefficient_b = parse_double(key, value);
    } else if (key == "state.dim") {
      config.state_dim = static_cast<int>(parse_int(key, value));
    } else if (key == "ns") {
      config.ns = parse_int_list(key, value);
    } else if (key == "replications") {
      config.replications = static_cast<int>(parse_int(key, value));
    } else if (key == "n_ref") {
      config.n_ref = static_cast<int>(parse_int(key, value));
    } else if (key == "seed") {
      config.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "analytics.p") {
      config.p = parse_double(key, value);
    } else if (key == "analytics.q") {
      config.q = parse_double(key, value);
    } else if (key == "analytics.alpha") {
      config.alpha = parse_double(key, value);
    } else if (key == "law") {
      config.law = value;
    } else if (key == "x0.kind") {
      config.x0_kind = value;
    } else if (key == "x0.scale") {
      config.x0_scale = parse_double(key, value);
    } else if (key == "output.dir") {
      config.output_dir = value;
    } else if (key == "output.format") {
      config.format = value;
    } else if (key == "workers") {
      config.workers = static_cast<int>(parse_int(key, value));
    } else if (key == "block_cap") {
      config.block_cap = static_cast<int>(parse_int(key, value));
    } else if (key == "fit.log_correction") {
      config.log_correction = parse_bool(key, value);
      config.log_correction_set = true;
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

int resolve_workers(const ExperimentConfig& config, int cli_workers) {
  if (cli_workers > 0) return cli_workers;
  if (const char* env = std::getenv("ROUGH_CHAOS_WORKERS")) {
    try {
      const int value = std::stoi(env);
      if (value > 0) return value;
    } catch (const std::exception&) {
      throw ConfigError("ROUGH_CHAOS_WORKERS must be a positive integer");
    }
  }
  return config.workers;
}

}  // namespace roughchaos
