// rough-chaos: batch driver for the mean-field rough-path experiments.
//
// Usage:
//   rough-chaos <diagnose|iid-rate|chaos-rate|coupling> --config <file>
//               [--seed N] [--workers N] [--out DIR] [--format csv|json]
//
// Exit codes: 0 success, 2 configuration error, 3 when more than 5% of the
// replications aborted. The ROUGH_CHAOS_WORKERS environment variable
// overrides the config worker count; --workers overrides both.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "roughchaos/config.hpp"
#include "roughchaos/experiments.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::string format;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
};

int run(const std::string& experiment, const CommonOptions& options) {
  roughchaos::ExperimentConfig config;
  if (!options.config_path.empty()) {
    config = roughchaos::parse_config_file(options.config_path);
  }
  // A config written for one experiment must not silently run another.
  if (config.experiment_set && config.experiment != experiment) {
    throw roughchaos::ConfigError("config names experiment '" + config.experiment +
                                  "' but the subcommand is '" + experiment + "'");
  }
  config.experiment = experiment;
  if (options.seed_set) config.seed = options.seed;
  if (!options.out_dir.empty()) config.output_dir = options.out_dir;
  if (!options.format.empty()) config.format = options.format;
  config.workers = roughchaos::resolve_workers(config, options.workers);
  config.validate();
  return roughchaos::run_experiment(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field rough differential equation experiments"};
  app.require_subcommand(1);

  CommonOptions options;
  const std::vector<std::string> names = {"diagnose", "iid-rate", "chaos-rate", "coupling"};
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", options.config_path, "experiment config file");
    sub->add_option("--seed", options.seed, "override the master seed")
        ->each([&options](const std::string&) { options.seed_set = true; });
    sub->add_option("--workers", options.workers, "worker thread count");
    sub->add_option("--out", options.out_dir, "output directory");
    sub->add_option("--format", options.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (const std::string& name : names) {
      if (app.got_subcommand(name)) return run(name, options);
    }
  } catch (const roughchaos::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
