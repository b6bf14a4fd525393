#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "roughchaos/config.hpp"
#include "roughchaos/experiments.hpp"

using namespace roughchaos;

namespace {

namespace fs = std::filesystem;

std::string small_chaos_config(const std::string& out_dir, int workers) {
  std::ostringstream text;
  text << "experiment = chaos-rate\n"
       << "driver.kind = brownian\n"
       << "grid.horizon = 1.0\n"
       << "grid.steps = 16\n"
       << "grid.dim = 1\n"
       << "coefficient.name = moment_tanh\n"
       << "coefficient.a = 0.5\n"
       << "coefficient.b = 0.5\n"
       << "ns = 4, 8\n"
       << "replications = 4\n"
       << "n_ref = 32\n"
       << "seed = 11\n"
       << "workers = " << workers << "\n"
       << "output.dir = " << out_dir << "\n";
  return text.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing: round trip of keys and defaults") {
  const auto config = parse_config_text(
      "experiment = iid-rate\n"
      "# a comment\n"
      "grid.steps = 64   # trailing comment\n"
      "driver.kind = fbm\n"
      "driver.hurst = 0.4\n"
      "ns = 16,32,64\n"
      "state.dim = 1\n"
      "seed = 99\n");
  CHECK(config.experiment == "iid-rate");
  CHECK(config.grid.steps == 64);
  CHECK(config.driver.type == DriverKind::Type::fbm);
  CHECK(config.driver.hurst_index == 0.4);
  CHECK(config.ns == std::vector<int>{16, 32, 64});
  CHECK(config.seed == 99);
  CHECK_NOTHROW(config.validate());
}

TEST_CASE("config rejects unknown keys, bad values and broken invariants") {
  CHECK_THROWS_AS(parse_config_text("grid.stepz = 64\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("grid.steps = sixty\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("grid.steps\n"), ConfigError);

  auto unsorted = parse_config_text("experiment = iid-rate\nns = 64,16\n");
  CHECK_THROWS_AS(unsorted.validate(), ConfigError);

  auto small_ref = parse_config_text(
      "experiment = chaos-rate\nns = 16,32\nn_ref = 64\nreplications = 2\n");
  CHECK_THROWS_AS(small_ref.validate(), ConfigError);

  auto bad_hurst = parse_config_text("driver.kind = fbm\ndriver.hurst = 0.2\n");
  CHECK_THROWS_AS(bad_hurst.validate(), ConfigError);
}

TEST_CASE("detail files round-trip through CSV and JSON") {
  const fs::path dir = temp_dir("roughchaos_roundtrip");
  ExperimentConfig config = parse_config_text(small_chaos_config(dir.string(), 1));
  config.grid.steps = 8;
  config.replications = 2;
  config.validate();

  for (const std::string format : {"csv", "json"}) {
    config.format = format;
    const auto output = run_chaos_rate(config);
    const std::string path = emit(output, config);
    const auto rows =
        format == "csv" ? parse_detail_csv(path) : parse_detail_json(path);
    REQUIRE(rows.size() == output.detail.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i] == output.detail[i]);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("empty detail emits a header-only CSV") {
  const fs::path dir = temp_dir("roughchaos_empty");
  ExperimentConfig config;
  config.experiment = "diagnose";
  config.output_dir = dir.string();
  ExperimentOutput output;
  output.experiment_id = "diagnose";
  const std::string path = emit(output, config);
  CHECK(read_file(path) == "experiment,n,replication,seed,metric,value,aborted\n");
  CHECK(parse_detail_csv(path).empty());
  fs::remove_all(dir);
}

TEST_CASE("summary means equal a recomputation from the detail file") {
  const fs::path dir = temp_dir("roughchaos_summary");
  ExperimentConfig config = parse_config_text(small_chaos_config(dir.string(), 1));
  config.validate();
  const auto output = run_chaos_rate(config);
  const std::string path = emit(output, config);
  const auto rows = parse_detail_csv(path);

  std::map<std::pair<std::string, int>, std::pair<double, int>> recomputed;
  for (const auto& row : rows) {
    if (row.aborted) continue;
    auto& [sum, count] = recomputed[{row.metric, row.n}];
    sum += row.value;
    ++count;
  }
  for (const auto& summary : output.summary) {
    const auto it = recomputed.find({summary.metric, summary.n});
    REQUIRE(it != recomputed.end());
    CHECK(summary.mean ==
          doctest::Approx(it->second.first / it->second.second).epsilon(1e-12));
    CHECK(summary.count == it->second.second);
  }
  fs::remove_all(dir);
}

TEST_CASE("detail output is byte-identical across worker counts") {
  const fs::path dir1 = temp_dir("roughchaos_w1");
  const fs::path dir2 = temp_dir("roughchaos_w2");
  ExperimentConfig one = parse_config_text(small_chaos_config(dir1.string(), 1));
  ExperimentConfig four = parse_config_text(small_chaos_config(dir2.string(), 4));
  one.validate();
  four.validate();
  const auto out1 = run_chaos_rate(one);
  const auto out4 = run_chaos_rate(four);
  const std::string path1 = emit(out1, one);
  const std::string path4 = emit(out4, four);
  CHECK(read_file(path1) == read_file(path4));
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("extending replications preserves earlier rows") {
  const fs::path dir = temp_dir("roughchaos_ext");
  ExperimentConfig short_run = parse_config_text(small_chaos_config(dir.string(), 1));
  short_run.replications = 2;
  short_run.validate();
  ExperimentConfig long_run = parse_config_text(small_chaos_config(dir.string(), 1));
  long_run.replications = 4;
  long_run.validate();

  const auto a = run_chaos_rate(short_run);
  const auto b = run_chaos_rate(long_run);
  // Replication-major row order: the measured rows of the short run are a
  // prefix of the long run (fit-error rows appended at the end are skipped).
  auto measured = [](const ExperimentOutput& out) {
    std::vector<ResultRow> rows;
    for (const auto& row : out.detail) {
      if (row.metric.rfind("fit_error:", 0) != 0) rows.push_back(row);
    }
    return rows;
  };
  const auto rows_a = measured(a);
  const auto rows_b = measured(b);
  REQUIRE(rows_a.size() <= rows_b.size());
  for (std::size_t i = 0; i < rows_a.size(); ++i) {
    CHECK(rows_a[i] == rows_b[i]);
  }
  fs::remove_all(dir);
}

TEST_CASE("iid-rate d=1: slope near -1/2 on a small run") {
  ExperimentConfig config;
  config.experiment = "iid-rate";
  config.state_dim = 1;
  config.law = "normal";
  config.ns = {16, 32, 64, 128, 256};
  config.replications = 48;
  config.seed = 5;
  config.workers = 2;
  config.validate();
  const auto output = run_iid_rate(config);
  REQUIRE(output.fits.size() == 1);
  CHECK(output.fits[0].slope < -0.35);
  CHECK(output.fits[0].slope > -0.65);
}

TEST_CASE("iid-rate refuses a fit on fewer than 3 points") {
  ExperimentConfig config;
  config.experiment = "iid-rate";
  config.ns = {16, 32};
  config.replications = 1;
  config.validate();
  const auto output = run_iid_rate(config);
  CHECK(output.fits.empty());
  bool has_error_row = false;
  for (const auto& row : output.detail) {
    if (row.metric.rfind("fit_error:", 0) == 0 && row.aborted) has_error_row = true;
  }
  CHECK(has_error_row);
}

TEST_CASE("iid-rate d=2 uses the reference cloud and the log correction") {
  ExperimentConfig config;
  config.experiment = "iid-rate";
  config.state_dim = 2;
  config.law = "uniform";
  config.ns = {8, 16, 32};
  config.replications = 8;
  config.n_ref = 128;
  config.block_cap = 2;
  config.seed = 17;
  config.validate();
  CHECK(config.use_log_correction());  // auto at d == 2
  const auto output = run_iid_rate(config);
  REQUIRE(output.fits.size() == 1);
  CHECK(output.fits[0].metric == "w1_vs_ref");
  CHECK(output.fits[0].slope < 0.0);
}

TEST_CASE("diagnose: residuals tiny, controls superadditive, n = 1 works") {
  ExperimentConfig config;
  config.experiment = "diagnose";
  config.grid = GridSpec{1.0, 16, 2};
  config.ns = {1, 4};
  config.replications = 2;
  config.seed = 23;
  config.validate();
  const auto output = run_diagnose(config);

  for (const auto& row : output.detail) {
    if (row.metric == "chen_residual_max" || row.metric == "ibp_residual_max") {
      CHECK(row.value < 1e-10);
    }
    if (row.metric == "control_superadditivity_violations") {
      CHECK(row.value == 0.0);
    }
    if (row.metric == "local_accumulation") {
      CHECK(row.value >= 0.0);
    }
  }
}

TEST_CASE("diagnose with a huge threshold counts no accumulation") {
  ExperimentConfig config;
  config.experiment = "diagnose";
  config.grid = GridSpec{1.0, 8, 1};
  config.ns = {2};
  config.replications = 1;
  config.alpha = 1e9;
  config.validate();
  const auto output = run_diagnose(config);
  for (const auto& row : output.detail) {
    if (row.metric == "local_accumulation") CHECK(row.value == 0.0);
  }
}

TEST_CASE("coupling run produces gap metrics and fits") {
  ExperimentConfig config = parse_config_text(small_chaos_config("placeholder", 2));
  config.experiment = "coupling";
  config.experiment_set = false;
  config.ns = {4, 8, 16};  // three points so the fits are defined
  config.n_ref = 64;
  config.output_dir = temp_dir("roughchaos_coupling").string();
  config.validate();
  const auto output = run_coupling(config);

  bool has_gap = false, has_w1 = false, has_sup = false;
  for (const auto& row : output.summary) {
    if (row.metric == "gap_mean") has_gap = true;
    if (row.metric == "w1_mu_mubar_sup_t") has_w1 = true;
    if (row.metric == "sup_i_mean_gap") has_sup = true;
  }
  CHECK(has_gap);
  CHECK(has_w1);
  CHECK(has_sup);
  CHECK(output.fits.size() == 3);
  fs::remove_all(config.output_dir);
}

TEST_CASE("workers resolution: flag beats environment beats config") {
  ExperimentConfig config;
  config.workers = 3;
  CHECK(resolve_workers(config, 0) == 3);
  setenv("ROUGH_CHAOS_WORKERS", "5", 1);
  CHECK(resolve_workers(config, 0) == 5);
  CHECK(resolve_workers(config, 7) == 7);
  unsetenv("ROUGH_CHAOS_WORKERS");
  CHECK(resolve_workers(config, 0) == 3);
}

TEST_CASE("F = 0 chaos-rate reduces to the static i.i.d. rate") {
  ExperimentConfig config;
  config.experiment = "chaos-rate";
  config.grid = GridSpec{1.0, 8, 1};
  config.coefficient_name = "moment_tanh";
  config.coefficient_a = 0.0;
  config.coefficient_b = 0.0;  // F == 0: trajectories stay at X0
  config.ns = {8, 16, 32, 64};
  config.replications = 32;
  config.n_ref = 256;
  config.seed = 31;
  config.workers = 2;
  config.validate();
  const auto output = run_chaos_rate(config);
  REQUIRE(output.fits.size() == 1);
  CHECK(output.fits[0].slope < -0.3);
  CHECK(output.fits[0].slope > -0.75);
}

TEST_CASE("quadrupling replications halves the standard error (CLT sanity)") {
  auto run_with = [](int reps) {
    ExperimentConfig config;
    config.experiment = "chaos-rate";
    config.grid = GridSpec{1.0, 16, 1};
    config.ns = {8, 16, 32};
    config.replications = reps;
    config.n_ref = 128;
    config.seed = 37;
    config.workers = 2;
    config.validate();
    return run_chaos_rate(config);
  };
  const auto small = run_with(32);
  const auto large = run_with(128);
  auto std_error_at = [](const ExperimentOutput& out, int n) {
    for (const auto& row : out.summary) {
      if (row.metric == "w1_sup_t" && row.n == n) return row.std_error;
    }
    return -1.0;
  };
  double mean_ratio = 0.0;
  for (int n : {8, 16, 32}) {
    mean_ratio += std_error_at(large, n) / std_error_at(small, n) / 3.0;
  }
  // Quadrupling should halve the standard error; the estimate of the ratio
  // itself carries noise, so the band is 0.5 +/- 30%.
  CHECK(mean_ratio > 0.35);
  CHECK(mean_ratio < 0.65);
}
