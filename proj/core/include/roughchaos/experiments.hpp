#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "roughchaos/config.hpp"
#include "roughchaos/measures.hpp"

namespace roughchaos {

/// One measured value. Detail files carry exactly these fields minus
/// runtime_ms, which is wall-clock and goes to the separate timings file so
/// detail output stays byte-reproducible.
struct ResultRow {
  std::string experiment_id;
  int n = 0;
  int replication = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
  double runtime_ms = 0.0;
  bool aborted = false;

  bool operator==(const ResultRow& o) const {
    return experiment_id == o.experiment_id && n == o.n && replication == o.replication &&
           seed == o.seed && metric == o.metric &&
           (value == o.value || (value != value && o.value != o.value)) && aborted == o.aborted;
  }
};

struct SummaryRow {
  std::string metric;
  int n = 0;
  int count = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double log_n = 0.0;
  double log_mean = 0.0;
};

struct FitRow {
  std::string metric;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct ExperimentOutput {
  std::string experiment_id;
  std::vector<ResultRow> detail;
  std::vector<SummaryRow> summary;
  std::vector<FitRow> fits;
  int aborted_count = 0;
  int task_count = 0;

  double aborted_fraction() const {
    return task_count == 0 ? 0.0 : static_cast<double>(aborted_count) / task_count;
  }
};

/// Algebraic diagnostics per (n, replication): max Chen and
/// integration-by-parts residuals, per-particle local accumulation at the
/// configured threshold, and the count of empirical-control superadditivity
/// violations (must be zero).
ExperimentOutput run_diagnose(const ExperimentConfig& config);

/// i.i.d. rate check: W_1 of an n-sample to the true law (d = 1, exact
/// quantile integration) or to an n_ref reference cloud (d >= 2, averaged
/// equal-size blocks), with the fitted log-log slope.
ExperimentOutput run_iid_rate(const ExperimentConfig& config);

/// Propagation-of-chaos rate: for each n and replication, solve the particle
/// system with the compensated scheme and measure sup_t d_1(mu^n_t, muhat_t)
/// against the frozen reference flow of an independent n_ref system (shared
/// across the ns of one replication).
ExperimentOutput run_chaos_rate(const ExperimentConfig& config);

/// Coupling gaps: companions share the particle's own noise but read the
/// frozen reference flow; reports per-replication mean/max particle gaps,
/// sup_t d_1(mu^n, mubar^n), and the cross-replication sup_i mean gap.
ExperimentOutput run_coupling(const ExperimentConfig& config);

/// Writes detail, summary, fit and plot files (CSV or JSON per config) plus
/// the non-deterministic timings sidecar. Returns the detail file path.
std::string emit(const ExperimentOutput& output, const ExperimentConfig& config);

std::vector<ResultRow> parse_detail_csv(const std::string& path);
std::vector<ResultRow> parse_detail_json(const std::string& path);

/// Full run: dispatch, emit, map aborts to the exit code contract
/// (0 ok, 2 config error, 3 when more than 5% of replications aborted).
int run_experiment(const ExperimentConfig& config);

}  // namespace roughchaos
