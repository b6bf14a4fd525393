#include "roughchaos/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "roughchaos/coefficients.hpp"
#include "roughchaos/csv.hpp"
#include "roughchaos/gaussian_driver.hpp"
#include "roughchaos/rng.hpp"
#include "roughchaos/rough_lift.hpp"
#include "roughchaos/solver.hpp"
#include "roughchaos/variation.hpp"

namespace roughchaos {

namespace {

namespace fs = std::filesystem;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

enum Purpose : std::uint64_t {
  kPaths = 1,
  kX0 = 2,
  kRefPaths = 3,
  kRefX0 = 4,
  kCloud = 5,
  kRefCloud = 6,
  kProbe = 7,
};

std::uint64_t task_seed(const ExperimentConfig& config, Purpose purpose, int n, int replication) {
  return derive_seed({config.seed, fnv1a(config.experiment), static_cast<std::uint64_t>(purpose),
                      static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(replication)});
}

std::vector<double> draw_x0(std::uint64_t seed, int n, int d, const std::string& kind,
                            double scale) {
  std::vector<double> x0(static_cast<std::size_t>(n) * d, 0.0);
  if (kind == "normal") {
    RandomStream stream(seed, 0);
    for (double& v : x0) v = scale * stream.next_normal();
  }
  return x0;
}

/// Runs task(0..count-1) on up to `workers` threads. Results must go into
/// pre-assigned slots; the first escaped exception is rethrown after join.
template <typename Task>
void run_tasks(int count, int workers, Task&& task) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto work = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int t = 0; t < workers; ++t) threads.emplace_back(work);
  for (auto& thread : threads) thread.join();
  if (error) std::rethrow_exception(error);
}

/// W_1 between two sorted scalar clouds (quantile coupling, integer units).
double w1_sorted(const std::vector<double>& x, const std::vector<double>& y) {
  const std::int64_t na = static_cast<std::int64_t>(x.size());
  const std::int64_t nb = static_cast<std::int64_t>(y.size());
  double acc = 0.0;
  std::int64_t unit = 0, ia = 0, ib = 0;
  const std::int64_t total = na * nb;
  while (unit < total) {
    const std::int64_t bound_a = (ia + 1) * nb;
    const std::int64_t bound_b = (ib + 1) * na;
    const std::int64_t next = std::min(bound_a, bound_b);
    acc += static_cast<double>(next - unit) * std::abs(x[ia] - y[ib]);
    unit = next;
    if (bound_a == next) ++ia;
    if (bound_b == next) ++ib;
  }
  return acc / static_cast<double>(total);
}

MeanFieldCoefficient config_coefficient(const ExperimentConfig& config) {
  return make_builtin(config.coefficient_name, config.coefficient_a, config.coefficient_b);
}

struct Aggregate {
  int count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++count;
    const double delta = v - mean;
    mean += delta / count;
    m2 += delta * (v - mean);
  }
  double std_error() const {
    if (count < 2) return 0.0;
    return std::sqrt(m2 / (count - 1) / count);
  }
};

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& detail) {
  std::map<std::pair<std::string, int>, Aggregate> groups;
  for (const ResultRow& row : detail) {
    if (row.aborted) continue;
    groups[{row.metric, row.n}].add(row.value);
  }
  std::vector<SummaryRow> out;
  out.reserve(groups.size());
  for (const auto& [key, agg] : groups) {
    SummaryRow row;
    row.metric = key.first;
    row.n = key.second;
    row.count = agg.count;
    row.mean = agg.mean;
    row.std_error = agg.std_error();
    row.log_n = std::log(static_cast<double>(key.second));
    row.log_mean = agg.mean > 0.0 ? std::log(agg.mean) : kNan;
    out.push_back(std::move(row));
  }
  return out;
}

void append_fit(ExperimentOutput& output, const std::string& metric, bool log_correction) {
  std::vector<double> ns, means;
  for (const SummaryRow& row : output.summary) {
    if (row.metric == metric && row.mean > 0.0) {
      ns.push_back(static_cast<double>(row.n));
      means.push_back(row.mean);
    }
  }
  try {
    const RateFit fit = fit_rate(ns, means, log_correction);
    output.fits.push_back({metric, fit.slope, fit.intercept, fit.r_squared});
  } catch (const std::invalid_argument&) {
    ResultRow row;
    row.experiment_id = output.experiment_id;
    row.metric = "fit_error:" + metric;
    row.value = kNan;
    row.aborted = true;
    output.detail.push_back(std::move(row));
  }
}

}  // namespace

ExperimentOutput run_iid_rate(const ExperimentConfig& config) {
  config.validate();
  const int d = config.state_dim;
  const int reps = config.replications;
  const bool vs_law = d == 1;
  if (!vs_law && config.n_ref < config.ns.back()) {
    throw ConfigError("iid-rate with d >= 2 needs n_ref >= max(ns)");
  }

  const ReferenceLaw1D law = config.law == "normal" ? standard_normal_law() : uniform_unit_law();

  std::vector<std::vector<ResultRow>> slots(reps);
  auto task = [&](int rep) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<ResultRow>& rows = slots[rep];

    std::vector<double> ref;
    if (!vs_law) {
      RandomStream stream(task_seed(config, kRefCloud, 0, rep), 0);
      ref.resize(static_cast<std::size_t>(config.n_ref) * d);
      for (double& v : ref) {
        v = config.law == "normal" ? stream.next_normal() : stream.next_uniform();
      }
    }

    for (int n : config.ns) {
      const std::uint64_t seed = task_seed(config, kCloud, n, rep);
      RandomStream stream(seed, 0);
      EmpiricalMeasure cloud;
      cloud.n = n;
      cloud.d = d;
      cloud.atoms.resize(static_cast<std::size_t>(n) * d);
      for (double& v : cloud.atoms) {
        v = config.law == "normal" ? stream.next_normal() : stream.next_uniform();
      }

      double value = 0.0;
      if (vs_law) {
        value = wasserstein_1d_vs_law(cloud, law);
      } else {
        const int blocks = std::min(config.block_cap, config.n_ref / n);
        double acc = 0.0;
        for (int blk = 0; blk < blocks; ++blk) {
          EmpiricalMeasure piece;
          piece.n = n;
          piece.d = d;
          piece.atoms.assign(ref.begin() + static_cast<std::size_t>(blk) * n * d,
                             ref.begin() + static_cast<std::size_t>(blk + 1) * n * d);
          acc += wasserstein_assignment(cloud, piece, 1.0);
        }
        value = acc / blocks;
      }

      ResultRow row;
      row.experiment_id = config.experiment;
      row.n = n;
      row.replication = rep;
      row.seed = seed;
      row.metric = vs_law ? "w1_vs_law" : "w1_vs_ref";
      row.value = value;
      rows.push_back(std::move(row));
    }
    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    for (ResultRow& row : rows) row.runtime_ms = elapsed;
  };
  run_tasks(reps, resolve_workers(config, 0), task);

  ExperimentOutput output;
  output.experiment_id = config.experiment;
  output.task_count = reps * static_cast<int>(config.ns.size());
  for (auto& rows : slots) {
    for (ResultRow& row : rows) output.detail.push_back(std::move(row));
  }
  output.summary = summarize(output.detail);
  append_fit(output, vs_law ? "w1_vs_law" : "w1_vs_ref", config.use_log_correction());
  return output;
}

namespace {

struct ReferenceFlow {
  TrajectorySet trajectory;
  std::vector<std::vector<double>> sorted_frames;  // d == 1 only
  bool aborted = false;
};

ReferenceFlow solve_reference(const ExperimentConfig& config, const MeanFieldCoefficient& coeff,
                              int rep) {
  ReferenceFlow ref;
  const auto paths = sample_ensemble(config.driver, config.grid,
                                     task_seed(config, kRefPaths, 0, rep), config.n_ref);
  const EmpiricalRoughSetup setup(paths, false);
  const auto x0 = draw_x0(task_seed(config, kRefX0, 0, rep), config.n_ref, config.state_dim,
                          config.x0_kind, config.x0_scale);
  try {
    ref.trajectory = solve_particle_system(setup, coeff, x0, SchemeKind::compensated);
  } catch (const BlowUpError&) {
    ref.aborted = true;
    return ref;
  }
  const int K = config.grid.steps;
  ref.sorted_frames.resize(K + 1);
  for (int k = 0; k <= K; ++k) {
    ref.sorted_frames[k].assign(ref.trajectory.frame(k),
                                ref.trajectory.frame(k) + config.n_ref);
    std::sort(ref.sorted_frames[k].begin(), ref.sorted_frames[k].end());
  }
  return ref;
}

}  // namespace

ExperimentOutput run_chaos_rate(const ExperimentConfig& config) {
  config.validate();
  const MeanFieldCoefficient coeff = config_coefficient(config);
  const int reps = config.replications;
  const int K = config.grid.steps;

  std::vector<std::vector<ResultRow>> slots(reps);
  std::atomic<int> aborted{0};
  auto task = [&](int rep) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<ResultRow>& rows = slots[rep];
    const ReferenceFlow ref = solve_reference(config, coeff, rep);

    std::vector<double> frame;
    for (int n : config.ns) {
      ResultRow row;
      row.experiment_id = config.experiment;
      row.n = n;
      row.replication = rep;
      row.seed = task_seed(config, kPaths, n, rep);
      row.metric = "w1_sup_t";
      if (ref.aborted) {
        row.value = kNan;
        row.aborted = true;
        aborted.fetch_add(1);
        rows.push_back(std::move(row));
        continue;
      }
      try {
        const auto paths = sample_ensemble(config.driver, config.grid, row.seed, n);
        const EmpiricalRoughSetup setup(paths, false);
        const auto x0 = draw_x0(task_seed(config, kX0, n, rep), n, config.state_dim,
                                config.x0_kind, config.x0_scale);
        const TrajectorySet traj = solve_particle_system(setup, coeff, x0, SchemeKind::compensated);
        double sup = 0.0;
        for (int k = 0; k <= K; ++k) {
          frame.assign(traj.frame(k), traj.frame(k) + n);
          std::sort(frame.begin(), frame.end());
          sup = std::max(sup, w1_sorted(frame, ref.sorted_frames[k]));
        }
        row.value = sup;
      } catch (const BlowUpError&) {
        row.value = kNan;
        row.aborted = true;
        aborted.fetch_add(1);
      }
      rows.push_back(std::move(row));
    }
    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    for (ResultRow& row : rows) row.runtime_ms = elapsed;
  };
  run_tasks(reps, resolve_workers(config, 0), task);

  ExperimentOutput output;
  output.experiment_id = config.experiment;
  output.task_count = reps * static_cast<int>(config.ns.size());
  output.aborted_count = aborted.load();
  for (auto& rows : slots) {
    for (ResultRow& row : rows) output.detail.push_back(std::move(row));
  }
  output.summary = summarize(output.detail);
  append_fit(output, "w1_sup_t", config.use_log_correction());
  return output;
}

ExperimentOutput run_coupling(const ExperimentConfig& config) {
  config.validate();
  const MeanFieldCoefficient coeff = config_coefficient(config);
  const int reps = config.replications;
  const int d = config.state_dim;

  struct TaskResult {
    std::vector<ResultRow> rows;
    // per n: particle-wise sup_t gaps (empty when aborted)
    std::vector<std::vector<double>> gaps;
  };
  std::vector<TaskResult> slots(reps);
  std::atomic<int> aborted{0};

  auto task = [&](int rep) {
    const auto start = std::chrono::steady_clock::now();
    TaskResult& result = slots[rep];
    result.gaps.resize(config.ns.size());
    const ReferenceFlow ref = solve_reference(config, coeff, rep);
    const MeasureFlow flow = ref.aborted ? MeasureFlow{} : flow_of(ref.trajectory);

    for (std::size_t ni = 0; ni < config.ns.size(); ++ni) {
      const int n = config.ns[ni];
      const std::uint64_t seed = task_seed(config, kPaths, n, rep);
      auto make_row = [&](const std::string& metric, double value, bool is_aborted) {
        ResultRow row;
        row.experiment_id = config.experiment;
        row.n = n;
        row.replication = rep;
        row.seed = seed;
        row.metric = metric;
        row.value = value;
        row.aborted = is_aborted;
        return row;
      };
      if (ref.aborted) {
        result.rows.push_back(make_row("gap_mean", kNan, true));
        aborted.fetch_add(1);
        continue;
      }
      try {
        const auto paths = sample_ensemble(config.driver, config.grid, seed, n);
        const EmpiricalRoughSetup setup(paths, false);
        const auto x0 =
            draw_x0(task_seed(config, kX0, n, rep), n, d, config.x0_kind, config.x0_scale);
        const TrajectorySet coupled = solve_particle_system(setup, coeff, x0, SchemeKind::compensated);
        std::vector<std::vector<double>> companions(n);
        for (int i = 0; i < n; ++i) {
          companions[i] = solve_frozen_measure(paths[i], setup.self_blocks(i), coeff, flow,
                                               x0.data() + static_cast<std::size_t>(i) * d);
        }
        const CouplingErrors errors = coupling_errors(coupled, companions);
        double mean_gap = 0.0, max_gap = 0.0;
        for (double gap : errors.per_particle_sup) {
          mean_gap += gap;
          max_gap = std::max(max_gap, gap);
        }
        mean_gap /= n;
        result.rows.push_back(make_row("gap_mean", mean_gap, false));
        result.rows.push_back(make_row("gap_max", max_gap, false));
        result.rows.push_back(make_row("w1_mu_mubar_sup_t", errors.sup_w1, false));
        result.gaps[ni] = errors.per_particle_sup;
      } catch (const BlowUpError&) {
        result.rows.push_back(make_row("gap_mean", kNan, true));
        aborted.fetch_add(1);
      }
    }
    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    for (ResultRow& row : result.rows) row.runtime_ms = elapsed;
  };
  run_tasks(reps, resolve_workers(config, 0), task);

  ExperimentOutput output;
  output.experiment_id = config.experiment;
  output.task_count = reps * static_cast<int>(config.ns.size());
  output.aborted_count = aborted.load();
  for (auto& result : slots) {
    for (ResultRow& row : result.rows) output.detail.push_back(std::move(row));
  }
  output.summary = summarize(output.detail);

  // sup_i of the replication mean of the per-particle sup_t gap: the first
  // error component of the convergence-rate statement. Summary-only metric
  // (it aggregates across replications, not within one row).
  for (std::size_t ni = 0; ni < config.ns.size(); ++ni) {
    const int n = config.ns[ni];
    std::vector<double> sums(n, 0.0);
    int used = 0;
    for (const TaskResult& result : slots) {
      if (result.gaps[ni].empty()) continue;
      ++used;
      for (int i = 0; i < n; ++i) sums[i] += result.gaps[ni][i];
    }
    if (used == 0) continue;
    double sup = 0.0;
    for (int i = 0; i < n; ++i) sup = std::max(sup, sums[i] / used);
    SummaryRow row;
    row.metric = "sup_i_mean_gap";
    row.n = n;
    row.count = used;
    row.mean = sup;
    row.std_error = kNan;
    row.log_n = std::log(static_cast<double>(n));
    row.log_mean = sup > 0.0 ? std::log(sup) : kNan;
    output.summary.push_back(std::move(row));
  }
  std::sort(output.summary.begin(), output.summary.end(),
            [](const SummaryRow& a, const SummaryRow& b) {
              return std::tie(a.metric, a.n) < std::tie(b.metric, b.n);
            });

  append_fit(output, "gap_mean", false);
  append_fit(output, "w1_mu_mubar_sup_t", false);
  append_fit(output, "sup_i_mean_gap", false);
  return output;
}

ExperimentOutput run_diagnose(const ExperimentConfig& config) {
  config.validate();
  const int reps = config.replications;
  const int K = config.grid.steps;
  const int m = config.grid.dim;

  struct TaskSpec {
    int n;
    int rep;
  };
  std::vector<TaskSpec> tasks;
  for (int n : config.ns) {
    for (int rep = 0; rep < reps; ++rep) tasks.push_back({n, rep});
  }
  std::vector<std::vector<ResultRow>> slots(tasks.size());

  auto frobenius = [m](const std::vector<double>& a) {
    double acc = 0.0;
    for (double v : a) acc += v * v;
    return std::sqrt(acc);
  };

  auto task = [&](int t) {
    const auto start = std::chrono::steady_clock::now();
    const int n = tasks[t].n;
    const int rep = tasks[t].rep;
    std::vector<ResultRow>& rows = slots[t];
    const std::uint64_t seed = task_seed(config, kPaths, n, rep);
    auto make_row = [&](const std::string& metric, double value) {
      ResultRow row;
      row.experiment_id = config.experiment;
      row.n = n;
      row.replication = rep;
      row.seed = seed;
      row.metric = metric;
      row.value = value;
      return row;
    };

    const auto paths = sample_ensemble(config.driver, config.grid, seed, n);
    const EmpiricalRoughSetup setup(paths, true);
    RandomStream probe(task_seed(config, kProbe, n, rep), 0);

    // Chen residual over sampled pairs and triples.
    double chen_max = 0.0;
    const int pair_samples = std::min(n * n, 16);
    const int triple_samples = 64;
    for (int ps = 0; ps < pair_samples; ++ps) {
      const int i = static_cast<int>(probe.next_u64() % n);
      const int j = static_cast<int>(probe.next_u64() % n);
      for (int ts = 0; ts < triple_samples; ++ts) {
        int r = static_cast<int>(probe.next_u64() % (K + 1));
        int s = static_cast<int>(probe.next_u64() % (K + 1));
        int u = static_cast<int>(probe.next_u64() % (K + 1));
        if (r > s) std::swap(r, s);
        if (s > u) std::swap(s, u);
        if (r > s) std::swap(r, s);
        const auto whole = setup.area(i, j, r, u);
        const auto left = setup.area(i, j, r, s);
        const auto right = setup.area(i, j, s, u);
        std::vector<double> residual(static_cast<std::size_t>(m) * m);
        for (int rr = 0; rr < m; ++rr) {
          for (int cc = 0; cc < m; ++cc) {
            residual[rr * m + cc] = whole[rr * m + cc] - left[rr * m + cc] - right[rr * m + cc] -
                                    setup.path(i).increment(r, s, rr) *
                                        setup.path(j).increment(s, u, cc);
          }
        }
        const double scale = 1.0 + frobenius(whole);
        chen_max = std::max(chen_max, frobenius(residual) / scale);
      }
    }
    rows.push_back(make_row("chen_residual_max", chen_max));

    // Integration by parts on cross pairs (skipped when n == 1).
    double ibp_max = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        for (int ts = 0; ts < 32; ++ts) {
          int a = static_cast<int>(probe.next_u64() % (K + 1));
          int b = static_cast<int>(probe.next_u64() % (K + 1));
          if (a > b) std::swap(a, b);
          const auto forward = setup.area(i, j, a, b);
          const auto backward = setup.area(j, i, a, b);
          std::vector<double> residual(static_cast<std::size_t>(m) * m);
          for (int rr = 0; rr < m; ++rr) {
            for (int cc = 0; cc < m; ++cc) {
              residual[rr * m + cc] =
                  forward[rr * m + cc] + backward[cc * m + rr] -
                  setup.path(i).increment(a, b, rr) * setup.path(j).increment(a, b, cc);
            }
          }
          const double scale = 1.0 + frobenius(forward);
          ibp_max = std::max(ibp_max, frobenius(residual) / scale);
        }
      }
    }
    rows.push_back(make_row("ibp_residual_max", ibp_max));

    // Superadditivity of the empirical controls, and per-particle local
    // accumulation of varpi = (v_p^{i,n})^{1/p} at the configured threshold.
    const auto controls = empirical_control_family(setup, config.p, config.q);
    int violations = 0;
    for (const Control& control : controls) violations += superadditivity_violations(control);
    rows.push_back(make_row("control_superadditivity_violations", violations));

    const auto variations = empirical_variation_family(setup, config.p, config.q);
    const double inv_p = 1.0 / config.p;
    for (int i = 0; i < n; ++i) {
      const Control& v = variations[i];
      TwoIndexFn varpi{[&v, inv_p](int a, int b) { return std::pow(v(a, b), inv_p); },
                       "empirical-variation"};
      rows.push_back(
          make_row("local_accumulation", local_accumulation(varpi, config.alpha, 0, K)));
    }

    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    for (ResultRow& row : rows) row.runtime_ms = elapsed;
  };
  run_tasks(static_cast<int>(tasks.size()), resolve_workers(config, 0), task);

  ExperimentOutput output;
  output.experiment_id = config.experiment;
  output.task_count = static_cast<int>(tasks.size());
  for (auto& rows : slots) {
    for (ResultRow& row : rows) output.detail.push_back(std::move(row));
  }
  output.summary = summarize(output.detail);
  return output;
}

namespace {

std::string sanitize_metric(const std::string& metric) {
  std::string out;
  for (char c : metric) {
    out += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_';
  }
  return out;
}

void write_detail_csv(const ExperimentOutput& output, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "experiment,n,replication,seed,metric,value,aborted\n";
  for (const ResultRow& row : output.detail) {
    out << csv_escape(row.experiment_id) << ',' << row.n << ',' << row.replication << ','
        << row.seed << ',' << csv_escape(row.metric) << ',' << format_double(row.value) << ','
        << (row.aborted ? 1 : 0) << '\n';
  }
}

void write_detail_json(const ExperimentOutput& output, const std::string& path) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ResultRow& row : output.detail) {
    nlohmann::json j;
    j["experiment"] = row.experiment_id;
    j["n"] = row.n;
    j["replication"] = row.replication;
    j["seed"] = row.seed;
    j["metric"] = row.metric;
    if (std::isfinite(row.value)) {
      j["value"] = row.value;
    } else {
      j["value"] = nullptr;
    }
    j["aborted"] = row.aborted;
    rows.push_back(std::move(j));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << rows.dump(2) << '\n';
}

}  // namespace

std::string emit(const ExperimentOutput& output, const ExperimentConfig& config) {
  fs::create_directories(config.output_dir);
  const std::string base = (fs::path(config.output_dir) / output.experiment_id).string();
  const bool csv = config.format == "csv";

  const std::string detail_path = base + "_detail." + (csv ? "csv" : "json");
  if (csv) {
    write_detail_csv(output, detail_path);
  } else {
    write_detail_json(output, detail_path);
  }

  const std::string summary_path = base + "_summary." + (csv ? "csv" : "json");
  if (csv) {
    std::ofstream out(summary_path, std::ios::trunc);
    out << "metric,n,count,mean,std_error,log_n,log_mean\n";
    for (const SummaryRow& row : output.summary) {
      out << csv_escape(row.metric) << ',' << row.n << ',' << row.count << ','
          << format_double(row.mean) << ',' << format_double(row.std_error) << ','
          << format_double(row.log_n) << ',' << format_double(row.log_mean) << '\n';
    }
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (const SummaryRow& row : output.summary) {
      rows.push_back({{"metric", row.metric},
                      {"n", row.n},
                      {"count", row.count},
                      {"mean", row.mean},
                      {"std_error", std::isfinite(row.std_error) ? nlohmann::json(row.std_error)
                                                                 : nlohmann::json(nullptr)},
                      {"log_n", row.log_n},
                      {"log_mean", std::isfinite(row.log_mean) ? nlohmann::json(row.log_mean)
                                                               : nlohmann::json(nullptr)}});
    }
    std::ofstream out(summary_path, std::ios::trunc);
    out << rows.dump(2) << '\n';
  }

  if (!output.fits.empty()) {
    const std::string fits_path = base + "_fits." + (csv ? "csv" : "json");
    if (csv) {
      std::ofstream out(fits_path, std::ios::trunc);
      out << "metric,slope,intercept,r_squared\n";
      for (const FitRow& row : output.fits) {
        out << csv_escape(row.metric) << ',' << format_double(row.slope) << ','
            << format_double(row.intercept) << ',' << format_double(row.r_squared) << '\n';
      }
    } else {
      nlohmann::json rows = nlohmann::json::array();
      for (const FitRow& row : output.fits) {
        rows.push_back({{"metric", row.metric},
                        {"slope", row.slope},
                        {"intercept", row.intercept},
                        {"r_squared", row.r_squared}});
      }
      std::ofstream out(fits_path, std::ios::trunc);
      out << rows.dump(2) << '\n';
    }

    // Plot data: log n against the (possibly log-corrected) log mean error.
    for (const FitRow& fit : output.fits) {
      std::ofstream out(base + "_plot_" + sanitize_metric(fit.metric) + ".dat", std::ios::trunc);
      for (const SummaryRow& row : output.summary) {
        if (row.metric != fit.metric || !(row.mean > 0.0)) continue;
        double err = row.mean;
        if (config.use_log_correction()) err /= std::log1p(static_cast<double>(row.n));
        out << format_double(row.log_n) << ' ' << format_double(std::log(err)) << '\n';
      }
    }
  }

  // Wall-clock sidecar; deliberately outside the deterministic file set.
  {
    std::ofstream out(base + "_timings.csv", std::ios::trunc);
    out << "experiment,n,replication,metric,runtime_ms\n";
    for (const ResultRow& row : output.detail) {
      out << csv_escape(row.experiment_id) << ',' << row.n << ',' << row.replication << ','
          << csv_escape(row.metric) << ',' << format_double(row.runtime_ms) << '\n';
    }
  }
  return detail_path;
}

std::vector<ResultRow> parse_detail_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty detail file " + path);
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 7) throw std::runtime_error("bad detail row in " + path);
    ResultRow row;
    row.experiment_id = fields[0];
    row.n = std::stoi(fields[1]);
    row.replication = std::stoi(fields[2]);
    row.seed = std::stoull(fields[3]);
    row.metric = fields[4];
    row.value = std::strtod(fields[5].c_str(), nullptr);
    row.aborted = fields[6] == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> parse_detail_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json data = nlohmann::json::parse(in);
  std::vector<ResultRow> rows;
  for (const auto& j : data) {
    ResultRow row;
    row.experiment_id = j.at("experiment").get<std::string>();
    row.n = j.at("n").get<int>();
    row.replication = j.at("replication").get<int>();
    row.seed = j.at("seed").get<std::uint64_t>();
    row.metric = j.at("metric").get<std::string>();
    row.value = j.at("value").is_null() ? kNan : j.at("value").get<double>();
    row.aborted = j.at("aborted").get<bool>();
    rows.push_back(std::move(row));
  }
  return rows;
}

int run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentOutput output;
  if (config.experiment == "diagnose") {
    output = run_diagnose(config);
  } else if (config.experiment == "iid-rate") {
    output = run_iid_rate(config);
  } else if (config.experiment == "chaos-rate") {
    output = run_chaos_rate(config);
  } else {
    output = run_coupling(config);
  }
  emit(output, config);
  return output.aborted_fraction() > 0.05 ? 3 : 0;
}

}  // namespace roughchaos
