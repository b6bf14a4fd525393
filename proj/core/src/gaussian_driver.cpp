#include "roughchaos/gaussian_driver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "roughchaos/rng.hpp"

namespace roughchaos {

namespace {

std::uint64_t double_bits(double v) {
  std::uint64_t b;
  std::memcpy(&b, &v, sizeof(double));
  return b;
}

using FactorKey = std::tuple<int, std::uint64_t, std::uint64_t>;

// Lower-triangular factor of the fBm covariance at grid points t_1..t_K,
// cached per (K, T, H). O(K^3) once, reused across the ensemble.
std::shared_ptr<const Eigen::MatrixXd> fbm_factor(const GridSpec& spec, double hurst) {
  static std::mutex mutex;
  static std::map<FactorKey, std::shared_ptr<const Eigen::MatrixXd>> cache;

  const FactorKey key{spec.steps, double_bits(spec.horizon), double_bits(hurst)};
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }

  const int K = spec.steps;
  const DriverKind kind = DriverKind::fbm(hurst);
  Eigen::MatrixXd cov(K, K);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l <= k; ++l) {
      const double value = kind.covariance(spec.time(k + 1), spec.time(l + 1));
      cov(k, l) = value;
      cov(l, k) = value;
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    // One regularization attempt: float-level jitter on the diagonal.
    const double jitter = 1e-12 * cov.diagonal().maxCoeff();
    cov.diagonal().array() += jitter;
    llt.compute(cov);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error(
          "fBm covariance factorization failed after regularization; "
          "grid too fine for float precision");
    }
  }

  auto factor = std::make_shared<Eigen::MatrixXd>(llt.matrixL());
  std::lock_guard<std::mutex> lock(mutex);
  auto [it, inserted] = cache.emplace(key, std::move(factor));
  return it->second;
}

}  // namespace

GridPath sample_path(const DriverKind& kind, const GridSpec& spec, std::uint64_t seed,
                     std::uint64_t index) {
  spec.validate();
  kind.validate();

  const int K = spec.steps;
  const int m = spec.dim;
  GridPath path;
  path.spec = spec;
  path.seed_tag = {seed, index};
  path.values.assign(static_cast<std::size_t>(K + 1) * m, 0.0);

  RandomStream stream(seed, index);

  if (kind.type == DriverKind::Type::brownian) {
    const double scale = std::sqrt(spec.mesh());
    for (int c = 0; c < m; ++c) {
      double value = 0.0;
      for (int k = 1; k <= K; ++k) {
        value += scale * stream.next_normal();
        path.values[static_cast<std::size_t>(k) * m + c] = value;
      }
    }
    return path;
  }

  const auto factor = fbm_factor(spec, kind.hurst_index);
  std::vector<double> normals(K);
  for (int c = 0; c < m; ++c) {
    for (int k = 0; k < K; ++k) normals[k] = stream.next_normal();
    for (int k = 0; k < K; ++k) {
      double value = 0.0;
      for (int l = 0; l <= k; ++l) value += (*factor)(k, l) * normals[l];
      path.values[static_cast<std::size_t>(k + 1) * m + c] = value;
    }
  }
  return path;
}

std::vector<GridPath> sample_ensemble(const DriverKind& kind, const GridSpec& spec,
                                      std::uint64_t seed, int n) {
  if (n < 1) throw std::invalid_argument("ensemble size must be >= 1");
  std::vector<GridPath> paths;
  paths.reserve(n);
  for (int i = 0; i < n; ++i) {
    paths.push_back(sample_path(kind, spec, seed, static_cast<std::uint64_t>(i)));
  }
  return paths;
}

namespace {

// Rectangular increment of the covariance over [t_a, t_b] x [t_c, t_d].
double cov_rectangle(const DriverKind& kind, const GridSpec& spec, int a, int b, int c, int d) {
  return kind.covariance(spec.time(b), spec.time(d)) - kind.covariance(spec.time(b), spec.time(c)) -
         kind.covariance(spec.time(a), spec.time(d)) + kind.covariance(spec.time(a), spec.time(c));
}

// For a fixed row partition, the best column partition is a 1-D
// max-partition DP over interval costs.
double best_columns(const std::vector<double>& cell_cost, int L, const std::vector<int>& rows,
                    double rho, std::vector<int>* best_cols) {
  // cost(a, b) of the column interval [a, b] against all row intervals.
  // cell_cost holds |rect(row cell i, col cell j)| on the unit-cell grid:
  // rect over intervals adds cellwise, so accumulate unit cells first.
  std::vector<double> interval(static_cast<std::size_t>(L + 1) * (L + 1), 0.0);
  const int R = static_cast<int>(rows.size()) - 1;
  for (int a = 0; a < L; ++a) {
    std::vector<double> rowsum(R, 0.0);
    for (int b = a + 1; b <= L; ++b) {
      for (int r = 0; r < R; ++r) {
        double cell = 0.0;
        for (int i = rows[r]; i < rows[r + 1]; ++i) {
          cell += cell_cost[static_cast<std::size_t>(i) * L + (b - 1)];
        }
        rowsum[r] += cell;
      }
      double total = 0.0;
      for (int r = 0; r < R; ++r) total += std::pow(std::abs(rowsum[r]), rho);
      interval[static_cast<std::size_t>(a) * (L + 1) + b] = total;
    }
  }

  std::vector<double> best(L + 1, 0.0);
  std::vector<int> prev(L + 1, 0);
  for (int b = 1; b <= L; ++b) {
    double best_here = -1.0;
    int arg = 0;
    for (int a = 0; a < b; ++a) {
      const double candidate = best[a] + interval[static_cast<std::size_t>(a) * (L + 1) + b];
      if (candidate > best_here) {
        best_here = candidate;
        arg = a;
      }
    }
    best[b] = best_here;
    prev[b] = arg;
  }
  if (best_cols) {
    best_cols->clear();
    for (int b = L; b > 0; b = prev[b]) best_cols->push_back(b);
    best_cols->push_back(0);
    std::reverse(best_cols->begin(), best_cols->end());
  }
  return best[L];
}

}  // namespace

double covariance_two_d_variation(const DriverKind& kind, const GridSpec& spec, int k_from,
                                  int k_to, double rho) {
  spec.validate();
  kind.validate();
  if (rho < 1.0) throw std::invalid_argument("rho must be >= 1");
  if (k_from < 0 || k_to > spec.steps || k_from > k_to) {
    throw std::invalid_argument("window must be grid-aligned");
  }
  const int L = k_to - k_from;
  if (L == 0) return 0.0;

  // Unit-cell rectangular increments E[(W_{t_{i+1}}-W_{t_i})(W_{s_{j+1}}-W_{s_j})],
  // signed (intervals add cellwise before |.|^rho is applied).
  std::vector<double> cell(static_cast<std::size_t>(L) * L);
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      cell[static_cast<std::size_t>(i) * L + j] =
          cov_rectangle(kind, spec, k_from + i, k_from + i + 1, k_from + j, k_from + j + 1);
    }
  }

  auto finest = [&]() {
    std::vector<int> rows(L + 1);
    for (int i = 0; i <= L; ++i) rows[i] = i;
    return rows;
  };

  if (L <= 12) {
    // Exhaustive over row partitions; columns are solved exactly by DP.
    double best = 0.0;
    const int interior = L - 1;
    for (std::uint32_t mask = 0; mask < (1u << interior); ++mask) {
      std::vector<int> rows = {0};
      for (int i = 0; i < interior; ++i) {
        if (mask & (1u << i)) rows.push_back(i + 1);
      }
      rows.push_back(L);
      best = std::max(best, best_columns(cell, L, rows, rho, nullptr));
    }
    return best;
  }

  // Alternating ascent from the finest partition: optimize columns for the
  // current rows, transpose, repeat until stable. Deterministic lower bound.
  std::vector<int> rows = finest();
  double value = best_columns(cell, L, rows, rho, nullptr);
  for (int round = 0; round < 64; ++round) {
    std::vector<int> cols;
    best_columns(cell, L, rows, rho, &cols);
    // Transposed problem: swap the roles of rows and columns (the cell matrix
    // of the covariance is symmetric only for s==t windows of the same
    // process, which holds here, but transpose indices anyway).
    std::vector<double> cell_t(cell.size());
    for (int i = 0; i < L; ++i) {
      for (int j = 0; j < L; ++j) {
        cell_t[static_cast<std::size_t>(j) * L + i] = cell[static_cast<std::size_t>(i) * L + j];
      }
    }
    std::vector<int> new_rows;
    const double improved = best_columns(cell_t, L, cols, rho, &new_rows);
    if (improved <= value + 1e-15 && new_rows == rows) break;
    if (improved > value) value = improved;
    if (new_rows == rows) break;
    rows = std::move(new_rows);
  }
  return value;
}

}  // namespace roughchaos
