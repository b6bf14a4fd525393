#include "roughchaos/variation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace roughchaos {

namespace {

double euclid(const double* v, int len) {
  double acc = 0.0;
  for (int i = 0; i < len; ++i) acc += v[i] * v[i];
  return std::sqrt(acc);
}

}  // namespace

double p_variation_power(const std::function<double(int, int)>& g, double p, int k_a, int k_b) {
  if (p < 1.0) throw std::invalid_argument("p must be >= 1");
  if (k_b < k_a) throw std::invalid_argument("empty window");
  const int L = k_b - k_a;
  if (L == 0) return 0.0;
  std::vector<double> best(L + 1, 0.0);
  for (int b = 1; b <= L; ++b) {
    double value = 0.0;
    for (int c = 0; c < b; ++c) {
      const double candidate = best[c] + std::pow(g(k_a + c, k_a + b), p);
      if (candidate > value) value = candidate;
    }
    best[b] = value;
  }
  return best[L];
}

double p_variation(const std::function<double(int, int)>& g, double p, int k_a, int k_b) {
  return std::pow(p_variation_power(g, p, k_a, k_b), 1.0 / p);
}

double p_variation(const std::vector<double>& values, double p, int k_a, int k_b) {
  auto g = [&values](int a, int b) { return std::abs(values[b] - values[a]); };
  return p_variation(g, p, k_a, k_b);
}

double holder_norm(const std::function<double(int, int)>& g, double exponent,
                   const GridSpec& spec, int k_a, int k_b) {
  double best = 0.0;
  for (int a = k_a; a <= k_b; ++a) {
    for (int b = a + 1; b <= k_b; ++b) {
      const double dt = spec.time(b) - spec.time(a);
      best = std::max(best, g(a, b) / std::pow(dt, exponent));
    }
  }
  return best;
}

double holder_norm(const GridPath& path, double alpha, int k_a, int k_b) {
  const int m = path.spec.dim;
  auto g = [&](int a, int b) {
    double acc = 0.0;
    for (int c = 0; c < m; ++c) {
      const double inc = path.increment(a, b, c);
      acc += inc * inc;
    }
    return std::sqrt(acc);
  };
  return holder_norm(g, alpha, path.spec, k_a, k_b);
}

double holder_norm_level2(const Level2Blocks& blocks, const GridPath& path_i,
                          const GridPath& path_j, double alpha, int k_a, int k_b) {
  const int m = blocks.spec.dim;
  auto g = [&](int a, int b) {
    const std::vector<double> area = chen_eval(blocks, path_i, path_j, a, b);
    return euclid(area.data(), m * m);
  };
  return holder_norm(g, 2.0 * alpha, blocks.spec, k_a, k_b);
}

TwoIndexFn Control::as_fn() const {
  const Control* self = this;
  return TwoIndexFn{[self](int a, int b) { return (*self)(a, b); }, "control"};
}

namespace {

// sup over sub-partitions of sum g^power, tabulated for every grid pair.
std::vector<double> partition_sup_table(const std::function<double(int, int)>& g, double power,
                                        int K) {
  const int N1 = K + 1;
  std::vector<double> table(static_cast<std::size_t>(N1) * N1, 0.0);
  std::vector<double> best(N1, 0.0);
  for (int a = 0; a < K; ++a) {
    best[a] = 0.0;
    for (int b = a + 1; b <= K; ++b) {
      double value = 0.0;
      for (int c = a; c < b; ++c) {
        const double candidate = best[c] + std::pow(g(c, b), power);
        if (candidate > value) value = candidate;
      }
      best[b] = value;
      table[static_cast<std::size_t>(a) * N1 + b] = value;
    }
  }
  return table;
}

struct FamilyTables {
  int K = 0;
  std::vector<std::vector<double>> v;  // per-particle v_p^{i,n} table
  std::vector<double> envelope;        // <v^{.,n}>_{q;[s,t],1-v} table
};

FamilyTables build_family_tables(const EmpiricalRoughSetup& setup, double p, double q) {
  const GridSpec& spec = setup.spec();
  const int K = spec.steps;
  const int N1 = K + 1;
  const int n = setup.size();
  const int m = spec.dim;
  const std::size_t cells = static_cast<std::size_t>(N1) * N1;
  auto idx = [N1](int a, int b) { return static_cast<std::size_t>(a) * N1 + b; };

  // Level-1: ell^q particle mean of |W^j_{a,b}| (shared term).
  std::vector<double> level1_mean(cells, 0.0);
  for (int a = 0; a < N1; ++a) {
    for (int b = a + 1; b < N1; ++b) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) {
        double norm2 = 0.0;
        for (int c = 0; c < m; ++c) {
          const double inc = setup.path(j).increment(a, b, c);
          norm2 += inc * inc;
        }
        acc += std::pow(std::sqrt(norm2), q);
      }
      level1_mean[idx(a, b)] = std::pow(acc / n, 1.0 / q);
    }
  }

  // Level-2 magnitude tables: own area, one-sided ell^q means, two-sided mean.
  std::vector<std::vector<double>> self_abs(n, std::vector<double>(cells, 0.0));
  std::vector<std::vector<double>> row_mean(n, std::vector<double>(cells, 0.0));
  std::vector<std::vector<double>> col_mean(n, std::vector<double>(cells, 0.0));
  std::vector<double> full_mean(cells, 0.0);

  std::vector<double> areas(static_cast<std::size_t>(n) * n * m * m);
  std::vector<double> block(static_cast<std::size_t>(m) * m);
  for (int a = 0; a < K; ++a) {
    std::fill(areas.begin(), areas.end(), 0.0);
    for (int b = a + 1; b <= K; ++b) {
      // Chen update: A_{jk}(a, b) = A_{jk}(a, b-1) + block_{jk}[b-1]
      //              + W^j_{a,b-1} (x) W^k_{b-1,b}.
      for (int jj = 0; jj < n; ++jj) {
        for (int kk = 0; kk < n; ++kk) {
          double* area = areas.data() + (static_cast<std::size_t>(jj) * n + kk) * m * m;
          setup.step_block(jj, kk, b - 1, block.data());
          for (int r = 0; r < m; ++r) {
            const double left = setup.path(jj).increment(a, b - 1, r);
            for (int c = 0; c < m; ++c) {
              area[r * m + c] += block[r * m + c] + left * setup.path(kk).increment(b - 1, b, c);
            }
          }
        }
      }
      double total = 0.0;
      std::vector<double> col_acc(n, 0.0);
      for (int jj = 0; jj < n; ++jj) {
        double row_acc = 0.0;
        for (int kk = 0; kk < n; ++kk) {
          const double* area = areas.data() + (static_cast<std::size_t>(jj) * n + kk) * m * m;
          const double mag = std::pow(euclid(area, m * m), q);
          row_acc += mag;
          col_acc[kk] += mag;
          if (jj == kk) self_abs[jj][idx(a, b)] = euclid(area, m * m);
        }
        row_mean[jj][idx(a, b)] = std::pow(row_acc / n, 1.0 / q);
        total += row_acc;
      }
      for (int kk = 0; kk < n; ++kk) {
        col_mean[kk][idx(a, b)] = std::pow(col_acc[kk] / n, 1.0 / q);
      }
      full_mean[idx(a, b)] = std::pow(total / (static_cast<double>(n) * n), 1.0 / q);
    }
  }

  auto table_fn = [&idx](const std::vector<double>& table) {
    return [&table, idx](int a, int b) { return table[idx(a, b)]; };
  };

  const std::vector<double> shared_l1 = partition_sup_table(table_fn(level1_mean), p, K);
  const std::vector<double> shared_l2 = partition_sup_table(table_fn(full_mean), p / 2.0, K);

  FamilyTables out;
  out.K = K;
  out.v.assign(n, std::vector<double>(cells, 0.0));
  for (int i = 0; i < n; ++i) {
    const GridPath& path = setup.path(i);
    auto own_inc = [&path, m](int a, int b) {
      double acc = 0.0;
      for (int c = 0; c < m; ++c) {
        const double inc = path.increment(a, b, c);
        acc += inc * inc;
      }
      return std::sqrt(acc);
    };
    const std::vector<double> own = partition_sup_table(own_inc, p, K);
    const std::vector<double> self_v = partition_sup_table(table_fn(self_abs[i]), p / 2.0, K);
    const std::vector<double> row_v = partition_sup_table(table_fn(row_mean[i]), p / 2.0, K);
    const std::vector<double> col_v = partition_sup_table(table_fn(col_mean[i]), p / 2.0, K);
    for (std::size_t c = 0; c < cells; ++c) {
      out.v[i][c] = own[c] + shared_l1[c] + self_v[c] + row_v[c] + col_v[c] + shared_l2[c];
    }
  }

  // <v^{.,n}>_{q;[s,t],1-v}: 1-variation of the ell^q particle mean of v.
  std::vector<double> v_mean(cells, 0.0);
  for (int a = 0; a < N1; ++a) {
    for (int b = a + 1; b < N1; ++b) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += std::pow(out.v[i][idx(a, b)], q);
      v_mean[idx(a, b)] = std::pow(acc / n, 1.0 / q);
    }
  }
  out.envelope = partition_sup_table(table_fn(v_mean), 1.0, K);
  return out;
}

}  // namespace

std::vector<Control> empirical_control_family(const EmpiricalRoughSetup& setup, double p,
                                              double q) {
  if (!(p >= 2.0 && p < 3.0)) throw std::invalid_argument("p must lie in [2, 3)");
  if (q < 1.0) throw std::invalid_argument("q must be >= 1");
  const GridSpec& spec = setup.spec();
  const int N1 = spec.steps + 1;
  const FamilyTables tables = build_family_tables(setup, p, q);

  std::vector<Control> out;
  out.reserve(setup.size());
  for (int i = 0; i < setup.size(); ++i) {
    Control control;
    control.spec = spec;
    control.p = p;
    control.q = q;
    control.table.assign(static_cast<std::size_t>(N1) * N1, 0.0);
    for (int a = 0; a < N1; ++a) {
      for (int b = a + 1; b < N1; ++b) {
        const std::size_t c = static_cast<std::size_t>(a) * N1 + b;
        control.table[c] = tables.v[i][c] + tables.envelope[c] + (spec.time(b) - spec.time(a));
      }
    }
    out.push_back(std::move(control));
  }
  return out;
}

std::vector<Control> empirical_variation_family(const EmpiricalRoughSetup& setup, double p,
                                                double q) {
  const GridSpec& spec = setup.spec();
  const FamilyTables tables = build_family_tables(setup, p, q);
  std::vector<Control> out;
  out.reserve(setup.size());
  for (int i = 0; i < setup.size(); ++i) {
    Control control;
    control.spec = spec;
    control.p = p;
    control.q = q;
    control.table = tables.v[i];
    out.push_back(std::move(control));
  }
  return out;
}

Control empirical_control(const EmpiricalRoughSetup& setup, int i, double p, double q) {
  if (i < 0 || i >= setup.size()) throw std::out_of_range("particle index out of range");
  return empirical_control_family(setup, p, q)[i];
}

int superadditivity_violations(const Control& control, double tol) {
  const int K = control.spec.steps;
  int violations = 0;
  for (int r = 0; r <= K; ++r) {
    for (int s = r; s <= K; ++s) {
      for (int t = s; t <= K; ++t) {
        const double whole = control(r, t);
        const double split = control(r, s) + control(s, t);
        if (whole < split - tol * std::max(1.0, split)) ++violations;
      }
    }
  }
  return violations;
}

std::vector<int> greedy_times(const TwoIndexFn& varpi, double alpha, int start, int end) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (start > end) throw std::invalid_argument("empty window");
  std::vector<int> times = {start};
  int tau = start;
  while (tau < end) {
    int found = -1;
    double prev = 0.0;
    for (int u = tau + 1; u <= end; ++u) {
      const double value = varpi.eval(tau, u);
      if (value < prev - 1e-12 * std::max(1.0, prev)) {
        throw std::invalid_argument("varpi is not monotone in interval inclusion");
      }
      prev = std::max(prev, value);
      if (value >= alpha) {
        found = u;
        break;
      }
    }
    if (found < 0) break;
    times.push_back(found);
    tau = found;
  }
  return times;
}

int local_accumulation(const TwoIndexFn& varpi, double alpha, int k_a, int k_b) {
  return static_cast<int>(greedy_times(varpi, alpha, k_a, k_b).size()) - 1;
}

ControlledNormReport controlled_norm_report(const std::vector<double>& trajectory, int d,
                                            const std::vector<double>& deriv,
                                            const GridPath& driver, const Control& w, double p) {
  const GridSpec& spec = driver.spec;
  const int K = spec.steps;
  const int m = spec.dim;
  if (trajectory.size() != static_cast<std::size_t>(K + 1) * d ||
      deriv.size() != static_cast<std::size_t>(K + 1) * d * m) {
    throw std::invalid_argument("trajectory and derivative must live on the driver grid");
  }

  ControlledNormReport report;
  std::vector<double> remainder(d);
  for (int a = 0; a <= K; ++a) {
    for (int b = a + 1; b <= K; ++b) {
      const double wab = w(a, b);
      double xnum = 0.0, dnum = 0.0;
      for (int c = 0; c < d; ++c) {
        const double inc = trajectory[static_cast<std::size_t>(b) * d + c] -
                           trajectory[static_cast<std::size_t>(a) * d + c];
        xnum += inc * inc;
        double r = inc;
        for (int cc = 0; cc < m; ++cc) {
          r -= deriv[(static_cast<std::size_t>(a) * d + c) * m + cc] * driver.increment(a, b, cc);
        }
        remainder[c] = r;
      }
      for (int c = 0; c < d; ++c) {
        for (int cc = 0; cc < m; ++cc) {
          const double inc = deriv[(static_cast<std::size_t>(b) * d + c) * m + cc] -
                             deriv[(static_cast<std::size_t>(a) * d + c) * m + cc];
          dnum += inc * inc;
        }
      }
      xnum = std::sqrt(xnum);
      dnum = std::sqrt(dnum);
      const double rnum = euclid(remainder.data(), d);
      if (wab <= 0.0) {
        if (xnum > 0.0 || dnum > 0.0 || rnum > 0.0) report.infinite = true;
        continue;
      }
      const double w1p = std::pow(wab, 1.0 / p);
      const double w2p = std::pow(wab, 2.0 / p);
      report.path_norm = std::max(report.path_norm, xnum / w1p);
      report.deriv_norm = std::max(report.deriv_norm, dnum / w1p);
      report.remainder_norm = std::max(report.remainder_norm, rnum / w2p);
    }
  }
  return report;
}

}  // namespace roughchaos
