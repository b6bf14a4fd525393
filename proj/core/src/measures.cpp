#include "roughchaos/measures.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace roughchaos {

namespace {

std::vector<double> sorted_atoms_1d(const EmpiricalMeasure& mu) {
  if (mu.d != 1) throw std::invalid_argument("measure must be one-dimensional");
  if (mu.n < 1) throw std::invalid_argument("empty measure");
  std::vector<double> atoms(mu.atoms.begin(), mu.atoms.end());
  std::sort(atoms.begin(), atoms.end());
  return atoms;
}

}  // namespace

double wasserstein_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double r) {
  if (r < 1.0) throw std::invalid_argument("r must be >= 1");
  const std::vector<double> x = sorted_atoms_1d(a);
  const std::vector<double> y = sorted_atoms_1d(b);
  const std::int64_t na = a.n, nb = b.n;

  // Quantile coupling swept in integer units of 1/(na*nb): exact for both
  // equal and unequal atom counts.
  double acc = 0.0;
  std::int64_t unit = 0;
  std::int64_t ia = 0, ib = 0;
  const std::int64_t total = na * nb;
  while (unit < total) {
    const std::int64_t bound_a = (ia + 1) * nb;
    const std::int64_t bound_b = (ib + 1) * na;
    const std::int64_t next = std::min(bound_a, bound_b);
    acc += static_cast<double>(next - unit) * std::pow(std::abs(x[ia] - y[ib]), r);
    unit = next;
    if (bound_a == next) ++ia;
    if (bound_b == next) ++ib;
  }
  return std::pow(acc / static_cast<double>(total), 1.0 / r);
}

namespace {

// Shortest-augmenting-path assignment with dual potentials, O(n^3).
double assignment_cost(const std::vector<double>& cost, int n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) {
    total += cost[static_cast<std::size_t>(match[j] - 1) * n + (j - 1)];
  }
  return total;
}

}  // namespace

double wasserstein_assignment(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double r) {
  if (r < 1.0) throw std::invalid_argument("r must be >= 1");
  if (a.n != b.n) throw std::invalid_argument("assignment transport needs equal atom counts");
  if (a.d != b.d) throw std::invalid_argument("dimension mismatch");
  if (a.n < 1) throw std::invalid_argument("empty measure");
  const int n = a.n;
  const int d = a.d;
  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double dist2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double diff = a.atom(i)[c] - b.atom(j)[c];
        dist2 += diff * diff;
      }
      cost[static_cast<std::size_t>(i) * n + j] = std::pow(std::sqrt(dist2), r);
    }
  }
  return std::pow(assignment_cost(cost, n) / n, 1.0 / r);
}

ReferenceLaw1D standard_normal_law() {
  const boost::math::normal_distribution<double> dist(0.0, 1.0);
  ReferenceLaw1D law;
  law.quantile = [dist](double u) { return boost::math::quantile(dist, u); };
  law.cdf = [dist](double x) { return boost::math::cdf(dist, x); };
  // int_0^u Phi^{-1}(v) dv = -phi(Phi^{-1}(u)); the limits at 0 and 1 vanish.
  law.quantile_integral = [dist](double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return -boost::math::pdf(dist, boost::math::quantile(dist, u));
  };
  return law;
}

ReferenceLaw1D uniform_unit_law() {
  ReferenceLaw1D law;
  law.quantile = [](double u) { return u; };
  law.cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  law.quantile_integral = [](double u) { return 0.5 * u * u; };
  return law;
}

double wasserstein_1d_vs_law(const EmpiricalMeasure& a, const ReferenceLaw1D& law) {
  const std::vector<double> x = sorted_atoms_1d(a);
  const int n = a.n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    const double split = std::clamp(law.cdf(x[i]), lo, hi);
    // Below split the quantile sits under x[i], above it sits over.
    acc += x[i] * (split - lo) - (law.quantile_integral(split) - law.quantile_integral(lo));
    acc += (law.quantile_integral(hi) - law.quantile_integral(split)) - x[i] * (hi - split);
  }
  return acc;
}

RateFit fit_rate(const std::vector<double>& ns, const std::vector<double>& errors,
                 bool log_correction) {
  if (ns.size() != errors.size()) throw std::invalid_argument("ns and errors must align");
  if (ns.size() < 3) throw std::invalid_argument("rate fit needs at least 3 points");

  RateFit fit;
  fit.points.reserve(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(errors[i] > 0.0)) throw std::invalid_argument("errors must be positive");
    double err = errors[i];
    if (log_correction) err /= std::log1p(ns[i]);
    fit.points.emplace_back(std::log(ns[i]), std::log(err));
  }

  const double count = static_cast<double>(fit.points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [px, py] : fit.points) {
    sx += px;
    sy += py;
  }
  const double mx = sx / count, my = sy / count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [px, py] : fit.points) {
    sxx += (px - mx) * (px - mx);
    sxy += (px - mx) * (py - my);
    syy += (py - my) * (py - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("all ns coincide");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (const auto& [px, py] : fit.points) {
    const double residual = py - (fit.intercept + fit.slope * px);
    sse += residual * residual;
  }
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - sse / syy;
  return fit;
}

}  // namespace roughchaos
