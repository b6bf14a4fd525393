#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace roughchaos {

/// Uniform-weight empirical measure, atoms row-major n x d.
struct EmpiricalMeasure {
  std::vector<double> atoms;
  int n = 0;
  int d = 1;

  const double* atom(int j) const { return atoms.data() + static_cast<std::size_t>(j) * d; }
};

/// r-Wasserstein distance in d = 1 via the monotone rearrangement; unequal
/// atom counts integrate the quantile coupling exactly on the merged
/// quantile grid.
double wasserstein_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double r);

/// Exact optimal assignment on cost |x - y|^r between equal-size clouds in
/// any dimension (shortest augmenting paths, cubic time). Throws on a size
/// mismatch: unequal-size general-d transport is out of scope.
double wasserstein_assignment(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double r);

/// Continuous scalar law exposed through its quantile function, CDF and the
/// antiderivative u -> int_0^u quantile(v) dv, enough to integrate
/// |F_n^{-1} - F^{-1}| exactly.
struct ReferenceLaw1D {
  std::function<double(double)> quantile;
  std::function<double(double)> cdf;
  std::function<double(double)> quantile_integral;
};

ReferenceLaw1D standard_normal_law();
ReferenceLaw1D uniform_unit_law();

/// W_1 between an empirical measure (d = 1) and a continuous law, computed
/// as the exact integral of |F_n^{-1} - F^{-1}| on the merged quantile grid.
double wasserstein_1d_vs_law(const EmpiricalMeasure& a, const ReferenceLaw1D& law);

/// Least-squares fit of log error against log n (natural logs).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (log n, log error)
};

/// When log_correction is set the errors are divided by ln(1+n) before
/// fitting (the d = 2 rate carries that factor). Needs >= 3 points and
/// positive errors.
RateFit fit_rate(const std::vector<double>& ns, const std::vector<double>& errors,
                 bool log_correction);

}  // namespace roughchaos
