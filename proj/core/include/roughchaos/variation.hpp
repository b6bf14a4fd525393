#pragma once

#include <functional>
#include <string>
#include <vector>

#include "roughchaos/grid.hpp"
#include "roughchaos/rough_lift.hpp"

namespace roughchaos {

/// Non-negative function of grid index pairs (a <= b), vanishing on the
/// diagonal. The continuity tag is metadata only.
struct TwoIndexFn {
  std::function<double(int, int)> eval;
  std::string continuity_tag;
};

/// sup over sub-partitions of [k_a, k_b] of sum |g(t_{i-1}, t_i)|^p, by exact
/// dynamic programming over grid points; O(L^2) evaluations of g.
double p_variation_power(const std::function<double(int, int)>& g, double p, int k_a, int k_b);

/// The p-variation semi-norm itself, p_variation_power^{1/p}.
double p_variation(const std::function<double(int, int)>& g, double p, int k_a, int k_b);

/// p-variation of a scalar path sampled on the grid (one value per point).
double p_variation(const std::vector<double>& values, double p, int k_a, int k_b);

/// max over grid pairs of g(a, b) / (t_b - t_a)^exponent. Level-1 Hoelder
/// semi-norms pass exponent = alpha, level-2 pass 2*alpha.
double holder_norm(const std::function<double(int, int)>& g, double exponent,
                   const GridSpec& spec, int k_a, int k_b);
double holder_norm(const GridPath& path, double alpha, int k_a, int k_b);
double holder_norm_level2(const Level2Blocks& blocks, const GridPath& path_i,
                          const GridPath& path_j, double alpha, int k_a, int k_b);

/// Superadditive control on grid pairs, stored as a dense table.
struct Control {
  GridSpec spec;
  double p = 2.5;
  double q = 8.0;
  std::vector<double> table;  // (K+1)^2 entries, (a, b) at a*(K+1)+b, a <= b used

  double operator()(int a, int b) const {
    return table[static_cast<std::size_t>(a) * (spec.steps + 1) + b];
  }
  TwoIndexFn as_fn() const;
};

/// Empirical control of particle i:
///   w(s,t) = v_p^{i,n}(s,t) + <v_p^{.,n}>_{q;[s,t],1-v} + (t - s),
/// where v_p^{i,n} sums the six variation terms of the empirical set-up
/// (own path, ell^q particle mean of paths, own area, both one-sided ell^q
/// area means, and the two-sided mean), each a sup over grid sub-partitions,
/// and the middle term is the 1-variation of the ell^q particle mean of v.
/// Costs O(K^2 n^2 m^2 + n K^3); intended for diagnostic scales.
Control empirical_control(const EmpiricalRoughSetup& setup, int i, double p, double q);

/// All n controls in one pass (the shared terms are computed once).
std::vector<Control> empirical_control_family(const EmpiricalRoughSetup& setup, double p,
                                              double q);

/// The raw v_p^{i,n} tables of the family (diagnostics: the accumulation
/// counter of particle i runs on varpi = (v_p^{i,n})^{1/p}).
std::vector<Control> empirical_variation_family(const EmpiricalRoughSetup& setup, double p,
                                                double q);

/// Count of strict superadditivity violations w(r,t) < w(r,s) + w(s,t) - tol
/// over all grid triples r <= s <= t.
int superadditivity_violations(const Control& control, double tol = 1e-9);

/// Greedy stopping times on the grid: tau_0 = start, tau_{n+1} the first grid
/// point u with varpi(tau_n, u) >= alpha; stops once no such point <= end
/// exists. Throws if varpi decreases along a scan (non-monotone input).
std::vector<int> greedy_times(const TwoIndexFn& varpi, double alpha, int start, int end);

/// Local accumulation N_varpi([t_a, t_b], alpha): number of greedy times past
/// tau_0 that land inside the window.
int local_accumulation(const TwoIndexFn& varpi, double alpha, int k_a, int k_b);

struct ControlledNormReport {
  double path_norm = 0.0;       // sup |X_{s,t}| / w(s,t)^{1/p}
  double deriv_norm = 0.0;      // sup |delta_x X_{s,t}| / w(s,t)^{1/p}
  double remainder_norm = 0.0;  // sup |R^X_{s,t}| / w(s,t)^{2/p}
  bool infinite = false;        // some ratio had w == 0 with a nonzero numerator
};

/// Norms of a controlled trajectory with remainder
/// R^X_{s,t} = X_{s,t} - delta_x X_s W_{s,t} (the measure-direction derivative
/// is identically zero by the solver convention).
/// trajectory is (K+1) x d, deriv is (K+1) x d x m, both row-major.
ControlledNormReport controlled_norm_report(const std::vector<double>& trajectory, int d,
                                            const std::vector<double>& deriv,
                                            const GridPath& driver, const Control& w, double p);

}  // namespace roughchaos
