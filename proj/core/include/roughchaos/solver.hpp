#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "roughchaos/coefficients.hpp"
#include "roughchaos/grid.hpp"
#include "roughchaos/rough_lift.hpp"

namespace roughchaos {

enum class SchemeKind { euler, compensated };

std::string scheme_name(SchemeKind scheme);

/// Raised when a state turns non-finite; the experiment layer flags the
/// replication instead of poisoning ensemble statistics.
struct BlowUpError : std::runtime_error {
  int step;
  explicit BlowUpError(int step_index)
      : std::runtime_error("non-finite state at step " + std::to_string(step_index)),
        step(step_index) {}
};

/// Particle trajectories on the grid, states row-major (K+1) x n x d.
struct TrajectorySet {
  GridSpec spec;
  int n = 0;
  int d = 1;
  std::vector<double> states;
  SchemeKind scheme = SchemeKind::compensated;
  SeedTag seed_tag;

  double state(int k, int i, int c) const {
    return states[(static_cast<std::size_t>(k) * n + i) * d + c];
  }
  const double* frame(int k) const {
    return states.data() + static_cast<std::size_t>(k) * n * d;
  }
  EmpiricalMeasureView measure_at(int k) const { return {frame(k), n, d}; }
};

/// Grid-aligned flow of frozen empirical measures (one view per grid time).
/// flow_of precomputes the per-time atom means so companions do not reduce
/// the reference cloud once per step each.
struct MeasureFlow {
  const TrajectorySet* source = nullptr;
  std::vector<double> means;  // (K+1) x d

  EmpiricalMeasureView at(int k) const {
    EmpiricalMeasureView view = source->measure_at(k);
    if (!means.empty()) {
      view.mean_hint = means.data() + static_cast<std::size_t>(k) * source->d;
    }
    return view;
  }
};

MeasureFlow flow_of(const TrajectorySet& traj);

/// One compensated Riemann-sum step at time t_k: every particle advances by
///   F(X^i, mu) W^i_{k,k+1} + dxF . F . W2^i_{k,k+1}
///   + (1/n) sum_j D_mu F(X^i, mu)(X^j) . F(X^j, mu) . W2^{j,i}_{k,k+1},
/// all coefficients read at the time-t_k states, cross blocks produced on
/// the fly from increments. states_k is n x d row-major.
std::vector<double> step_compensated(const std::vector<double>& states_k,
                                     const EmpiricalRoughSetup& setup,
                                     const MeanFieldCoefficient& coeff, int k);

std::vector<double> step_euler(const std::vector<double>& states_k,
                               const EmpiricalRoughSetup& setup,
                               const MeanFieldCoefficient& coeff, int k);

/// Integrates the n-particle system over the whole grid; x0 is n x d.
TrajectorySet solve_particle_system(const EmpiricalRoughSetup& setup,
                                    const MeanFieldCoefficient& coeff,
                                    const std::vector<double>& x0, SchemeKind scheme);

/// Companion trajectory of the coupling: same driver path and self areas,
/// but the measure argument is the exogenous frozen flow. The advance per
/// step is F(x, mu_k) W_{k,k+1} + dxF . F . W2_{k,k+1}; the measure-direction
/// compensator is dropped (the flow is a time-dependent parameter).
/// Returns (K+1) x d row-major.
std::vector<double> solve_frozen_measure(const GridPath& path, const Level2Blocks& self_blocks,
                                         const MeanFieldCoefficient& coeff,
                                         const MeasureFlow& flow, const double* x0);

/// Gubinelli derivative of a solver trajectory, delta_x X_t = F(X_t, mu^n_t):
/// (K+1) x d x m row-major, for controlled-path diagnostics.
std::vector<double> gubinelli_derivative(const TrajectorySet& traj,
                                         const MeanFieldCoefficient& coeff);

struct CouplingErrors {
  std::vector<double> per_particle_sup;  // sup_t |Xbar^i_t - X^i_t| per particle
  double sup_w1 = 0.0;                   // sup_t d_1(mu^n_t, mubar^n_t)
};

/// Exact grid maxima of the coupling gaps; companions[i] is (K+1) x d.
CouplingErrors coupling_errors(const TrajectorySet& coupled,
                               const std::vector<std::vector<double>>& companions);

}  // namespace roughchaos
