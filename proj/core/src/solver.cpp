#include "roughchaos/solver.hpp"

#include <cmath>
#include <cstring>

#include "roughchaos/measures.hpp"
#include "roughchaos/summation.hpp"

namespace roughchaos {

std::string scheme_name(SchemeKind scheme) {
  return scheme == SchemeKind::euler ? "euler" : "compensated";
}

MeasureFlow flow_of(const TrajectorySet& traj) {
  MeasureFlow flow;
  flow.source = &traj;
  flow.means.resize(static_cast<std::size_t>(traj.spec.steps + 1) * traj.d);
  for (int k = 0; k <= traj.spec.steps; ++k) {
    const std::vector<double> mean = traj.measure_at(k).mean();
    std::memcpy(flow.means.data() + static_cast<std::size_t>(k) * traj.d, mean.data(),
                sizeof(double) * traj.d);
  }
  return flow;
}

namespace {

bool all_finite(const double* v, std::size_t len) {
  for (std::size_t e = 0; e < len; ++e) {
    if (!std::isfinite(v[e])) return false;
  }
  return true;
}

// One step of either scheme; out receives the time-t_{k+1} frame (n x d).
void advance_frame(const double* states, const EmpiricalRoughSetup& setup,
                   const MeanFieldCoefficient& coeff, int k, bool compensated, double* out) {
  const GridSpec& spec = setup.spec();
  const int n = setup.size();
  const int d = coeff.d;
  const int m = coeff.m;
  EmpiricalMeasureView mu{states, n, d, nullptr};
  const std::vector<double> mu_mean = mu.mean();
  mu.mean_hint = mu_mean.data();

  // Step increments a^i and coefficient rows F(X^j, mu), one evaluation per
  // particle.
  std::vector<double> inc(static_cast<std::size_t>(n) * m);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < m; ++c) inc[static_cast<std::size_t>(i) * m + c] = setup.path(i).increment(k, k + 1, c);
  }
  std::vector<double> F_all(static_cast<std::size_t>(n) * d * m);
  for (int j = 0; j < n; ++j) {
    coeff.eval_F(mu.atom(j), mu, F_all.data() + static_cast<std::size_t>(j) * d * m);
  }

  for (int i = 0; i < n; ++i) {
    const double* Fi = F_all.data() + static_cast<std::size_t>(i) * d * m;
    const double* ai = inc.data() + static_cast<std::size_t>(i) * m;
    double* xi = out + static_cast<std::size_t>(i) * d;
    for (int c = 0; c < d; ++c) {
      double advance = 0.0;
      for (int cc = 0; cc < m; ++cc) advance += Fi[c * m + cc] * ai[cc];
      xi[c] = states[static_cast<std::size_t>(i) * d + c] + advance;
    }
  }

  if (compensated) {
    // FA_j = F(X^j, mu) a^j, reused by every cross term (the lazy cross block
    // (1/2) a^j (x) a^i contracts to (1/2) FA_j (x) a^i).
    std::vector<double> FA(static_cast<std::size_t>(n) * d, 0.0);
    for (int j = 0; j < n; ++j) {
      const double* Fj = F_all.data() + static_cast<std::size_t>(j) * d * m;
      const double* aj = inc.data() + static_cast<std::size_t>(j) * m;
      for (int l = 0; l < d; ++l) {
        double acc = 0.0;
        for (int cc = 0; cc < m; ++cc) acc += Fj[l * m + cc] * aj[cc];
        FA[static_cast<std::size_t>(j) * d + l] = acc;
      }
    }

    std::vector<double> G(d, 0.0);
    if (coeff.dmu_constant_in_z) {
      std::vector<double> column(n);
      for (int l = 0; l < d; ++l) {
        for (int j = 0; j < n; ++j) column[j] = FA[static_cast<std::size_t>(j) * d + l];
        G[l] = permutation_invariant_mean(column);
      }
    }

    std::vector<double> dxF(static_cast<std::size_t>(d) * m * d);
    std::vector<double> dmuF(static_cast<std::size_t>(d) * m * d);
    std::vector<double> M1(static_cast<std::size_t>(d) * m);
    std::vector<double> contrib(static_cast<std::size_t>(n) * d);
    std::vector<double> column(n);

    for (int i = 0; i < n; ++i) {
      const double* Fi = F_all.data() + static_cast<std::size_t>(i) * d * m;
      const double* ai = inc.data() + static_cast<std::size_t>(i) * m;
      const double* W2 = setup.self_blocks(i).block(k);
      double* xi = out + static_cast<std::size_t>(i) * d;

      // dxF . F . W2^i  via M1[l][jj] = sum_kk F[l][kk] W2[kk][jj].
      coeff.eval_dxF(mu.atom(i), mu, dxF.data());
      for (int l = 0; l < d; ++l) {
        for (int jj = 0; jj < m; ++jj) {
          double acc = 0.0;
          for (int kk = 0; kk < m; ++kk) acc += Fi[l * m + kk] * W2[kk * m + jj];
          M1[static_cast<std::size_t>(l) * m + jj] = acc;
        }
      }
      for (int c = 0; c < d; ++c) {
        double advance = 0.0;
        for (int jj = 0; jj < m; ++jj) {
          for (int l = 0; l < d; ++l) {
            advance += dxF[(static_cast<std::size_t>(c) * m + jj) * d + l] *
                       M1[static_cast<std::size_t>(l) * m + jj];
          }
        }
        xi[c] += advance;
      }

      if (coeff.dmu_constant_in_z) {
        coeff.eval_dmuF(mu.atom(i), mu, mu.atom(i), dmuF.data());
        for (int c = 0; c < d; ++c) {
          double advance = 0.0;
          for (int jj = 0; jj < m; ++jj) {
            for (int l = 0; l < d; ++l) {
              advance += dmuF[(static_cast<std::size_t>(c) * m + jj) * d + l] * 0.5 * G[l] * ai[jj];
            }
          }
          xi[c] += advance;
        }
      } else {
        // Full pair sum, order-invariant so particle relabeling permutes the
        // output exactly.
        for (int j = 0; j < n; ++j) {
          coeff.eval_dmuF(mu.atom(i), mu, mu.atom(j), dmuF.data());
          const double* FAj = FA.data() + static_cast<std::size_t>(j) * d;
          for (int c = 0; c < d; ++c) {
            double acc = 0.0;
            for (int jj = 0; jj < m; ++jj) {
              for (int l = 0; l < d; ++l) {
                acc += dmuF[(static_cast<std::size_t>(c) * m + jj) * d + l] * 0.5 * FAj[l] * ai[jj];
              }
            }
            contrib[static_cast<std::size_t>(j) * d + c] = acc;
          }
        }
        for (int c = 0; c < d; ++c) {
          for (int j = 0; j < n; ++j) column[j] = contrib[static_cast<std::size_t>(j) * d + c];
          xi[c] += permutation_invariant_mean(column);
        }
      }
    }
  }

  (void)spec;
}

}  // namespace

std::vector<double> step_compensated(const std::vector<double>& states_k,
                                     const EmpiricalRoughSetup& setup,
                                     const MeanFieldCoefficient& coeff, int k) {
  if (k < 0 || k >= setup.spec().steps) throw std::out_of_range("step index out of range");
  std::vector<double> out(states_k.size());
  advance_frame(states_k.data(), setup, coeff, k, true, out.data());
  if (!all_finite(out.data(), out.size())) throw BlowUpError(k);
  return out;
}

std::vector<double> step_euler(const std::vector<double>& states_k,
                               const EmpiricalRoughSetup& setup,
                               const MeanFieldCoefficient& coeff, int k) {
  if (k < 0 || k >= setup.spec().steps) throw std::out_of_range("step index out of range");
  std::vector<double> out(states_k.size());
  advance_frame(states_k.data(), setup, coeff, k, false, out.data());
  if (!all_finite(out.data(), out.size())) throw BlowUpError(k);
  return out;
}

TrajectorySet solve_particle_system(const EmpiricalRoughSetup& setup,
                                    const MeanFieldCoefficient& coeff,
                                    const std::vector<double>& x0, SchemeKind scheme) {
  const GridSpec& spec = setup.spec();
  const int n = setup.size();
  const int d = coeff.d;
  if (coeff.m != spec.dim) throw std::invalid_argument("coefficient and driver dimensions differ");
  if (x0.size() != static_cast<std::size_t>(n) * d) throw std::invalid_argument("x0 must be n x d");
  if (!all_finite(x0.data(), x0.size())) throw std::invalid_argument("x0 must be finite");

  TrajectorySet traj;
  traj.spec = spec;
  traj.n = n;
  traj.d = d;
  traj.scheme = scheme;
  traj.states.resize(static_cast<std::size_t>(spec.steps + 1) * n * d);
  std::memcpy(traj.states.data(), x0.data(), sizeof(double) * x0.size());

  const bool compensated = scheme == SchemeKind::compensated;
  for (int k = 0; k < spec.steps; ++k) {
    const double* current = traj.states.data() + static_cast<std::size_t>(k) * n * d;
    double* next = traj.states.data() + static_cast<std::size_t>(k + 1) * n * d;
    advance_frame(current, setup, coeff, k, compensated, next);
    if (!all_finite(next, static_cast<std::size_t>(n) * d)) throw BlowUpError(k);
  }
  return traj;
}

std::vector<double> solve_frozen_measure(const GridPath& path, const Level2Blocks& self_blocks,
                                         const MeanFieldCoefficient& coeff,
                                         const MeasureFlow& flow, const double* x0) {
  const GridSpec& spec = path.spec;
  if (self_blocks.spec != spec) throw std::invalid_argument("blocks and path grids differ");
  if (flow.source == nullptr || flow.source->spec != spec) {
    throw std::invalid_argument("flow must be grid-aligned with the path");
  }
  const int d = coeff.d;
  const int m = coeff.m;

  std::vector<double> out(static_cast<std::size_t>(spec.steps + 1) * d);
  std::memcpy(out.data(), x0, sizeof(double) * d);

  std::vector<double> F(static_cast<std::size_t>(d) * m);
  std::vector<double> dxF(static_cast<std::size_t>(d) * m * d);
  std::vector<double> M1(static_cast<std::size_t>(d) * m);
  for (int k = 0; k < spec.steps; ++k) {
    const double* x = out.data() + static_cast<std::size_t>(k) * d;
    double* next = out.data() + static_cast<std::size_t>(k + 1) * d;
    const EmpiricalMeasureView mu = flow.at(k);
    coeff.eval_F(x, mu, F.data());
    coeff.eval_dxF(x, mu, dxF.data());
    const double* W2 = self_blocks.block(k);
    for (int l = 0; l < d; ++l) {
      for (int jj = 0; jj < m; ++jj) {
        double acc = 0.0;
        for (int kk = 0; kk < m; ++kk) acc += F[l * m + kk] * W2[kk * m + jj];
        M1[static_cast<std::size_t>(l) * m + jj] = acc;
      }
    }
    for (int c = 0; c < d; ++c) {
      double advance = 0.0;
      for (int cc = 0; cc < m; ++cc) advance += F[c * m + cc] * path.increment(k, k + 1, cc);
      for (int jj = 0; jj < m; ++jj) {
        for (int l = 0; l < d; ++l) {
          advance += dxF[(static_cast<std::size_t>(c) * m + jj) * d + l] *
                     M1[static_cast<std::size_t>(l) * m + jj];
        }
      }
      next[c] = x[c] + advance;
    }
    if (!all_finite(next, d)) throw BlowUpError(k);
  }
  return out;
}

std::vector<double> gubinelli_derivative(const TrajectorySet& traj,
                                         const MeanFieldCoefficient& coeff) {
  const int K = traj.spec.steps;
  const int d = coeff.d;
  const int m = coeff.m;
  std::vector<double> out(static_cast<std::size_t>(K + 1) * traj.n * d * m);
  for (int k = 0; k <= K; ++k) {
    EmpiricalMeasureView mu = traj.measure_at(k);
    const std::vector<double> mean = mu.mean();
    mu.mean_hint = mean.data();
    for (int i = 0; i < traj.n; ++i) {
      coeff.eval_F(mu.atom(i), mu,
                   out.data() + (static_cast<std::size_t>(k) * traj.n + i) * d * m);
    }
  }
  return out;
}

CouplingErrors coupling_errors(const TrajectorySet& coupled,
                               const std::vector<std::vector<double>>& companions) {
  const int n = coupled.n;
  const int d = coupled.d;
  const int K = coupled.spec.steps;
  if (static_cast<int>(companions.size()) != n) {
    throw std::invalid_argument("need one companion per particle");
  }
  for (const auto& companion : companions) {
    if (companion.size() != static_cast<std::size_t>(K + 1) * d) {
      throw std::invalid_argument("companion grid mismatch");
    }
  }

  CouplingErrors errors;
  errors.per_particle_sup.assign(n, 0.0);
  EmpiricalMeasure bar;
  bar.n = n;
  bar.d = d;
  bar.atoms.resize(static_cast<std::size_t>(n) * d);
  for (int k = 0; k <= K; ++k) {
    for (int i = 0; i < n; ++i) {
      double gap2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double diff =
            companions[i][static_cast<std::size_t>(k) * d + c] - coupled.state(k, i, c);
        gap2 += diff * diff;
        bar.atoms[static_cast<std::size_t>(i) * d + c] =
            companions[i][static_cast<std::size_t>(k) * d + c];
      }
      errors.per_particle_sup[i] = std::max(errors.per_particle_sup[i], std::sqrt(gap2));
    }
    EmpiricalMeasure now;
    now.n = n;
    now.d = d;
    now.atoms.assign(coupled.frame(k), coupled.frame(k) + static_cast<std::size_t>(n) * d);
    const double w1 = d == 1 ? wasserstein_1d(now, bar, 1.0) : wasserstein_assignment(now, bar, 1.0);
    errors.sup_w1 = std::max(errors.sup_w1, w1);
  }
  return errors;
}

}  // namespace roughchaos
