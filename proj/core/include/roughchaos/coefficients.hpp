#pragma once

#include <functional>
#include <string>
#include <vector>

namespace roughchaos {

/// Uniform empirical measure over n particle states (row-major n x d).
/// mean_hint, when set, must equal the atom mean; the solver fills it so a
/// coefficient evaluated once per particle does not recompute the mean n
/// times per step.
struct EmpiricalMeasureView {
  const double* states = nullptr;
  int n = 0;
  int d = 0;
  const double* mean_hint = nullptr;

  double state(int j, int c) const { return states[static_cast<std::size_t>(j) * d + c]; }
  const double* atom(int j) const { return states + static_cast<std::size_t>(j) * d; }

  /// Mean of the atoms, order-invariant under atom permutations.
  std::vector<double> mean() const;
};

/// Diffusivity F(x, mu) with space derivative and Lions derivative.
/// Layouts: F is d x m; dxF and dmuF are d x m x d, indexed
/// [output][driver component][direction]. Callbacks must be pure.
struct MeanFieldCoefficient {
  int d = 1;
  int m = 1;
  double lipschitz_bound = 1.0;
  /// D_mu F(x, mu)(z) does not depend on z (moment family); lets the solver
  /// collapse the pair sum to a single particle average.
  bool dmu_constant_in_z = false;

  std::function<void(const double* x, const EmpiricalMeasureView&, double* out)> eval_F;
  std::function<void(const double* x, const EmpiricalMeasureView&, double* out)> eval_dxF;
  std::function<void(const double* x, const EmpiricalMeasureView&, const double* z, double* out)>
      eval_dmuF;
};

/// Interaction kernel f(x, y) in R^{d x m} with its partial derivatives
/// (d x m x d each).
struct ConvolutionKernel {
  std::function<void(const double* x, const double* y, double* out)> f;
  std::function<void(const double* x, const double* y, double* out)> df_dx;
  std::function<void(const double* x, const double* y, double* out)> df_dy;
};

/// F(x, mu) = mean of f(x, Y): dxF averages df_dx and the Lions derivative is
/// D_mu F(x, mu)(z) = df_dy(x, z).
MeanFieldCoefficient make_convolution(ConvolutionKernel kernel, int d, int m,
                                      double lipschitz_bound);

/// g(x, mbar) in R^{d x m} of the state and the measure mean, with partial
/// derivatives (d x m x d each).
struct MomentFunction {
  std::function<void(const double* x, const double* mean, double* out)> g;
  std::function<void(const double* x, const double* mean, double* out)> dg_dx;
  std::function<void(const double* x, const double* mean, double* out)> dg_dm;
};

/// F(x, mu) = g(x, mean(mu)): the Lions derivative dg_dm(x, mean) is constant
/// in z.
MeanFieldCoefficient make_moment(MomentFunction fn, int d, int m, double lipschitz_bound);

/// Projection of the Wasserstein derivative onto the product space:
/// d_{x^j} F(x^i, mu^n) = delta_{ij} dxF(x^i, mu^n) + (1/n) D_mu F(x^i, mu^n)(x^j).
/// Returns d x m x d, row-major.
std::vector<double> empirical_projection_grad(const MeanFieldCoefficient& coeff, int i, int j,
                                              const EmpiricalMeasureView& states);

/// Built-in scalar (d = m = 1) families selectable by name in experiment
/// configs: "conv_tanh" is f(x,y) = a tanh(x - y), "moment_tanh" is
/// g(x, mbar) = a tanh(x) + b tanh(mbar).
MeanFieldCoefficient make_builtin(const std::string& name, double a, double b);

}  // namespace roughchaos
