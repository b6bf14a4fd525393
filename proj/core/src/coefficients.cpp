#include "roughchaos/coefficients.hpp"

#include <cmath>
#include <stdexcept>

#include "roughchaos/summation.hpp"

namespace roughchaos {

std::vector<double> EmpiricalMeasureView::mean() const {
  if (mean_hint != nullptr) return std::vector<double>(mean_hint, mean_hint + d);
  std::vector<double> out(d, 0.0);
  std::vector<double> column(n);
  for (int c = 0; c < d; ++c) {
    for (int j = 0; j < n; ++j) column[j] = state(j, c);
    out[c] = permutation_invariant_mean(column);
  }
  return out;
}

MeanFieldCoefficient make_convolution(ConvolutionKernel kernel, int d, int m,
                                      double lipschitz_bound) {
  if (d < 1 || m < 1) throw std::invalid_argument("dimensions must be positive");
  MeanFieldCoefficient coeff;
  coeff.d = d;
  coeff.m = m;
  coeff.lipschitz_bound = lipschitz_bound;
  coeff.dmu_constant_in_z = false;

  // Atom averages are order-invariant so F(x, mu^n) is exactly permutation
  // invariant.
  auto average = [d, m](const std::function<void(const double*, const double*, double*)>& fn,
                        const double* x, const EmpiricalMeasureView& mu, double* out, int len) {
    std::vector<double> buffer(static_cast<std::size_t>(mu.n) * len);
    for (int j = 0; j < mu.n; ++j) {
      fn(x, mu.atom(j), buffer.data() + static_cast<std::size_t>(j) * len);
    }
    std::vector<double> column(mu.n);
    for (int e = 0; e < len; ++e) {
      for (int j = 0; j < mu.n; ++j) column[j] = buffer[static_cast<std::size_t>(j) * len + e];
      out[e] = permutation_invariant_mean(column);
    }
    (void)d;
    (void)m;
  };

  auto f = kernel.f;
  auto dfx = kernel.df_dx;
  auto dfy = kernel.df_dy;
  coeff.eval_F = [average, f, d, m](const double* x, const EmpiricalMeasureView& mu, double* out) {
    average(f, x, mu, out, d * m);
  };
  coeff.eval_dxF = [average, dfx, d, m](const double* x, const EmpiricalMeasureView& mu,
                                        double* out) { average(dfx, x, mu, out, d * m * d); };
  coeff.eval_dmuF = [dfy](const double* x, const EmpiricalMeasureView&, const double* z,
                          double* out) { dfy(x, z, out); };
  return coeff;
}

MeanFieldCoefficient make_moment(MomentFunction fn, int d, int m, double lipschitz_bound) {
  if (d < 1 || m < 1) throw std::invalid_argument("dimensions must be positive");
  MeanFieldCoefficient coeff;
  coeff.d = d;
  coeff.m = m;
  coeff.lipschitz_bound = lipschitz_bound;
  coeff.dmu_constant_in_z = true;

  auto g = fn.g;
  auto dgx = fn.dg_dx;
  auto dgm = fn.dg_dm;
  coeff.eval_F = [g](const double* x, const EmpiricalMeasureView& mu, double* out) {
    const std::vector<double> mean = mu.mean();
    g(x, mean.data(), out);
  };
  coeff.eval_dxF = [dgx](const double* x, const EmpiricalMeasureView& mu, double* out) {
    const std::vector<double> mean = mu.mean();
    dgx(x, mean.data(), out);
  };
  coeff.eval_dmuF = [dgm](const double* x, const EmpiricalMeasureView& mu, const double*,
                          double* out) {
    const std::vector<double> mean = mu.mean();
    dgm(x, mean.data(), out);
  };
  return coeff;
}

std::vector<double> empirical_projection_grad(const MeanFieldCoefficient& coeff, int i, int j,
                                              const EmpiricalMeasureView& states) {
  if (i < 0 || i >= states.n || j < 0 || j >= states.n) {
    throw std::out_of_range("particle index out of range");
  }
  const int len = coeff.d * coeff.m * coeff.d;
  std::vector<double> out(len, 0.0);
  std::vector<double> dmu(len);
  coeff.eval_dmuF(states.atom(i), states, states.atom(j), dmu.data());
  const double scale = 1.0 / states.n;
  for (int e = 0; e < len; ++e) out[e] = scale * dmu[e];
  if (i == j) {
    std::vector<double> dx(len);
    coeff.eval_dxF(states.atom(i), states, dx.data());
    for (int e = 0; e < len; ++e) out[e] += dx[e];
  }
  return out;
}

namespace {

double sech2(double v) {
  const double c = std::cosh(v);
  return 1.0 / (c * c);
}

}  // namespace

MeanFieldCoefficient make_builtin(const std::string& name, double a, double b) {
  if (name == "conv_tanh") {
    // f(x, y) = a tanh(x - y); bounded with bounded derivatives of all orders.
    ConvolutionKernel kernel;
    kernel.f = [a](const double* x, const double* y, double* out) { out[0] = a * std::tanh(x[0] - y[0]); };
    kernel.df_dx = [a](const double* x, const double* y, double* out) { out[0] = a * sech2(x[0] - y[0]); };
    kernel.df_dy = [a](const double* x, const double* y, double* out) { out[0] = -a * sech2(x[0] - y[0]); };
    return make_convolution(std::move(kernel), 1, 1, std::abs(a));
  }
  if (name == "moment_tanh") {
    // g(x, mbar) = a tanh(x) + b tanh(mbar).
    MomentFunction fn;
    fn.g = [a, b](const double* x, const double* mean, double* out) {
      out[0] = a * std::tanh(x[0]) + b * std::tanh(mean[0]);
    };
    fn.dg_dx = [a](const double* x, const double*, double* out) { out[0] = a * sech2(x[0]); };
    fn.dg_dm = [b](const double*, const double* mean, double* out) { out[0] = b * sech2(mean[0]); };
    return make_moment(std::move(fn), 1, 1, std::abs(a) + std::abs(b));
  }
  throw std::invalid_argument("unknown coefficient family: " + name);
}

}  // namespace roughchaos
