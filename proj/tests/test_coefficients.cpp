#include <doctest.h>

#include <cmath>
#include <vector>

#include "roughchaos/coefficients.hpp"
#include "roughchaos/rng.hpp"

using namespace roughchaos;

namespace {

// d = m = 2 tanh-product kernel, smooth and bounded with its derivatives.
ConvolutionKernel tanh_product_kernel() {
  ConvolutionKernel kernel;
  kernel.f = [](const double* x, const double* y, double* out) {
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) out[r * 2 + c] = std::tanh(x[r] - y[c]) * std::tanh(y[(c + 1) % 2]);
    }
  };
  auto sech2 = [](double v) {
    const double ch = std::cosh(v);
    return 1.0 / (ch * ch);
  };
  kernel.df_dx = [sech2](const double* x, const double* y, double* out) {
    // out[r][c][l] = d f^{rc} / d x_l
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        for (int l = 0; l < 2; ++l) {
          out[(r * 2 + c) * 2 + l] =
              (l == r) ? sech2(x[r] - y[c]) * std::tanh(y[(c + 1) % 2]) : 0.0;
        }
      }
    }
  };
  kernel.df_dy = [sech2](const double* x, const double* y, double* out) {
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        for (int l = 0; l < 2; ++l) {
          double v = 0.0;
          if (l == c) v += -sech2(x[r] - y[c]) * std::tanh(y[(c + 1) % 2]);
          if (l == (c + 1) % 2) v += std::tanh(x[r] - y[c]) * sech2(y[(c + 1) % 2]);
          out[(r * 2 + c) * 2 + l] = v;
        }
      }
    }
  };
  return kernel;
}

std::vector<double> random_states(RandomStream& stream, int n, int d) {
  std::vector<double> states(static_cast<std::size_t>(n) * d);
  for (double& v : states) v = stream.next_normal();
  return states;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("constant kernel: F constant, derivatives vanish") {
  ConvolutionKernel kernel;
  kernel.f = [](const double*, const double*, double* out) { out[0] = 3.5; };
  kernel.df_dx = [](const double*, const double*, double* out) { out[0] = 0.0; };
  kernel.df_dy = [](const double*, const double*, double* out) { out[0] = 0.0; };
  const auto coeff = make_convolution(std::move(kernel), 1, 1, 3.5);

  const std::vector<double> states = {0.3, -1.0, 2.0};
  const EmpiricalMeasureView mu{states.data(), 3, 1};
  double F = 0.0, dx = 0.0, dmu = 0.0;
  const double x = 0.7;
  coeff.eval_F(&x, mu, &F);
  coeff.eval_dxF(&x, mu, &dx);
  coeff.eval_dmuF(&x, mu, states.data(), &dmu);
  CHECK(F == 3.5);
  CHECK(dx == 0.0);
  CHECK(dmu == 0.0);
}

TEST_CASE("f(x,y) = sin(y) on a two-atom measure") {
  ConvolutionKernel kernel;
  kernel.f = [](const double*, const double* y, double* out) { out[0] = std::sin(y[0]); };
  kernel.df_dx = [](const double*, const double*, double* out) { out[0] = 0.0; };
  kernel.df_dy = [](const double*, const double* y, double* out) { out[0] = std::cos(y[0]); };
  const auto coeff = make_convolution(std::move(kernel), 1, 1, 1.0);

  const std::vector<double> atoms = {0.0, 1.5707963267948966};  // {0, pi/2}
  const EmpiricalMeasureView mu{atoms.data(), 2, 1};
  double F = 0.0, dmu = 0.0;
  const double x = 0.0, z = 0.0;
  coeff.eval_F(&x, mu, &F);
  coeff.eval_dmuF(&x, mu, &z, &dmu);
  CHECK(F == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(dmu == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("moment family: g(x,m) = m and tanh(x) tanh(m)") {
  MomentFunction linear;
  linear.g = [](const double*, const double* mean, double* out) { out[0] = mean[0]; };
  linear.dg_dx = [](const double*, const double*, double* out) { out[0] = 0.0; };
  linear.dg_dm = [](const double*, const double*, double* out) { out[0] = 1.0; };
  const auto lin = make_moment(std::move(linear), 1, 1, 1.0);  // test-only, unbounded

  const std::vector<double> atoms = {1.0, 2.0, 6.0};
  const EmpiricalMeasureView mu{atoms.data(), 3, 1};
  double F = 0.0, dmu = 0.0;
  const double x = 0.0, z = 5.0;
  lin.eval_F(&x, mu, &F);
  lin.eval_dmuF(&x, mu, &z, &dmu);
  CHECK(F == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(dmu == 1.0);
  CHECK(lin.dmu_constant_in_z);

  MomentFunction prod;
  prod.g = [](const double* x_, const double* mean, double* out) {
    out[0] = std::tanh(x_[0]) * std::tanh(mean[0]);
  };
  prod.dg_dx = [](const double* x_, const double* mean, double* out) {
    const double ch = std::cosh(x_[0]);
    out[0] = std::tanh(mean[0]) / (ch * ch);
  };
  prod.dg_dm = [](const double* x_, const double* mean, double* out) {
    const double ch = std::cosh(mean[0]);
    out[0] = std::tanh(x_[0]) / (ch * ch);
  };
  const auto coeff = make_moment(std::move(prod), 1, 1, 1.0);
  const std::vector<double> centered = {-1.0, 1.0};  // mean 0
  const EmpiricalMeasureView mu0{centered.data(), 2, 1};
  double F0 = 0.0, dx0 = 0.0, dmu0 = 0.0;
  const double x1 = 0.8;
  coeff.eval_F(&x1, mu0, &F0);
  coeff.eval_dxF(&x1, mu0, &dx0);
  coeff.eval_dmuF(&x1, mu0, &x1, &dmu0);
  CHECK(F0 == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dx0 == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dmu0 == doctest::Approx(std::tanh(0.8)).epsilon(1e-12));
}

TEST_CASE("dxF is the finite difference of F in x") {
  RandomStream stream(808, 0);
  const auto coeff = make_convolution(tanh_product_kernel(), 2, 2, 2.0);
  const double step = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    auto atoms = random_states(stream, 8, 2);
    const EmpiricalMeasureView mu{atoms.data(), 8, 2};
    std::vector<double> x = {stream.next_normal(), stream.next_normal()};
    std::vector<double> dx(8);
    coeff.eval_dxF(x.data(), mu, dx.data());
    for (int l = 0; l < 2; ++l) {
      std::vector<double> hi(4), lo(4), xp = x, xm = x;
      xp[l] += step;
      xm[l] -= step;
      coeff.eval_F(xp.data(), mu, hi.data());
      coeff.eval_F(xm.data(), mu, lo.data());
      for (int e = 0; e < 4; ++e) {
        const double fd = (hi[e] - lo[e]) / (2.0 * step);
        CHECK(dx[e * 2 + l] == doctest::Approx(fd).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("Lions derivative matches the lifted finite difference on 64 atoms") {
  RandomStream stream(809, 0);
  const int n = 64;
  const double step = 1e-5;
  for (const bool moment : {false, true}) {
    MeanFieldCoefficient coeff;
    if (moment) {
      MomentFunction fn;
      fn.g = [](const double* x, const double* mean, double* out) {
        for (int r = 0; r < 2; ++r) {
          for (int c = 0; c < 2; ++c) out[r * 2 + c] = std::tanh(x[r]) + 0.5 * std::tanh(mean[c]);
        }
      };
      fn.dg_dx = [](const double* x, const double*, double* out) {
        for (int r = 0; r < 2; ++r) {
          for (int c = 0; c < 2; ++c) {
            for (int l = 0; l < 2; ++l) {
              const double ch = std::cosh(x[r]);
              out[(r * 2 + c) * 2 + l] = (l == r) ? 1.0 / (ch * ch) : 0.0;
            }
          }
        }
      };
      fn.dg_dm = [](const double*, const double* mean, double* out) {
        for (int r = 0; r < 2; ++r) {
          for (int c = 0; c < 2; ++c) {
            for (int l = 0; l < 2; ++l) {
              const double ch = std::cosh(mean[c]);
              out[(r * 2 + c) * 2 + l] = (l == c) ? 0.5 / (ch * ch) : 0.0;
            }
          }
        }
      };
      coeff = make_moment(std::move(fn), 2, 2, 1.5);
    } else {
      coeff = make_convolution(tanh_product_kernel(), 2, 2, 2.0);
    }

    auto atoms = random_states(stream, n, 2);
    const EmpiricalMeasureView mu{atoms.data(), n, 2};
    const std::vector<double> x = {0.3, -0.2};
    const int target = 17;

    std::vector<double> dmu(8);
    coeff.eval_dmuF(x.data(), mu, mu.atom(target), dmu.data());

    // Lift oracle: D_mu F(x, mu)(z_k) = n * d/dz_k F(x, mu^n).
    double worst = 0.0;
    for (int l = 0; l < 2; ++l) {
      auto hi_atoms = atoms, lo_atoms = atoms;
      hi_atoms[static_cast<std::size_t>(target) * 2 + l] += step;
      lo_atoms[static_cast<std::size_t>(target) * 2 + l] -= step;
      std::vector<double> hi(4), lo(4);
      coeff.eval_F(x.data(), EmpiricalMeasureView{hi_atoms.data(), n, 2}, hi.data());
      coeff.eval_F(x.data(), EmpiricalMeasureView{lo_atoms.data(), n, 2}, lo.data());
      for (int e = 0; e < 4; ++e) {
        const double fd = n * (hi[e] - lo[e]) / (2.0 * step);
        worst = std::max(worst, std::abs(dmu[e * 2 + l] - fd));
      }
    }
    CHECK(worst / (1.0 + max_abs(dmu)) < 1e-5);
  }
}

TEST_CASE("convolution Lions derivative only sees its own atom") {
  // Exactness of the closed form: perturbing any atom other than z leaves
  // D_mu F(x, mu)(z) unchanged.
  const auto coeff = make_convolution(tanh_product_kernel(), 2, 2, 2.0);
  RandomStream stream(810, 0);
  auto atoms = random_states(stream, 16, 2);
  const std::vector<double> x = {0.1, 0.9};
  std::vector<double> base(8);
  coeff.eval_dmuF(x.data(), EmpiricalMeasureView{atoms.data(), 16, 2}, atoms.data(), base.data());
  auto perturbed = atoms;
  perturbed[5 * 2 + 1] += 0.37;  // atom 5, not atom 0
  std::vector<double> after(8);
  // z must point at the same coordinates, not at the perturbed buffer.
  coeff.eval_dmuF(x.data(), EmpiricalMeasureView{perturbed.data(), 16, 2}, atoms.data(),
                  after.data());
  CHECK(max_abs_diff(base, after) == 0.0);
}

TEST_CASE("empirical projection: Kronecker structure and finite differences") {
  RandomStream stream(811, 0);
  const int n = 8;
  for (const char* name : {"conv_tanh", "moment_tanh"}) {
    const auto coeff = make_builtin(name, 0.8, 0.6);
    auto states = random_states(stream, n, 1);
    const EmpiricalMeasureView mu{states.data(), n, 1};

    // Off-diagonal projection of the convolution family is (1/n) df_dy.
    if (std::string(name) == "conv_tanh") {
      const auto grad = empirical_projection_grad(coeff, 2, 5, mu);
      std::vector<double> dmu(1);
      coeff.eval_dmuF(mu.atom(2), mu, mu.atom(5), dmu.data());
      CHECK(grad[0] == doctest::Approx(dmu[0] / n).epsilon(1e-15));
    }

    const double step = 1e-6;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const auto grad = empirical_projection_grad(coeff, i, j, mu);
        auto hi_states = states, lo_states = states;
        hi_states[j] += step;
        lo_states[j] -= step;
        double hi = 0.0, lo = 0.0;
        coeff.eval_F(&hi_states[i], EmpiricalMeasureView{hi_states.data(), n, 1}, &hi);
        coeff.eval_F(&lo_states[i], EmpiricalMeasureView{lo_states.data(), n, 1}, &lo);
        const double fd = (hi - lo) / (2.0 * step);
        CHECK(std::abs(grad[0] - fd) / (1.0 + std::abs(fd)) < 1e-6);
      }
    }
  }
}

TEST_CASE("single-atom projection carries full weight") {
  const auto coeff = make_builtin("conv_tanh", 1.0, 0.0);
  const std::vector<double> states = {0.4};
  const EmpiricalMeasureView mu{states.data(), 1, 1};
  const auto grad = empirical_projection_grad(coeff, 0, 0, mu);
  double dx = 0.0, dmu = 0.0;
  coeff.eval_dxF(states.data(), mu, &dx);
  coeff.eval_dmuF(states.data(), mu, states.data(), &dmu);
  CHECK(grad[0] == doctest::Approx(dx + dmu).epsilon(1e-15));
}

TEST_CASE("F is exactly invariant under atom permutations") {
  const auto coeff = make_builtin("conv_tanh", 0.9, 0.0);
  RandomStream stream(812, 0);
  std::vector<double> states = random_states(stream, 7, 1);
  const double x = 0.25;
  double before = 0.0;
  coeff.eval_F(&x, EmpiricalMeasureView{states.data(), 7, 1}, &before);
  std::vector<double> shuffled = {states[3], states[0], states[6], states[5],
                                  states[1], states[2], states[4]};
  double after = 0.0;
  coeff.eval_F(&x, EmpiricalMeasureView{shuffled.data(), 7, 1}, &after);
  CHECK(before == after);
}

TEST_CASE("built-in families stay within the reported bound") {
  RandomStream stream(813, 0);
  for (const char* name : {"conv_tanh", "moment_tanh"}) {
    const auto coeff = make_builtin(name, 0.7, 0.4);
    double worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
      auto states = random_states(stream, 4, 1);
      const EmpiricalMeasureView mu{states.data(), 4, 1};
      const double x = 3.0 * stream.next_normal();
      const double z = 3.0 * stream.next_normal();
      double F = 0.0, dx = 0.0, dmu = 0.0;
      coeff.eval_F(&x, mu, &F);
      coeff.eval_dxF(&x, mu, &dx);
      coeff.eval_dmuF(&x, mu, &z, &dmu);
      worst = std::max({worst, std::abs(F), std::abs(dx), std::abs(dmu)});
    }
    CHECK(worst <= coeff.lipschitz_bound);
  }
}
