#include <benchmark/benchmark.h>

#include <vector>

#include "roughchaos/coefficients.hpp"
#include "roughchaos/gaussian_driver.hpp"
#include "roughchaos/measures.hpp"
#include "roughchaos/rng.hpp"
#include "roughchaos/rough_lift.hpp"
#include "roughchaos/solver.hpp"
#include "roughchaos/variation.hpp"

using namespace roughchaos;

namespace {

std::vector<double> normal_x0(int n, std::uint64_t seed) {
  RandomStream stream(seed, 0);
  std::vector<double> x0(n);
  for (double& v : x0) v = stream.next_normal();
  return x0;
}

void BM_StepCompensatedMoment(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec spec{1.0, 8, 1};
  const EmpiricalRoughSetup setup(sample_ensemble(DriverKind::brownian(), spec, 1, n), false);
  const auto coeff = make_builtin("moment_tanh", 0.5, 0.5);
  const auto x0 = normal_x0(n, 2);
  for (auto _ : state) {
    auto next = step_compensated(x0, setup, coeff, 0);
    benchmark::DoNotOptimize(next.data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_StepCompensatedMoment)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_StepCompensatedConv(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec spec{1.0, 8, 1};
  const EmpiricalRoughSetup setup(sample_ensemble(DriverKind::brownian(), spec, 1, n), false);
  const auto coeff = make_builtin("conv_tanh", 0.5, 0.0);
  const auto x0 = normal_x0(n, 2);
  for (auto _ : state) {
    auto next = step_compensated(x0, setup, coeff, 0);
    benchmark::DoNotOptimize(next.data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_StepCompensatedConv)->RangeMultiplier(4)->Range(16, 256)->Complexity();

void BM_ChenEval(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  const GridSpec spec{1.0, steps, 2};
  const auto pi = sample_path(DriverKind::brownian(), spec, 3, 0);
  const auto pj = sample_path(DriverKind::brownian(), spec, 3, 1);
  const auto blocks = lift_cross(pi, pj);
  for (auto _ : state) {
    auto area = chen_eval(blocks, pi, pj, 0, steps);
    benchmark::DoNotOptimize(area.data());
  }
  state.SetComplexityN(steps);
}
BENCHMARK(BM_ChenEval)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_PVariationDP(benchmark::State& state) {
  const int points = static_cast<int>(state.range(0));
  RandomStream stream(4, 0);
  std::vector<double> values(points + 1);
  for (double& v : values) v = stream.next_normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(p_variation(values, 2.5, 0, points));
  }
  state.SetComplexityN(points);
}
BENCHMARK(BM_PVariationDP)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void BM_Wasserstein1D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  RandomStream stream(5, 0);
  EmpiricalMeasure a, b;
  a.n = n;
  a.d = 1;
  b.n = 8 * n;
  b.d = 1;
  a.atoms.resize(n);
  b.atoms.resize(8 * n);
  for (double& v : a.atoms) v = stream.next_normal();
  for (double& v : b.atoms) v = stream.next_normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(wasserstein_1d(a, b, 1.0));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_Wasserstein1D)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_WassersteinAssignment(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  RandomStream stream(6, 0);
  EmpiricalMeasure a, b;
  a.n = b.n = n;
  a.d = b.d = 3;
  a.atoms.resize(3 * n);
  b.atoms.resize(3 * n);
  for (double& v : a.atoms) v = stream.next_uniform();
  for (double& v : b.atoms) v = stream.next_uniform();
  for (auto _ : state) {
    benchmark::DoNotOptimize(wasserstein_assignment(a, b, 1.0));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_WassersteinAssignment)->RangeMultiplier(2)->Range(32, 512)->Complexity();

}  // namespace

BENCHMARK_MAIN();
