#include <benchmark/benchmark.h>

#include <random>

#include "hermite_cfm/linalg.hpp"
#include "hermite_cfm/solver.hpp"

using namespace hcfm;

namespace {

DenseMatrix random_spd(std::size_t n) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix a(n, n);
  for (auto& v : a.data()) v = u(rng);
  DenseMatrix s = a.transpose().multiply(a);
  for (std::size_t i = 0; i < n; ++i) s(i, i) += static_cast<double>(n);
  return s;
}

void BM_LuFactor(benchmark::State& state) {
  const auto m = random_spd(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lu_factor(m));
}
BENCHMARK(BM_LuFactor)->Arg(16)->Arg(64)->Arg(256);

void BM_Eigenvalues(benchmark::State& state) {
  const auto m = random_spd(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eigenvalues(m));
}
BENCHMARK(BM_Eigenvalues)->Arg(32)->Arg(128);

// One full step: Hermite update plus the boundary closure.
void BM_Step1d(benchmark::State& state) {
  SolverParams p;
  p.m = static_cast<int>(state.range(0));
  Solver s(standing_wave_1d(), 80, p);
  s.initialize();
  const double dt = s.dt();
  s.step(dt);
  for (auto _ : state) s.step(dt);
}
BENCHMARK(BM_Step1d)->DenseRange(1, 3);

void BM_Step2dSquare(benchmark::State& state) {
  SolverParams p;
  p.m = static_cast<int>(state.range(0));
  Solver s(standing_wave_2d(), 30, p);
  s.initialize();
  const double dt = s.dt();
  s.step(dt);
  for (auto _ : state) s.step(dt);
}
BENCHMARK(BM_Step2dSquare)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_Step2dCross(benchmark::State& state) {
  SolverParams p;
  p.m = 1;
  Solver s(gaussian_pulse(0.035, true), static_cast<int>(state.range(0)), p);
  s.initialize();
  const double dt = s.dt();
  s.step(dt);
  for (auto _ : state) s.step(dt);
}
BENCHMARK(BM_Step2dCross)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);

// Patch construction cost, dominated by the normal-equation factorisations.
void BM_PatchBuild(benchmark::State& state) {
  SolverParams p;
  p.m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    Solver s(standing_wave_2d(), 15, p);
    benchmark::DoNotOptimize(s.patches(s.dt()).size());
  }
}
BENCHMARK(BM_PatchBuild)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
