#include <benchmark/benchmark.h>

#include "hardy/harmonic.hpp"
#include "hardy/maximal.hpp"
#include "hardy/potentials.hpp"
#include "hardy/semigroup.hpp"

using namespace hardy;

namespace {

// Argument 0 selects the serial reference, 1 the OpenMP kernel.
Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

void BM_SemigroupMass(benchmark::State& state) {
  const auto v = example_potential(6).potential;
  FKConfig cfg;
  cfg.paths = 20000;
  cfg.steps = 128;
  cfg.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(fk_semigroup_mass(v, 2.0, Point{4.0, 0.0, 0.0}, cfg));
  label(state);
}
BENCHMARK(BM_SemigroupMass)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BridgeKernel(benchmark::State& state) {
  const auto v = example_potential(6).potential;
  FKConfig cfg;
  cfg.paths = 20000;
  cfg.steps = 128;
  cfg.exec = exec_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fk_kernel(v, 0.5, Point{4.0, 0.0, 0.0}, Point{4.5, 0.2, 0.0}, cfg));
  }
  label(state);
}
BENCHMARK(BM_BridgeKernel)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Omega(benchmark::State& state) {
  const auto v = example_potential(6).potential;
  FKConfig cfg;
  cfg.paths = 4000;
  cfg.steps = 64;
  cfg.adaptive = true;
  cfg.max_step = 4.0;
  cfg.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(omega(v, Point{8.0, 0.0, 0.0}, 64.0, cfg));
  label(state);
}
BENCHMARK(BM_Omega)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ApproxIdentityMonteCarlo(benchmark::State& state) {
  GridFunction f(CellGrid::uniform(Point{-1.5, -1.5, -1.5}, Point{1.5, 1.5, 1.5}, 8));
  const Cube q(Point{0.0, 0.0, 0.0}, 1.0);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = q.contains(f.grid.cell_center(i)) ? 1.0 : 0.0;
  const auto u = constant_potential(3, 0.5) + box_potential(q, 1.0);
  FKConfig cfg;
  cfg.paths = 500;
  cfg.steps = 32;
  cfg.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(approx_identity_error(u, f, 0.05, cfg));
  label(state);
}
BENCHMARK(BM_ApproxIdentityMonteCarlo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MaximalFree(benchmark::State& state) {
  IndicatorCombination a(3);
  a.add(1.0, Cube(Point{-0.5, 0.0, 0.0}, 0.5)).add(-1.0, Cube(Point{0.5, 0.0, 0.0}, 0.5));
  MaximalOptions opt;
  opt.max_refinements = 0;
  opt.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(maximal_free(a, 1.0, Cube(Point{0.0, 0.0, 0.0}, 3.0), 16, opt));
  label(state);
}
BENCHMARK(BM_MaximalFree)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GrowthRow(benchmark::State& state) {
  GrowthOptions opt;
  opt.spatial_check = false;
  opt.exec = exec_of(state);
  const auto mu = [](int) { return MuValue{1.1, 0.0}; };
  for (auto _ : state) benchmark::DoNotOptimize(growth_experiment({4, 8, 16}, mu, opt));
  label(state);
}
BENCHMARK(BM_GrowthRow)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_KatoScan(benchmark::State& state) {
  const auto ex = example_potential(8);
  const Exec exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(kato_sup_estimate(ex.potential, {}, ex.tail_majorant, exec));
  label(state);
}
BENCHMARK(BM_KatoScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
