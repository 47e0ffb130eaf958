#include <benchmark/benchmark.h>

#include <cmath>

#include "kslab/blowup_criteria.hpp"
#include "kslab/comparison.hpp"
#include "kslab/mass_pde.hpp"
#include "kslab/phase_plane.hpp"
#include "kslab/radial.hpp"
#include "kslab/selfsimilar.hpp"

using namespace kslab;

namespace {

MassProfile gaussian(const ModelParams& p, const RadialGrid& g) {
  return mass_from_density(p, tabulate_density(g, [](double r) { return std::exp(-r * r); }));
}

}  // namespace

static void BM_Step(benchmark::State& state) {
  const ModelParams p(3);
  SolverConfig cfg;
  cfg.grid.intervals = static_cast<std::size_t>(state.range(0));
  const auto g = cfg.grid.build();
  MassSolver solver(p, g, cfg);
  const EvolutionState s{gaussian(p, g)};
  for (auto _ : state) benchmark::DoNotOptimize(solver.step(s, 1e-3));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Step)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

static void BM_EvolveExplicitBlowup(benchmark::State& state) {
  const ModelParams p(3);
  SolverConfig cfg;
  cfg.grid.intervals = static_cast<std::size_t>(state.range(0));
  cfg.outer_boundary = [&](double t) { return explicit_blowup_mass(p, 1.0, cfg.grid.r_max, t); };
  cfg.cadence_steps = 0;
  const auto g = cfg.grid.build();
  const auto m0 = tabulate_mass(g, [&](double r) { return explicit_blowup_mass(p, 1.0, r, 0.0); });
  for (auto _ : state) benchmark::DoNotOptimize(evolve(p, m0, cfg, 0.5));
}
BENCHMARK(BM_EvolveExplicitBlowup)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

static void BM_SpatialOperator(benchmark::State& state) {
  const ModelParams p(3);
  const auto g = RadialGrid::uniform(static_cast<std::size_t>(state.range(0)), 20.0);
  const auto m = gaussian(p, g);
  for (auto _ : state) benchmark::DoNotOptimize(spatial_operator(p, m));
}
BENCHMARK(BM_SpatialOperator)->Arg(1024)->Arg(16384);

static void BM_HalfLineHeatClosedForm(benchmark::State& state) {
  const ModelParams p(3);
  const auto g = RadialGrid::uniform(static_cast<std::size_t>(state.range(0)), 40.0);
  const auto m0 = comparison_majorant(p, g, 2.0, 2.0, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(half_line_heat(m0, 7.3, 2.0));
}
BENCHMARK(BM_HalfLineHeatClosedForm)->Arg(256)->Arg(2048);

static void BM_HalfLineHeatQuadrature(benchmark::State& state) {
  const ModelParams p(3);
  const auto g = RadialGrid::uniform(2048, 40.0);
  const auto m0 = comparison_majorant(p, g, 2.0, 2.0, 10.0);
  const HalfLineDatum f = [&](double x) { return m0(x); };
  for (auto _ : state) benchmark::DoNotOptimize(half_line_heat(f, 7.3, 2.0));
}
BENCHMARK(BM_HalfLineHeatQuadrature);

static void BM_CriteriaReport(benchmark::State& state) {
  const ModelParams p(3);
  const auto g = RadialGrid::uniform(static_cast<std::size_t>(state.range(0)), 20.0);
  const auto m = gaussian(p, g);
  for (auto _ : state) benchmark::DoNotOptimize(criteria_report(p, m));
}
BENCHMARK(BM_CriteriaReport)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_RadialConcentration(benchmark::State& state) {
  const ModelParams p(3);
  const auto g = RadialGrid::uniform(static_cast<std::size_t>(state.range(0)), 20.0);
  const auto m = gaussian(p, g);
  for (auto _ : state) benchmark::DoNotOptimize(radial_concentration(p, m));
}
BENCHMARK(BM_RadialConcentration)->Arg(1024)->Arg(16384);

static void BM_Separatrix(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_separatrix(d));
}
BENCHMARK(BM_Separatrix)->Arg(3)->Arg(12);

static void BM_ShootProfile(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(shoot_profile(3, 0.05));
}
BENCHMARK(BM_ShootProfile)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
