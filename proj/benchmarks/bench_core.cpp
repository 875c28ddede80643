#include <benchmark/benchmark.h>

#include "stack3d/cost_yield.hpp"
#include "stack3d/netlist.hpp"
#include "stack3d/pdn.hpp"
#include "stack3d/rng.hpp"
#include "stack3d/synthetic.hpp"
#include "stack3d/tier_place.hpp"

using namespace stack3d;

namespace {

Placement random_placement(const Netlist& nl, std::uint64_t seed) {
  rng::Engine eng = rng::make_engine(seed);
  Placement pl;
  pl.width = pl.height = 100.0;
  pl.num_tiers = 2;
  for (const Cell& c : nl.cells())
    pl.coords[c.id] = {rng::uniform(eng, 0, 100), rng::uniform(eng, 0, 100),
                       static_cast<int>(rng::uniform_below(eng, 2))};
  return pl;
}

void BM_Hpwl(benchmark::State& state) {
  Netlist nl = generate_synthetic(static_cast<int>(state.range(0)), 0.6, 3.0, 7);
  Placement pl = random_placement(nl, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hpwl(nl, pl));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Hpwl)->Range(256, 4096)->Complexity();

void BM_FmBipartition(benchmark::State& state) {
  Netlist nl = generate_synthetic(static_cast<int>(state.range(0)), 0.6, 3.0, 7);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fm_bipartition(nl, 0.05, ++seed));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FmBipartition)->Range(256, 2048)->Complexity();

void BM_Coplace(benchmark::State& state) {
  Netlist nl = generate_synthetic(static_cast<int>(state.range(0)), 0.6, 3.0, 7);
  TierAssignment ta = fm_bipartition(nl, 0.05, 1);
  PlaceConfig cfg;
  cfg.schedule.moves_per_cell = 20;  // short schedule for benchmarking
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cfg.seed = ++seed;
    benchmark::DoNotOptimize(coplace(nl, ta, cfg));
  }
}
BENCHMARK(BM_Coplace)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_IrDrop(benchmark::State& state) {
  PdnSpec spec;
  spec.total_power_w = 10;
  spec.vdd_v = 1;
  spec.footprint_mm2 = 100;
  spec.bump_pitch_um = 1500;
  spec.mesh_sheet_ohm_sq = 0.05;
  spec.grid = static_cast<int>(state.range(0));
  std::vector<LoadPoint> loads;
  rng::Engine eng = rng::make_engine(3);
  for (int i = 0; i < 64; ++i)
    loads.push_back({rng::uniform(eng, 0, 10), rng::uniform(eng, 0, 10), 0.15});
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_ir(spec, loads));
  }
}
BENCHMARK(BM_IrDrop)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_ScenarioCompare(benchmark::State& state) {
  TechNode ref;
  ref.d0 = 0.15;
  TechNode nn;
  nn.d0 = 0.2;
  nn.area_scale = 0.7;
  nn.wafer_cost = 13000;
  CostModel model;
  ScenarioOptions opts;
  for (auto _ : state) {
    benchmark::DoNotOptimize(scenario_compare(
        500.0, ref, nn,
        {Scenario::k2dRef, Scenario::k2dShrink, Scenario::k3dSplitRef,
         Scenario::k3dHetero},
        model, opts));
  }
}
BENCHMARK(BM_ScenarioCompare);

}  // namespace

BENCHMARK_MAIN();
