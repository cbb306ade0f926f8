#include <benchmark/benchmark.h>

#include <random>

#include "beamfactory/dbscan.hpp"
#include "beamfactory/link.hpp"
#include "beamfactory/scenario.hpp"
#include "beamfactory/switchoff.hpp"

using namespace beamfactory;

namespace {

const Scenario& default_scenario() {
  static const Scenario s = load_scenario(BEAMFACTORY_SCENARIO_DIR "/default.yaml");
  return s;
}

const SwitchOffProblem& default_problem() {
  static const SwitchOffProblem p = build_problem(simulate(default_scenario()), default_scenario().analysis_grid(), 5);
  return p;
}

void BM_Objective(benchmark::State& state) {
  const auto& p = default_problem();
  std::mt19937_64 rng(1);
  BeamMask m(p.n_beams());
  for (std::size_t k = 0; k < static_cast<std::size_t>(state.range(0)); ++k) m.set(rng() % p.n_beams());
  for (auto _ : state) benchmark::DoNotOptimize(objective(p, m));
  state.counters["bursts"] = static_cast<double>(p.bursts().size());
}
BENCHMARK(BM_Objective)->Arg(3)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_SynthesizeRsrp(benchmark::State& state) {
  const auto& s = default_scenario();
  const auto field = s.shadowing_field(1);
  const SceneView scene{s.layout, s.beams, s.model_los, s.model_nlos, field, s.budget};
  const Point2 p{25.0, 15.0};
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_rsrp(scene, p));
}
BENCHMARK(BM_SynthesizeRsrp);

void BM_Simulate(benchmark::State& state) {
  const auto& s = default_scenario();
  for (auto _ : state) benchmark::DoNotOptimize(simulate(s, 1u, static_cast<unsigned>(state.range(0))));
}
BENCHMARK(BM_Simulate)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Dbscan(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 40.0);
  std::vector<FeaturePoint> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts) p = {u(rng), u(rng), 0.1 * u(rng)};
  for (auto _ : state) benchmark::DoNotOptimize(dbscan(pts, 0.5, 8));
}
BENCHMARK(BM_Dbscan)->Arg(1000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_GaXi5(benchmark::State& state) {
  const auto& p = default_problem();
  for (auto _ : state) benchmark::DoNotOptimize(solve_ga(p, GaParams{}, 1));
}
BENCHMARK(BM_GaXi5)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
