#include <benchmark/benchmark.h>

#include <vector>

#include "iwpost/bounds.hpp"
#include "iwpost/implicit.hpp"
#include "iwpost/weights.hpp"

using namespace iwpost;

static void LogMeanExp(benchmark::State& state) {
  RngStream rng(1);
  std::vector<double> values(static_cast<std::size_t>(state.range(0)));
  for (double& v : values) v = 50.0 * rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(log_mean_exp(values));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(LogMeanExp)->RangeMultiplier(8)->Range(8, 1 << 18)->Complexity();

static void IwaeElboMc(benchmark::State& state) {
  const auto t = builtin_target("mix2");
  const auto q = GaussianProposal::isotropic(2);
  RngStream rng(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(iwae_elbo_mc(t, q, static_cast<std::size_t>(state.range(0)), 1000, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}
BENCHMARK(IwaeElboMc)->Arg(1)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

static void PlotQewGrid(benchmark::State& state) {
  const auto t = builtin_target("mix2");
  const auto q = GaussianProposal::isotropic(2);
  const auto grid = Grid::default_for(2);
  RngStream rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(plot_qew_grid(t, q, 10, static_cast<std::size_t>(state.range(0)), grid, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(PlotQewGrid)->Arg(1)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

static void SirSamples(benchmark::State& state) {
  const auto t = builtin_target("mix2");
  const auto q = GaussianProposal::isotropic(2);
  RngStream rng(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sir_samples(t, q, static_cast<std::size_t>(state.range(0)), 10000, rng));
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(SirSamples)->Arg(2)->Arg(50)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
