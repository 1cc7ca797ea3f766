#include <benchmark/benchmark.h>

#include "sacl/theory.hpp"

namespace {

using namespace sacl;

void BM_AnchorEstimate(benchmark::State& state) {
  RngStream rng(10);
  const SphereMixture m =
      sample_sphere_mixture(5, {}, 16, 4.0, static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(alignment_uniformity(0, m, 0.5).error);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AnchorEstimate)->Arg(2000)->Arg(20000);

void BM_SampleMixture(benchmark::State& state) {
  for (auto _ : state) {
    RngStream rng(11);
    const SphereMixture m = sample_sphere_mixture(5, {}, 16, 4.0, static_cast<std::size_t>(state.range(0)), rng);
    benchmark::DoNotOptimize(m.embeddings.values().data());
  }
}
BENCHMARK(BM_SampleMixture)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace
