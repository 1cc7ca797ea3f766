#include <benchmark/benchmark.h>

#include <vector>

#include "common.hpp"
#include "sacl/fewshot.hpp"
#include "sacl/numerics.hpp"

namespace {

using namespace sacl;

LabeledFeatureSet embedded_set() {
  Matrix f = normalize_rows(bench::gaussian(20 * 100, 32, 7));
  std::vector<int> labels(f.rows());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i / 100);
  return LabeledFeatureSet(std::move(f), std::move(labels), 20);
}

void BM_ScoreEpisode(benchmark::State& state) {
  const LabeledFeatureSet set = embedded_set();
  RngStream rng(8);
  const Episode e = sample_episode(set, 5, static_cast<std::size_t>(state.range(0)), 15, rng);
  for (auto _ : state) benchmark::DoNotOptimize(score_episode(e).transductive);
}
BENCHMARK(BM_ScoreEpisode)->Arg(1)->Arg(5);

void BM_Evaluate1000(benchmark::State& state) {
  const LabeledFeatureSet set = embedded_set();
  EvalOptions o;
  o.threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_embedded(set, o, RngStream(9)).inductive->mean);
}
BENCHMARK(BM_Evaluate1000)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace
