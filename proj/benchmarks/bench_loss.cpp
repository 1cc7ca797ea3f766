#include <benchmark/benchmark.h>

#include "common.hpp"
#include "sacl/data.hpp"
#include "sacl/loss.hpp"
#include "sacl/numerics.hpp"

namespace {

using namespace sacl;

struct Setup {
  EmbeddingBatch batch;
  PairWeights weights;
};

Setup make_setup(std::size_t views, std::size_t dim) {
  const std::size_t classes = 12;
  RngStream rng(3);
  std::vector<int> labels(views);
  for (std::size_t i = 0; i < views; i += 2) labels[i] = labels[i + 1] = static_cast<int>(rng.uniform_index(classes));
  SimilarityMatrix s{Matrix(views, classes), 2.5};
  for (std::size_t i = 0; i < views; ++i) {
    Vector logits(classes);
    for (double& v : logits) v = rng.normal();
    s.rows.set_row(i, softmax_with_temperature(logits, 2.5));
  }
  EmbeddingBatch b = make_embedding_batch(bench::gaussian(views, dim, 4), labels, paired_homologs(views));
  PairWeights w = pair_weights(s, b.labels, b.homolog, 0.9);
  return {std::move(b), std::move(w)};
}

void BM_LossOnly(benchmark::State& state) {
  const Setup s = make_setup(static_cast<std::size_t>(state.range(0)), 32);
  for (auto _ : state) benchmark::DoNotOptimize(sacl_loss(s.batch, s.weights, 0.05).total);
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_LossOnly)->Arg(64)->Arg(256)->Arg(1024);

void BM_LossAndGradient(benchmark::State& state) {
  const Setup s = make_setup(static_cast<std::size_t>(state.range(0)), 32);
  for (auto _ : state) {
    const LossAndGradient lg = sacl_loss_and_grad(s.batch, s.weights, 0.05);
    benchmark::DoNotOptimize(lg.grad_features.values().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_LossAndGradient)->Arg(64)->Arg(256)->Arg(1024);

}  // namespace
