#include <benchmark/benchmark.h>

#include <vector>

#include "common.hpp"
#include "sacl/encoder.hpp"
#include "sacl/optim.hpp"

namespace {

using namespace sacl;

Encoder default_encoder() {
  RngStream rng(1);
  const std::vector<std::size_t> dims{32, 64, 64, 32};
  return Encoder::he_init(dims, rng);
}

void BM_Forward(benchmark::State& state) {
  const Encoder enc = default_encoder();
  const Matrix x = bench::gaussian(static_cast<std::size_t>(state.range(0)), 32, 2);
  for (auto _ : state) {
    const ForwardCache c = encoder_forward(enc, x);
    benchmark::DoNotOptimize(c.output.values().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(256)->Arg(2048);

void BM_Backward(benchmark::State& state) {
  const Encoder enc = default_encoder();
  const auto rows = static_cast<std::size_t>(state.range(0));
  const Matrix x = bench::gaussian(rows, 32, 2);
  const Matrix up = bench::gaussian(rows, 32, 3);
  const ForwardCache c = encoder_forward(enc, x);
  for (auto _ : state) {
    const EncoderGradients g = encoder_backward(enc, c, up);
    benchmark::DoNotOptimize(g.weights.front().values().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Backward)->Arg(256)->Arg(2048);

void BM_AdamStep(benchmark::State& state) {
  Encoder enc = default_encoder();
  AdamState adam(AdamOptions{}, enc.block_sizes());
  const ForwardCache c = encoder_forward(enc, bench::gaussian(64, 32, 5));
  const EncoderGradients g = encoder_backward(enc, c, bench::gaussian(64, 32, 6));
  const auto grads = g.blocks();
  for (auto _ : state) {
    const auto params = enc.parameter_blocks();
    adam_step(adam, params, grads);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(enc.parameter_count()));
}
BENCHMARK(BM_AdamStep);

}  // namespace
