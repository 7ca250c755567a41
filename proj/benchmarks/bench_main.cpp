#include <benchmark/benchmark.h>

#include <vector>

#include "lungline/arch.hpp"
#include "lungline/nn.hpp"
#include "lungline/preprocess.hpp"
#include "lungline/rng.hpp"
#include "lungline/tensor.hpp"
#include "lungline/weights.hpp"

namespace {

using lungline::Rng;
using lungline::Tensor;

Tensor filled(std::vector<int> dims, uint64_t seed) {
  Tensor t(std::move(dims));
  Rng rng(seed);
  for (float& v : t.data()) v = static_cast<float>(rng.uniform() * 2.0 - 1.0);
  return t;
}

// The three convolution flavors the network is built from, at mid-network
// sizes. Depthwise work is the architecture's claim to efficiency; the
// pointwise 1x1 convolutions carry most of the multiply volume.
void BM_ConvStem(benchmark::State& state) {
  const Tensor input = filled({1, 3, 224, 224}, 1);
  const Tensor weight = filled({32, 3, 3, 3}, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        lungline::nn::conv2d(input, weight, nullptr, 2, 1, 1));
  }
}
BENCHMARK(BM_ConvStem)->Unit(benchmark::kMillisecond);

void BM_ConvDepthwise3x3(benchmark::State& state) {
  const Tensor input = filled({1, 144, 28, 28}, 3);
  const Tensor weight = filled({144, 1, 3, 3}, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        lungline::nn::conv2d(input, weight, nullptr, 1, 1, 144));
  }
}
BENCHMARK(BM_ConvDepthwise3x3)->Unit(benchmark::kMillisecond);

void BM_ConvPointwise1x1(benchmark::State& state) {
  const Tensor input = filled({1, 144, 28, 28}, 5);
  const Tensor weight = filled({32, 144, 1, 1}, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        lungline::nn::conv2d(input, weight, nullptr, 1, 0, 1));
  }
}
BENCHMARK(BM_ConvPointwise1x1)->Unit(benchmark::kMillisecond);

void BM_Softmax(benchmark::State& state) {
  const Tensor logits = filled({8, 1000}, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lungline::nn::softmax(logits));
  }
}
BENCHMARK(BM_Softmax);

void BM_Preprocess(benchmark::State& state) {
  lungline::Image img;
  img.width = 1024;
  img.height = 1024;
  img.channels = 1;
  img.pixels.resize(static_cast<size_t>(img.width) * img.height);
  Rng rng(8);
  for (uint8_t& p : img.pixels) {
    p = static_cast<uint8_t>(rng.bounded(256));
  }
  const lungline::preprocess::NormalizationSpec norm;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lungline::preprocess::to_model_input(img, norm));
  }
}
BENCHMARK(BM_Preprocess)->Unit(benchmark::kMillisecond);

void BM_ForwardFullWidth(benchmark::State& state) {
  lungline::arch::ModelGraph model = lungline::arch::build_mobilenet_v2(3);
  lungline::weights::bind_weights(model,
                                  lungline::weights::snapshot(model));
  const Tensor batch = filled({1, 3, 224, 224}, 9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lungline::arch::forward(model, batch));
  }
}
BENCHMARK(BM_ForwardFullWidth)->Unit(benchmark::kMillisecond);

void BM_WeightsRoundTrip(benchmark::State& state) {
  lungline::weights::WeightContainer c;
  c.add("a", filled({64, 64, 3, 3}, 10));
  c.add("b", filled({256, 64, 1, 1}, 11));
  c.add("c", filled({1000, 1280}, 12));
  for (auto _ : state) {
    const std::vector<uint8_t> bytes = lungline::weights::serialize_lwt(c);
    benchmark::DoNotOptimize(lungline::weights::load_lwt(bytes));
  }
}
BENCHMARK(BM_WeightsRoundTrip)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
