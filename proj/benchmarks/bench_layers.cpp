#include <benchmark/benchmark.h>

#include <random>

#include "cgm/layers.hpp"
#include "cgm/model.hpp"

namespace {

cgm::Tensor random_tensor(cgm::Shape shape, std::uint64_t seed) {
  cgm::Tensor t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : t.values()) {
    v = u(rng);
  }
  return t;
}

// args: batch, in channels, out channels, height, width
void BM_ConvForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cin = static_cast<std::size_t>(state.range(1));
  const auto cout = static_cast<std::size_t>(state.range(2));
  const auto h = static_cast<std::size_t>(state.range(3));
  const auto w = static_cast<std::size_t>(state.range(4));
  cgm::Conv2d conv(cin, cout, 3, 1, "conv");
  const cgm::Tensor x = random_tensor({n, cin, h, w}, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(conv.infer(x));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_ConvForward)->Args({16, 1, 16, 90, 120})->Args({16, 16, 16, 90, 120})->Args({16, 64, 128, 11, 15});

void BM_ConvBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cin = static_cast<std::size_t>(state.range(1));
  const auto cout = static_cast<std::size_t>(state.range(2));
  const auto h = static_cast<std::size_t>(state.range(3));
  const auto w = static_cast<std::size_t>(state.range(4));
  cgm::Conv2d conv(cin, cout, 3, 1, "conv");
  const cgm::Tensor x = random_tensor({n, cin, h, w}, 2);
  const cgm::Tensor y = conv.forward(x);
  const cgm::Tensor g = random_tensor(y.shape(), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(conv.backward(g));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_ConvBackward)->Args({16, 1, 16, 90, 120})->Args({16, 16, 16, 90, 120})->Args({16, 64, 128, 11, 15});

void BM_DenseForward(benchmark::State& state) {
  cgm::Dense dense(128 * 5 * 7, 128, "dense");
  const cgm::Tensor x = random_tensor({16, 128 * 5 * 7}, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dense.infer(x));
  }
}
BENCHMARK(BM_DenseForward);

// One optimizer-free training step of the default network at 120x90.
void BM_ModelStep(benchmark::State& state) {
  cgm::ModelConfig config;
  config.input_width = 120;
  config.input_height = 90;
  cgm::Model model(config);
  model.init_weights(5);
  const auto n = static_cast<std::size_t>(state.range(0));
  const cgm::Tensor x = random_tensor({n, 1, 90, 120}, 6);
  const cgm::Tensor target({n});
  for (auto _ : state) {
    model.zero_grad();
    cgm::Tensor grad;
    (void)cgm::mse_loss(model.forward(x), target, &grad);
    model.backward(grad);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_ModelStep)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
