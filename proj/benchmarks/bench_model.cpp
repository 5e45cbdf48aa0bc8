#include <benchmark/benchmark.h>

#include "wgdf/losses.hpp"
#include "wgdf/model.hpp"
#include "wgdf/ops.hpp"
#include "wgdf/rng.hpp"

namespace {

template <class S>
wgdf::Tensor<S> rand_img(int n, int hw, bool rg = false) {
  wgdf::Rng rng(33);
  std::vector<S> v(size_t(n) * 3 * hw * hw);
  for (S& x : v) x = S(rng.uniform(0, 1));
  return wgdf::Tensor<S>::from_vector({n, 3, hw, hw}, std::move(v), rg);
}

void ForwardDeskConfig(benchmark::State& state) {
  wgdf::ModelConfig cfg;
  auto params = wgdf::init_params<float>(cfg);
  auto a = rand_img<float>(8, 64);
  auto b = rand_img<float>(8, 64);
  wgdf::NoGradGuard ng;
  for (auto _ : state) {
    auto logits = wgdf::wgdf_forward(a, b, params, cfg);
    benchmark::DoNotOptimize(logits);
  }
}
BENCHMARK(ForwardDeskConfig)->Unit(benchmark::kMillisecond);

void TrainStepDeskConfig(benchmark::State& state) {
  wgdf::ModelConfig cfg;
  auto params = wgdf::init_params<float>(cfg);
  auto a = rand_img<float>(8, 64);
  auto b = rand_img<float>(8, 64);
  auto y = wgdf::Tensor<float>::zeros({8, 1, 64, 64});
  for (auto _ : state) {
    params.zero_grad();
    auto loss = wgdf::total_loss(
        y, wgdf::sigmoid(wgdf::wgdf_forward(a, b, params, cfg)),
        wgdf::LossWeights{});
    wgdf::GradTape<float> tape(loss);
    tape.backward();
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(TrainStepDeskConfig)->Unit(benchmark::kMillisecond);

}  // namespace
