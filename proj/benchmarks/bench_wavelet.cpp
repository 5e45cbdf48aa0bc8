#include <benchmark/benchmark.h>

#include "wgdf/rng.hpp"
#include "wgdf/wavelet.hpp"

namespace {

wgdf::Tensor<float> random_image(int n, int c, int hw) {
  wgdf::Rng rng(7);
  std::vector<float> v(size_t(n) * c * hw * hw);
  for (float& x : v) x = float(rng.uniform());
  return wgdf::Tensor<float>::from_vector({n, c, hw, hw}, std::move(v));
}

void Dwt2(benchmark::State& state) {
  auto x = random_image(1, 3, int(state.range(0)));
  wgdf::NoGradGuard ng;
  for (auto _ : state) {
    auto s = wgdf::dwt2(x);
    benchmark::DoNotOptimize(s.ll);
  }
  state.SetItemsProcessed(state.iterations() * x.numel());
}
BENCHMARK(Dwt2)->Arg(64)->Arg(256);

void RoundTrip(benchmark::State& state) {
  auto x = random_image(1, 3, int(state.range(0)));
  wgdf::NoGradGuard ng;
  for (auto _ : state) {
    auto y = wgdf::idwt2(wgdf::dwt2(x));
    benchmark::DoNotOptimize(y);
  }
  state.SetItemsProcessed(state.iterations() * x.numel());
}
BENCHMARK(RoundTrip)->Arg(64)->Arg(256);

}  // namespace
