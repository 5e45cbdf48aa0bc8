#include <benchmark/benchmark.h>

#include "wgdf/ops.hpp"
#include "wgdf/rng.hpp"

namespace {

template <class S>
wgdf::Tensor<S> rand_t(const wgdf::Shape& shape, bool rg = false) {
  wgdf::Rng rng(21);
  std::vector<S> v(size_t(wgdf::shape_numel(shape)));
  for (S& x : v) x = S(rng.uniform(-1, 1));
  return wgdf::Tensor<S>::from_vector(shape, std::move(v), rg);
}

// FDID-sized 7x7 convolution, forward only.
void Conv7x7Forward(benchmark::State& state) {
  auto x = rand_t<float>({8, 32, 32, 32});
  auto w = rand_t<float>({32, 32, 7, 7});
  auto b = rand_t<float>({32});
  wgdf::NoGradGuard ng;
  for (auto _ : state) {
    auto y = wgdf::conv2d(x, w, b, 1, 3, 1);
    benchmark::DoNotOptimize(y);
  }
}
BENCHMARK(Conv7x7Forward)->Unit(benchmark::kMillisecond);

void Conv7x7Backward(benchmark::State& state) {
  auto x = rand_t<float>({8, 32, 32, 32}, true);
  auto w = rand_t<float>({32, 32, 7, 7}, true);
  auto b = rand_t<float>({32}, true);
  for (auto _ : state) {
    auto loss = wgdf::sum_all(wgdf::conv2d(x, w, b, 1, 3, 1));
    wgdf::backward(loss);
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(Conv7x7Backward)->Unit(benchmark::kMillisecond);

// One attention call at training shape: (8 batch, 4 heads, 1024 tokens, 16).
void AttentionForward(benchmark::State& state) {
  auto q = rand_t<float>({8, 4, 1024, 16});
  auto k = rand_t<float>({8, 4, 1024, 16});
  auto v = rand_t<float>({8, 4, 1024, 16});
  wgdf::NoGradGuard ng;
  for (auto _ : state) {
    auto y = wgdf::attention(q, k, v);
    benchmark::DoNotOptimize(y);
  }
}
BENCHMARK(AttentionForward)->Unit(benchmark::kMillisecond);

void AttentionBackward(benchmark::State& state) {
  auto q = rand_t<float>({8, 4, 1024, 16}, true);
  auto k = rand_t<float>({8, 4, 1024, 16}, true);
  auto v = rand_t<float>({8, 4, 1024, 16}, true);
  for (auto _ : state) {
    auto loss = wgdf::sum_all(wgdf::attention(q, k, v));
    wgdf::backward(loss);
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(AttentionBackward)->Unit(benchmark::kMillisecond);

}  // namespace

#include "wgdf/high_freq.hpp"
#include "wgdf/low_freq.hpp"
#include "wgdf/model.hpp"

namespace {

// Training-shape single blocks, forward plus backward.
template <class Fn>
void run_fwd_bwd(benchmark::State& state, Fn loss_fn) {
  for (auto _ : state) {
    auto loss = loss_fn();
    wgdf::GradTape<float> tape(loss);
    tape.backward();
    benchmark::DoNotOptimize(loss);
  }
}

void TrBlockStep(benchmark::State& state) {
  wgdf::ModelConfig cfg;
  auto params = wgdf::init_params<float>(cfg);
  auto x = rand_t<float>({8, 64, 32, 32}, true);
  run_fwd_bwd(state, [&] {
    return wgdf::sum_all(wgdf::tr_block(x, params.tr[0]));
  });
}
BENCHMARK(TrBlockStep)->Unit(benchmark::kMillisecond);

void FdidStep(benchmark::State& state) {
  wgdf::ModelConfig cfg;
  auto params = wgdf::init_params<float>(cfg);
  auto h1 = rand_t<float>({8, 32, 32, 32}, true);
  auto h2 = rand_t<float>({8, 32, 32, 32}, true);
  run_fwd_bwd(state, [&] {
    return wgdf::sum_all(wgdf::fdid_forward(h1, h2, params.fdid[0]).h_diff);
  });
}
BENCHMARK(FdidStep)->Unit(benchmark::kMillisecond);

void PcdmStep(benchmark::State& state) {
  wgdf::ModelConfig cfg;
  auto params = wgdf::init_params<float>(cfg);
  auto f1 = rand_t<float>({8, 64, 32, 32}, true);
  auto f2 = rand_t<float>({8, 64, 32, 32}, true);
  run_fwd_bwd(state, [&] {
    return wgdf::sum_all(wgdf::pcdm_forward(f1, f2, params.pcdm).d_ll);
  });
}
BENCHMARK(PcdmStep)->Unit(benchmark::kMillisecond);

void DffeStep(benchmark::State& state) {
  wgdf::ModelConfig cfg;
  auto params = wgdf::init_params<float>(cfg);
  auto t1 = rand_t<float>({8, 32, 32, 32}, true);
  auto t2 = rand_t<float>({8, 32, 32, 32}, true);
  run_fwd_bwd(state, [&] {
    auto r = wgdf::dffe_forward(t1, t2, params.dffe[0]);
    return wgdf::sum_all(wgdf::add(r.out1, r.out2));
  });
}
BENCHMARK(DffeStep)->Unit(benchmark::kMillisecond);

}  // namespace
