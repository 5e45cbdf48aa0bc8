#include <cmath>

#include "doctest.h"
#include "support/helpers.hpp"
#include "wgdf/losses.hpp"
#include "wgdf/model.hpp"
#include "wgdf/ops.hpp"
#include "wgdf/optimizer.hpp"

using namespace wgdf;
using testutil::random_tensor;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.c_hf = 4;
  cfg.c_lf = 8;
  cfg.heads = 4;
  cfg.stages = 1;
  cfg.seed = 5;
  return cfg;
}

// One full forward/backward on a fixed synthetic batch.
template <class S>
void run_step(WgdfParams<S>& params, const ModelConfig& cfg, OptState<S>& st,
              uint64_t data_seed) {
  Rng rng(data_seed);
  auto a = random_tensor<S>(rng, {1, 3, 16, 16}, 0, 1);
  auto b = random_tensor<S>(rng, {1, 3, 16, 16}, 0, 1);
  std::vector<S> gt(256);
  for (S& g : gt) g = rng.uniform() < 0.4 ? S(1) : S(0);
  auto y = Tensor<S>::from_vector({1, 1, 16, 16}, std::move(gt), false);
  params.zero_grad();
  auto loss = total_loss(y, sigmoid(wgdf_forward(a, b, params, cfg)),
                         LossWeights{});
  GradTape<S> tape(loss);
  tape.backward();
  adamw_step(params, st);
}

void fill_grad(Tensor<float>& t, float v) {
  auto loss = sum_all(scale(t, v));
  backward(loss);
}

}  // namespace

TEST_SUITE_BEGIN("optimizer");

TEST_CASE("zero gradients with zero weight decay leave parameters unchanged") {
  ModelConfig cfg = tiny_config();
  auto params = init_params<float>(cfg);
  AdamWConfig oc;
  oc.weight_decay = 0.0;
  auto st = OptState<float>::init(oc, params);
  std::vector<float> before(params.named[0].second.data().begin(),
                            params.named[0].second.data().end());
  for (auto& [n, t] : params.named) fill_grad(t, 0.0f);
  adamw_step(params, st);
  CHECK(std::equal(before.begin(), before.end(),
                   params.named[0].second.data().begin()));
  CHECK(st.step_count == 1);
}

TEST_CASE("single-step update from zero state moves by about lr against the gradient") {
  // Hand-evaluated recurrence: m1 = (1-b1)g, v1 = (1-b2)g^2; bias correction
  // restores m^ = g, v^ = g^2, so the update is lr * g/(|g|+eps) ~ lr*sign(g).
  for (double g : {0.5, -2.0, 7.0}) {
    AdamWConfig oc;
    oc.weight_decay = 0.0;
    const double m_hat = g;                       // ((1-b1)g) / (1-b1)
    const double v_hat = g * g;                   // ((1-b2)g^2) / (1-b2)
    const double expected = oc.lr * m_hat / (std::sqrt(v_hat) + oc.eps);
    CHECK(std::fabs(expected) ==
          doctest::Approx(oc.lr).epsilon(1e-6));   // magnitude ~ lr
    CHECK((expected > 0) == (g > 0));             // direction = -sign(g) applied

    // And the implementation agrees.
    ModelConfig cfg = tiny_config();
    auto params = init_params<float>(cfg);
    auto st = OptState<float>::init(oc, params);
    auto& t = params.named[0].second;
    const float before = t.data()[0];
    for (auto& [n, p] : params.named) fill_grad(p, 1.0f);
    {
      auto node = t.node();  // overwrite one parameter's grad with g
      for (auto& gv : node->grad) gv = float(g);
    }
    adamw_step(params, st);
    const float after = t.data()[0];
    CHECK(double(before - after) ==
          doctest::Approx(expected).epsilon(1e-4));
  }
}

TEST_CASE("pure weight decay shrinks parameters by exactly (1 - lr*wd)") {
  // 64-bit: the shrink factor (1 - 3e-7) sits below f32 resolution.
  ModelConfig cfg = tiny_config();
  auto params = init_params<double>(cfg);
  AdamWConfig oc;  // wd = 0.001, lr = 3e-4
  auto st = OptState<double>::init(oc, params);
  std::vector<double> before(params.named[0].second.data().begin(),
                             params.named[0].second.data().end());
  for (auto& [n, t] : params.named) {
    auto loss = sum_all(scale(t, 0.0));
    backward(loss);
  }
  adamw_step(params, st);
  const double factor = 1.0 - oc.lr * oc.weight_decay;
  auto after = params.named[0].second.data();
  for (size_t i = 0; i < before.size(); ++i) {
    if (before[i] == 0.0) continue;
    CHECK(after[i] == doctest::Approx(before[i] * factor).epsilon(1e-12));
    CHECK(std::fabs(after[i]) < std::fabs(before[i]));
  }
}

TEST_CASE("per-element update magnitude is bounded by lr after bias correction") {
  ModelConfig cfg = tiny_config();
  auto params = init_params<float>(cfg);
  AdamWConfig oc;
  oc.weight_decay = 0.0;
  auto st = OptState<float>::init(oc, params);
  Rng rng(71);
  std::vector<std::vector<float>> before;
  for (auto& [n, t] : params.named) {
    before.emplace_back(t.data().begin(), t.data().end());
    fill_grad(t, 0.0f);
    auto node = t.node();
    for (auto& g : node->grad) g = float(rng.uniform(-50.0, 50.0));
  }
  adamw_step(params, st);
  const double bound = oc.lr * 1.001;
  for (size_t pi = 0; pi < params.named.size(); ++pi) {
    auto after = params.named[pi].second.data();
    for (size_t i = 0; i < after.size(); ++i)
      CHECK(std::fabs(double(after[i]) - double(before[pi][i])) <= bound);
  }
}

TEST_CASE("identical seeds give identical trajectories") {
  ModelConfig cfg = tiny_config();
  auto run = [&] {
    auto params = init_params<float>(cfg);
    auto st = OptState<float>::init(AdamWConfig{}, params);
    for (int step = 0; step < 3; ++step)
      run_step(params, cfg, st, 1000 + uint64_t(step));
    std::vector<float> flat;
    for (auto& [n, t] : params.named)
      flat.insert(flat.end(), t.data().begin(), t.data().end());
    return flat;
  };
  CHECK(run() == run());
}

TEST_CASE("non-finite gradients abort with the parameter name") {
  ModelConfig cfg = tiny_config();
  auto params = init_params<float>(cfg);
  auto st = OptState<float>::init(AdamWConfig{}, params);
  for (auto& [n, t] : params.named) fill_grad(t, 1.0f);
  auto node = params.named[3].second.node();
  node->grad[0] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_WITH_AS(adamw_step(params, st),
                       doctest::Contains(params.named[3].first.c_str()),
                       TrainError);
}

TEST_CASE("missing gradients are a training error") {
  ModelConfig cfg = tiny_config();
  auto params = init_params<float>(cfg);
  auto st = OptState<float>::init(AdamWConfig{}, params);
  CHECK_THROWS_AS(adamw_step(params, st), TrainError);
}

TEST_CASE("gradient clipping rescales the global norm") {
  ModelConfig cfg = tiny_config();
  auto params = init_params<float>(cfg);
  AdamWConfig oc;
  oc.grad_clip = 1.0;
  oc.weight_decay = 0.0;
  auto st = OptState<float>::init(oc, params);
  for (auto& [n, t] : params.named) fill_grad(t, 100.0f);
  // Large gradients; with clipping the step still obeys the lr bound.
  std::vector<float> before(params.named[0].second.data().begin(),
                            params.named[0].second.data().end());
  adamw_step(params, st);
  auto after = params.named[0].second.data();
  for (size_t i = 0; i < before.size(); ++i)
    CHECK(std::fabs(double(after[i]) - double(before[i])) <= oc.lr * 1.001);
}

TEST_SUITE_END();
