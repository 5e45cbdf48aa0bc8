#pragma once

#include <cstdint>
#include <vector>

#include "wgdf/model.hpp"

namespace wgdf {

struct AdamWConfig {
  double lr = 3e-4;
  double beta1 = 0.99;
  double beta2 = 0.999;
  double weight_decay = 0.001;
  double eps = 1e-8;
  double grad_clip = 0.0;  // global-norm clip; 0 disables

  void validate() const;
};

// Decoupled-weight-decay adaptive optimizer. Moment buffers parallel the
// parameter registry order.
template <class S>
struct OptState {
  AdamWConfig cfg;
  int64_t step_count = 0;
  std::vector<std::vector<S>> m, v;

  static OptState init(const AdamWConfig& cfg, const WgdfParams<S>& params);
};

// One update step. Requires a gradient on every parameter; a non-finite
// gradient aborts with the parameter's name. Applies bias-corrected moments
// plus weight decay scaled by lr directly to the parameter values.
template <class S>
void adamw_step(WgdfParams<S>& params, OptState<S>& st);

}  // namespace wgdf
