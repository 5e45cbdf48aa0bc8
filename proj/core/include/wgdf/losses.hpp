#pragma once

#include "wgdf/tensor.hpp"

namespace wgdf {

struct LossWeights {
  double lambda1 = 0.5;  // BCE weight
  double lambda2 = 1.0;  // Dice weight
};

// Mean binary cross-entropy over all pixels. Predictions are clamped to
// [1e-7, 1 - 1e-7] before the logs.
template <class S>
Tensor<S> bce_loss(const Tensor<S>& y, const Tensor<S>& y_hat);

// Soft Dice over the batch-flattened masks with smooth constant 1 in both
// numerator and denominator: 1 - (2*sum(y*yhat)+1) / (sum(y)+sum(yhat)+1).
template <class S>
Tensor<S> dice_loss(const Tensor<S>& y, const Tensor<S>& y_hat);

template <class S>
Tensor<S> total_loss(const Tensor<S>& y, const Tensor<S>& y_hat,
                     const LossWeights& w);

}  // namespace wgdf
