#pragma once

#include <vector>

#include "wgdf/tensor.hpp"

namespace wgdf {

// ---- elementwise -----------------------------------------------------------
// Binary ops accept equal shapes, or 4-d attention-map broadcasting where one
// operand is (N,1,H,W) or (N,C,1,1) against (N,C,H,W).
template <class S> Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b);
template <class S> Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b);
template <class S> Tensor<S> hadamard(const Tensor<S>& a, const Tensor<S>& b);
template <class S> Tensor<S> divide(const Tensor<S>& a, const Tensor<S>& b);
template <class S> Tensor<S> abs(const Tensor<S>& a);  // subgradient 0 at 0
template <class S> Tensor<S> sigmoid(const Tensor<S>& a);
template <class S> Tensor<S> relu(const Tensor<S>& a);
template <class S> Tensor<S> log(const Tensor<S>& a);
template <class S> Tensor<S> clamp(const Tensor<S>& a, S lo, S hi);
template <class S> Tensor<S> scale(const Tensor<S>& a, S k);
template <class S> Tensor<S> add_scalar(const Tensor<S>& a, S k);

// ---- reductions ------------------------------------------------------------
template <class S> Tensor<S> sum_all(const Tensor<S>& a);
template <class S> Tensor<S> mean_all(const Tensor<S>& a);

// ---- structure -------------------------------------------------------------
template <class S> Tensor<S> reshape(const Tensor<S>& a, const Shape& shape);
template <class S> Tensor<S> permute(const Tensor<S>& a, const std::vector<int>& axes);
template <class S> Tensor<S> concat(const std::vector<Tensor<S>>& parts, int axis);

// ---- linear algebra --------------------------------------------------------
// matmul: both operands (B..., M, K) x (B..., K, N) with equal leading dims,
// or either operand rank-2 (shared across the other's batch).
template <class S> Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b);
template <class S> Tensor<S> dense(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b);
template <class S> Tensor<S> softmax(const Tensor<S>& a, int axis);
// Normalizes over the last axis; gain/bias are 1-d of that length.
template <class S> Tensor<S> layer_norm(const Tensor<S>& x, const Tensor<S>& gain, const Tensor<S>& bias);

// ---- image ops -------------------------------------------------------------
enum class PoolMode { kChannelMax, kChannelAvg, kGlobalAvg, kGlobalMax };

template <class S> Tensor<S> pool(const Tensor<S>& x, PoolMode mode);

// x: (N, inC, H, W); w: (outC, inC, k, k) with odd k; b: (outC). Zero padding.
template <class S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b,
                 int stride = 1, int padding = 0, int dilation = 1);

// Fused scaled-dot-product self-attention over (N, heads, T, d) operands;
// equivalent to softmax(q k^T / sqrt(d)) v but recomputes the score matrix in
// the backward pass instead of retaining it.
template <class S>
Tensor<S> attention(const Tensor<S>& q, const Tensor<S>& k, const Tensor<S>& v);

int conv_out_size(int in, int k, int stride, int padding, int dilation);

}  // namespace wgdf
