#pragma once

#include <utility>

#include "wgdf/tensor.hpp"

namespace wgdf {

template <class S>
struct TrBlockParams {
  Tensor<S> ln1_g, ln1_b;
  Tensor<S> wq, wk, wv, wo;  // (C, C) projection matrices, bias-free
  Tensor<S> ln2_g, ln2_b;
  Tensor<S> fc1_w, fc1_b;  // C -> 2C
  Tensor<S> fc2_w, fc2_b;  // 2C -> C
  int heads = 4;
};

// Pre-norm transformer encoder block over the flattened spatial grid
// (H'*W' tokens, no positional encoding). Applied with identical weights to
// each temporal stream.
template <class S>
Tensor<S> tr_block(const Tensor<S>& x, const TrBlockParams<S>& p);

template <class S>
std::pair<Tensor<S>, Tensor<S>> tr_block(const Tensor<S>& f1,
                                         const Tensor<S>& f2,
                                         const TrBlockParams<S>& p);

// How the fused context path joins the coarse difference in the final
// projection: Hadamard gate (default; collapses to zero on equal inputs) or
// plain addition.
enum class PcdmCombine { kGate, kAdd };

template <class S>
struct PcdmParams {
  Tensor<S> diff_w, diff_b;  // 3x3 on |f1 - f2|
  Tensor<S> dil7_w, dil7_b;  // 3x3 dilated convs, shared across both streams
  Tensor<S> dil5_w, dil5_b;
  Tensor<S> dil3_w, dil3_b;
  Tensor<S> dil1_w, dil1_b;
  Tensor<S> fuse_w, fuse_b;  // 3x3, 2C -> C
  Tensor<S> proj_w, proj_b;  // 1x1, C -> C
};

template <class S>
struct PcdmActivations {
  Tensor<S> d_i;                 // coarse difference
  Tensor<S> f_12, f_22;          // gated temporal features
  Tensor<S> f_14, f_16, f_17;    // dilated chain, stream 1
  Tensor<S> f_24, f_26, f_27;    // dilated chain, stream 2
  Tensor<S> m1_l, m2_l;          // per-stream context summaries
  Tensor<S> d_ll;
};

template <class S>
struct PcdmResult {
  Tensor<S> d_ll;
  PcdmActivations<S> acts;
};

// Progressive contextual difference over the low-frequency features. All
// intermediates keep the (N, C, H', W') shape (dilated convs pad by their
// dilation).
template <class S>
PcdmResult<S> pcdm_forward(const Tensor<S>& f1, const Tensor<S>& f2,
                           const PcdmParams<S>& p,
                           PcdmCombine combine = PcdmCombine::kGate);

}  // namespace wgdf
