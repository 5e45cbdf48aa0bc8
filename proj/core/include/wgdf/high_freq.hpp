#pragma once

#include "wgdf/tensor.hpp"

namespace wgdf {

// How the two pooled descriptors feed the 7x7 attention conv: channel concat
// (2->1 kernel, the default) or elementwise sum (1->1 kernel).
enum class Eq2Combine { kConcat, kSum };

template <class S>
struct DffeParams {
  Tensor<S> conv1x1_w, conv1x1_b;  // channel compression ahead of pooling
  Tensor<S> conv7x7_w, conv7x7_b;  // pooled pair -> spatial attention logit
};

template <class S>
struct DffeActivations {
  Tensor<S> t_d;           // signed difference of the temporal features
  Tensor<S> f_max, f_avg;  // (N,1,H,W) pooled descriptors
  Tensor<S> w;             // (N,1,H,W) attention map, in (0,1)
  Tensor<S> f1_h, f2_h;    // recalibrated features
};

template <class S>
struct DffeResult {
  Tensor<S> out1, out2;
  DffeActivations<S> acts;
};

// One enhancement stage: a shared spatial attention map derived from the
// temporal difference recalibrates both temporal features.
template <class S>
DffeResult<S> dffe_forward(const Tensor<S>& t1, const Tensor<S>& t2,
                           const DffeParams<S>& p,
                           Eq2Combine combine = Eq2Combine::kConcat);

template <class S>
struct CbamParams {
  Tensor<S> mlp1_w, mlp1_b;        // C -> C/r
  Tensor<S> mlp2_w, mlp2_b;        // C/r -> C
  Tensor<S> spatial_w, spatial_b;  // 7x7 conv, 2 -> 1
};

// Channel attention (global avg+max -> shared MLP -> sigmoid scale) followed
// by spatial attention (channel avg+max -> 7x7 conv -> sigmoid scale).
template <class S>
Tensor<S> cbam(const Tensor<S>& x, const CbamParams<S>& p);

template <class S>
struct FdidParams {
  Tensor<S> conv3_w, conv3_b;
  Tensor<S> conv5_w, conv5_b;
  Tensor<S> conv7_w, conv7_b;
  CbamParams<S> cbam3, cbam5, cbam7;
  Tensor<S> mlp1_w, mlp1_b;  // 3C -> 3C/r channel attention
  Tensor<S> mlp2_w, mlp2_b;  // 3C/r -> 3C
  Tensor<S> proj_w, proj_b;  // 1x1, 3C -> C
};

template <class S>
struct FdidActivations {
  Tensor<S> d;              // |h1 - h2|
  Tensor<S> d11, d22, d33;  // per-scale CBAM-enhanced branches
  Tensor<S> f_ms;           // channel concat of the branches
  Tensor<S> f_att;          // channel-reweighted fusion
  Tensor<S> h_diff;
};

template <class S>
struct FdidResult {
  Tensor<S> h_diff;
  FdidActivations<S> acts;
};

// Multi-scale interactive difference over a pair of high-frequency features.
// Symmetric in its inputs by construction.
template <class S>
FdidResult<S> fdid_forward(const Tensor<S>& h1, const Tensor<S>& h2,
                           const FdidParams<S>& p);

}  // namespace wgdf
