#pragma once

#include "wgdf/tensor.hpp"

namespace wgdf {

// One level of 2-d orthonormal Haar analysis, per channel. Each band is
// (N, C, H/2, W/2). Filters are the separable pair (1/sqrt(2))[1,1] and
// (1/sqrt(2))[1,-1], rows then columns: for a 2x2 block [a b; c d],
//   ll = (a+b+c+d)/2    lh = (a+b-c-d)/2
//   hl = (a-b+c-d)/2    hh = (a-b-c+d)/2
// so LH responds to horizontal edges, HL to vertical ones.
template <class S>
struct Subbands {
  Tensor<S> ll, lh, hl, hh;
};

template <class S>
Subbands<S> dwt2(const Tensor<S>& x);

// Exact inverse of dwt2 under the same convention; output (N, C, 2H', 2W').
template <class S>
Tensor<S> idwt2(const Subbands<S>& s);

}  // namespace wgdf
