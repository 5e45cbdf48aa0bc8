#pragma once

#include <vector>

#include "oracles.hpp"
#include "wgdf/rng.hpp"
#include "wgdf/tensor.hpp"

namespace testutil {

template <class S>
wgdf::Tensor<S> random_tensor(wgdf::Rng& rng, const wgdf::Shape& shape,
                              double lo = -1.0, double hi = 1.0,
                              bool requires_grad = false) {
  std::vector<S> v(size_t(wgdf::shape_numel(shape)));
  for (S& x : v) x = S(rng.uniform(lo, hi));
  return wgdf::Tensor<S>::from_vector(shape, std::move(v), requires_grad);
}

template <class S>
oracle::Arr to_arr(const wgdf::Tensor<S>& t) {
  oracle::Arr a(t.rank() > 0 ? t.dim(0) : 1, t.rank() > 1 ? t.dim(1) : 1,
                t.rank() > 2 ? t.dim(2) : 1, t.rank() > 3 ? t.dim(3) : 1);
  for (size_t i = 0; i < a.v.size(); ++i) a.v[i] = double(t.data()[i]);
  return a;
}

template <class S>
double max_abs_diff(const wgdf::Tensor<S>& t, const oracle::Arr& a) {
  double worst = 0;
  for (size_t i = 0; i < a.v.size(); ++i)
    worst = std::max(worst, std::fabs(double(t.data()[i]) - a.v[i]));
  return worst;
}

template <class S>
double max_abs_diff(const wgdf::Tensor<S>& x, const wgdf::Tensor<S>& y) {
  double worst = 0;
  for (size_t i = 0; i < size_t(x.numel()); ++i)
    worst = std::max(worst, std::fabs(double(x.data()[i]) - double(y.data()[i])));
  return worst;
}

inline wgdf::Mask random_mask(wgdf::Rng& rng, int h, int w,
                              double density = 0.4) {
  wgdf::Mask m(h, w);
  for (auto& v : m.v) v = rng.uniform() < density ? 1 : 0;
  return m;
}

}  // namespace testutil
