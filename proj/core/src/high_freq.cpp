#include "wgdf/high_freq.hpp"

#include "wgdf/ops.hpp"

namespace wgdf {

template <class S>
DffeResult<S> dffe_forward(const Tensor<S>& t1, const Tensor<S>& t2,
                           const DffeParams<S>& p, Eq2Combine combine) {
  require(shape_eq(t1.shape(), t2.shape()),
          "dffe_forward: temporal features must share a shape, " +
              shape_str(t1.shape()) + " vs " + shape_str(t2.shape()));
  DffeResult<S> r;
  r.acts.t_d = sub(t1, t2);
  Tensor<S> compressed = conv2d(r.acts.t_d, p.conv1x1_w, p.conv1x1_b);
  r.acts.f_max = pool(compressed, PoolMode::kChannelMax);
  r.acts.f_avg = pool(compressed, PoolMode::kChannelAvg);
  Tensor<S> pooled = combine == Eq2Combine::kConcat
                         ? concat<S>({r.acts.f_max, r.acts.f_avg}, 1)
                         : add(r.acts.f_max, r.acts.f_avg);
  r.acts.w = sigmoid(conv2d(pooled, p.conv7x7_w, p.conv7x7_b, 1, 3, 1));
  r.acts.f1_h = hadamard(r.acts.w, t1);
  r.acts.f2_h = hadamard(r.acts.w, t2);
  r.out1 = r.acts.f1_h;
  r.out2 = r.acts.f2_h;
  return r;
}

template <class S>
Tensor<S> cbam(const Tensor<S>& x, const CbamParams<S>& p) {
  require(x.rank() == 4, "cbam: input must be NCHW");
  const int n = x.dim(0), c = x.dim(1);
  auto mlp = [&](const Tensor<S>& pooled) {
    Tensor<S> flat = reshape(pooled, {n, c});
    return dense(relu(dense(flat, p.mlp1_w, p.mlp1_b)), p.mlp2_w, p.mlp2_b);
  };
  Tensor<S> ca_logit = add(mlp(pool(x, PoolMode::kGlobalAvg)),
                           mlp(pool(x, PoolMode::kGlobalMax)));
  Tensor<S> ca = reshape(sigmoid(ca_logit), {n, c, 1, 1});
  Tensor<S> xc = hadamard(x, ca);
  Tensor<S> sa_in = concat<S>(
      {pool(xc, PoolMode::kChannelAvg), pool(xc, PoolMode::kChannelMax)}, 1);
  Tensor<S> sa = sigmoid(conv2d(sa_in, p.spatial_w, p.spatial_b, 1, 3, 1));
  return hadamard(xc, sa);
}

template <class S>
FdidResult<S> fdid_forward(const Tensor<S>& h1, const Tensor<S>& h2,
                           const FdidParams<S>& p) {
  require(shape_eq(h1.shape(), h2.shape()),
          "fdid_forward: inputs must share a shape, " + shape_str(h1.shape()) +
              " vs " + shape_str(h2.shape()));
  FdidResult<S> r;
  r.acts.d = abs(sub(h1, h2));
  r.acts.d11 = cbam(conv2d(r.acts.d, p.conv3_w, p.conv3_b, 1, 1, 1), p.cbam3);
  r.acts.d22 = cbam(conv2d(r.acts.d, p.conv5_w, p.conv5_b, 1, 2, 1), p.cbam5);
  r.acts.d33 = cbam(conv2d(r.acts.d, p.conv7_w, p.conv7_b, 1, 3, 1), p.cbam7);
  r.acts.f_ms = concat<S>({r.acts.d11, r.acts.d22, r.acts.d33}, 1);
  const int n = r.acts.f_ms.dim(0), c3 = r.acts.f_ms.dim(1);
  Tensor<S> gap = reshape(pool(r.acts.f_ms, PoolMode::kGlobalAvg), {n, c3});
  Tensor<S> weights = sigmoid(
      dense(relu(dense(gap, p.mlp1_w, p.mlp1_b)), p.mlp2_w, p.mlp2_b));
  r.acts.f_att = hadamard(r.acts.f_ms, reshape(weights, {n, c3, 1, 1}));
  r.acts.h_diff = conv2d(r.acts.f_att, p.proj_w, p.proj_b);
  r.h_diff = r.acts.h_diff;
  return r;
}

#define WGDF_INSTANTIATE_HF(S)                                               \
  template DffeResult<S> dffe_forward<S>(const Tensor<S>&, const Tensor<S>&, \
                                         const DffeParams<S>&, Eq2Combine);  \
  template Tensor<S> cbam<S>(const Tensor<S>&, const CbamParams<S>&);        \
  template FdidResult<S> fdid_forward<S>(const Tensor<S>&, const Tensor<S>&, \
                                         const FdidParams<S>&);

WGDF_INSTANTIATE_HF(float)
WGDF_INSTANTIATE_HF(double)

}  // namespace wgdf
