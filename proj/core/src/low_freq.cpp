#include "wgdf/low_freq.hpp"

#include "wgdf/ops.hpp"

namespace wgdf {

template <class S>
Tensor<S> tr_block(const Tensor<S>& x, const TrBlockParams<S>& p) {
  require(x.rank() == 4, "tr_block: input must be NCHW");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int t = h * w;
  const int heads = p.heads;
  if (c % heads != 0)
    throw ConfigError("tr_block: embedding dim " + std::to_string(c) +
                      " not divisible by head count " + std::to_string(heads));
  const int dh = c / heads;

  Tensor<S> tokens = permute(reshape(x, {n, c, t}), {0, 2, 1});  // (N,T,C)

  auto project = [&](const Tensor<S>& in, const Tensor<S>& wm) {
    // (N,T,C) x (C,C) -> heads split -> (N,heads,T,dh)
    Tensor<S> flat = matmul(reshape(in, {n * t, c}), wm);
    return permute(reshape(flat, {n, t, heads, dh}), {0, 2, 1, 3});
  };

  Tensor<S> normed = layer_norm(tokens, p.ln1_g, p.ln1_b);
  Tensor<S> att = attention(project(normed, p.wq), project(normed, p.wk),
                            project(normed, p.wv));
  Tensor<S> merged = reshape(permute(att, {0, 2, 1, 3}), {n * t, c});
  Tensor<S> att_out = reshape(matmul(merged, p.wo), {n, t, c});
  tokens = add(tokens, att_out);

  Tensor<S> normed2 = reshape(layer_norm(tokens, p.ln2_g, p.ln2_b), {n * t, c});
  Tensor<S> mlp =
      dense(relu(dense(normed2, p.fc1_w, p.fc1_b)), p.fc2_w, p.fc2_b);
  tokens = add(tokens, reshape(mlp, {n, t, c}));

  return reshape(permute(tokens, {0, 2, 1}), {n, c, h, w});
}

template <class S>
std::pair<Tensor<S>, Tensor<S>> tr_block(const Tensor<S>& f1,
                                         const Tensor<S>& f2,
                                         const TrBlockParams<S>& p) {
  return {tr_block(f1, p), tr_block(f2, p)};
}

template <class S>
PcdmResult<S> pcdm_forward(const Tensor<S>& f1, const Tensor<S>& f2,
                           const PcdmParams<S>& p, PcdmCombine combine) {
  require(shape_eq(f1.shape(), f2.shape()),
          "pcdm_forward: inputs must share a shape, " + shape_str(f1.shape()) +
              " vs " + shape_str(f2.shape()));
  PcdmResult<S> r;
  r.acts.d_i = conv2d(abs(sub(f1, f2)), p.diff_w, p.diff_b, 1, 1, 1);

  auto chain = [&](const Tensor<S>& f, Tensor<S>& f2g, Tensor<S>& f4,
                   Tensor<S>& f6, Tensor<S>& f7) {
    f2g = hadamard(add(f, r.acts.d_i), f);
    f4 = add(conv2d(f2g, p.dil7_w, p.dil7_b, 1, 7, 7), f);
    f6 = add(conv2d(f4, p.dil5_w, p.dil5_b, 1, 5, 5), f);
    f7 = conv2d(f6, p.dil3_w, p.dil3_b, 1, 3, 3);
    return conv2d(add(f7, f), p.dil1_w, p.dil1_b, 1, 1, 1);
  };
  r.acts.m1_l = chain(f1, r.acts.f_12, r.acts.f_14, r.acts.f_16, r.acts.f_17);
  r.acts.m2_l = chain(f2, r.acts.f_22, r.acts.f_24, r.acts.f_26, r.acts.f_27);

  Tensor<S> fused = conv2d(concat<S>({r.acts.m1_l, r.acts.m2_l}, 1), p.fuse_w,
                           p.fuse_b, 1, 1, 1);
  Tensor<S> joined = combine == PcdmCombine::kGate ? hadamard(fused, r.acts.d_i)
                                                   : add(fused, r.acts.d_i);
  r.acts.d_ll = conv2d(joined, p.proj_w, p.proj_b);
  r.d_ll = r.acts.d_ll;
  return r;
}

#define WGDF_INSTANTIATE_LF(S)                                              \
  template Tensor<S> tr_block<S>(const Tensor<S>&, const TrBlockParams<S>&); \
  template std::pair<Tensor<S>, Tensor<S>> tr_block<S>(                     \
      const Tensor<S>&, const Tensor<S>&, const TrBlockParams<S>&);         \
  template PcdmResult<S> pcdm_forward<S>(const Tensor<S>&, const Tensor<S>&, \
                                         const PcdmParams<S>&, PcdmCombine);

WGDF_INSTANTIATE_LF(float)
WGDF_INSTANTIATE_LF(double)

}  // namespace wgdf
