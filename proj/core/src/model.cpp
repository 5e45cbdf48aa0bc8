#include "wgdf/model.hpp"

#include <cmath>
#include <sstream>

#include "wgdf/ops.hpp"
#include "wgdf/rng.hpp"

namespace wgdf {

void ModelConfig::validate() const {
  if (c_img < 1) throw ConfigError("model.c_img must be >= 1");
  if (c_hf < 4 || c_hf % 2 != 0)
    throw ConfigError("model.c_hf must be even and >= 4");
  if (c_lf < 1) throw ConfigError("model.c_lf must be >= 1");
  if (heads < 1) throw ConfigError("model.heads must be >= 1");
  if (c_lf % heads != 0)
    throw ConfigError("model.c_lf must be divisible by model.heads");
  if (stages < 1) throw ConfigError("model.stages must be >= 1");
  if (!(classifier_threshold > 0.0 && classifier_threshold < 1.0))
    throw ConfigError("model.classifier_threshold must be in (0,1)");
}

namespace {

// Registers parameters in a fixed order so initialization is a deterministic
// function of the seed and checkpoints have a stable layout.
template <class S>
class ParamBuilder {
 public:
  ParamBuilder(WgdfParams<S>& out, uint64_t seed) : out_(out), rng_(seed) {}

  Tensor<S> conv(const std::string& name, int oc, int ic, int k) {
    return weight(name + ".w", {oc, ic, k, k}, ic * k * k, oc * k * k);
  }
  Tensor<S> bias(const std::string& name, int len) {
    return reg(name + ".b", Tensor<S>::zeros({len}, true));
  }
  Tensor<S> matrix(const std::string& name, int rows, int cols) {
    return weight(name, {rows, cols}, rows, cols);
  }
  Tensor<S> ones(const std::string& name, int len) {
    return reg(name, Tensor<S>::full({len}, S(1), true));
  }
  Tensor<S> zeros1d(const std::string& name, int len) {
    return reg(name, Tensor<S>::zeros({len}, true));
  }

 private:
  Tensor<S> weight(const std::string& name, const Shape& shape, int fan_in,
                   int fan_out) {
    const double bound = std::sqrt(6.0 / double(fan_in + fan_out));
    std::vector<S> data(size_t(shape_numel(shape)));
    for (S& v : data) v = S(rng_.uniform(-bound, bound));
    return reg(name, Tensor<S>::from_vector(shape, std::move(data), true));
  }
  Tensor<S> reg(const std::string& name, Tensor<S> t) {
    out_.named.emplace_back(name, t);
    return t;
  }

  WgdfParams<S>& out_;
  Rng rng_;
};

template <class S>
CbamParams<S> build_cbam(ParamBuilder<S>& b, const std::string& prefix, int c) {
  const int hidden = std::max(1, c / 4);
  CbamParams<S> p;
  p.mlp1_w = b.matrix(prefix + ".mlp1.w", c, hidden);
  p.mlp1_b = b.bias(prefix + ".mlp1", hidden);
  p.mlp2_w = b.matrix(prefix + ".mlp2.w", hidden, c);
  p.mlp2_b = b.bias(prefix + ".mlp2", c);
  p.spatial_w = b.conv(prefix + ".spatial", 1, 2, 7);
  p.spatial_b = b.bias(prefix + ".spatial", 1);
  return p;
}

template <class S>
FdidParams<S> build_fdid(ParamBuilder<S>& b, const std::string& prefix, int c) {
  FdidParams<S> p;
  p.conv3_w = b.conv(prefix + ".conv3", c, c, 3);
  p.conv3_b = b.bias(prefix + ".conv3", c);
  p.conv5_w = b.conv(prefix + ".conv5", c, c, 5);
  p.conv5_b = b.bias(prefix + ".conv5", c);
  p.conv7_w = b.conv(prefix + ".conv7", c, c, 7);
  p.conv7_b = b.bias(prefix + ".conv7", c);
  p.cbam3 = build_cbam(b, prefix + ".cbam3", c);
  p.cbam5 = build_cbam(b, prefix + ".cbam5", c);
  p.cbam7 = build_cbam(b, prefix + ".cbam7", c);
  const int c3 = 3 * c;
  const int hidden = std::max(1, c3 / 4);
  p.mlp1_w = b.matrix(prefix + ".mlp1.w", c3, hidden);
  p.mlp1_b = b.bias(prefix + ".mlp1", hidden);
  p.mlp2_w = b.matrix(prefix + ".mlp2.w", hidden, c3);
  p.mlp2_b = b.bias(prefix + ".mlp2", c3);
  p.proj_w = b.conv(prefix + ".proj", c, c3, 1);
  p.proj_b = b.bias(prefix + ".proj", c);
  return p;
}

}  // namespace

template <class S>
WgdfParams<S> init_params(const ModelConfig& cfg) {
  cfg.validate();
  WgdfParams<S> p;
  ParamBuilder<S> b(p, cfg.seed);
  const int ci = cfg.c_img, ch = cfg.c_hf, cl = cfg.c_lf;

  p.hf_stem_w = b.conv("hf.stem", ch, 3 * ci, 3);
  p.hf_stem_b = b.bias("hf.stem", ch);

  const int c_comp = std::max(1, ch / 2);
  p.dffe.resize(size_t(cfg.stages));
  for (int i = 0; i < cfg.stages; ++i) {
    const std::string pre = "hf.dffe." + std::to_string(i);
    auto& st = p.dffe[size_t(i)];
    st.conv1x1_w = b.conv(pre + ".conv1x1", c_comp, ch, 1);
    st.conv1x1_b = b.bias(pre + ".conv1x1", c_comp);
    const int in_ch = cfg.eq2_combine == Eq2Combine::kConcat ? 2 : 1;
    st.conv7x7_w = b.conv(pre + ".conv7x7", 1, in_ch, 7);
    st.conv7x7_b = b.bias(pre + ".conv7x7", 1);
  }

  p.head_lh_w = b.conv("hf.head.lh", ch, ch, 1);
  p.head_lh_b = b.bias("hf.head.lh", ch);
  p.head_hl_w = b.conv("hf.head.hl", ch, ch, 1);
  p.head_hl_b = b.bias("hf.head.hl", ch);
  p.head_hh_w = b.conv("hf.head.hh", ch, ch, 1);
  p.head_hh_b = b.bias("hf.head.hh", ch);

  if (cfg.fdid_shared) {
    p.fdid.push_back(build_fdid(b, "hf.fdid", ch));
  } else {
    p.fdid.push_back(build_fdid(b, "hf.fdid.lh", ch));
    p.fdid.push_back(build_fdid(b, "hf.fdid.hl", ch));
    p.fdid.push_back(build_fdid(b, "hf.fdid.hh", ch));
  }

  p.out_lh_w = b.conv("hf.out.lh", ci, ch, 1);
  p.out_lh_b = b.bias("hf.out.lh", ci);
  p.out_hl_w = b.conv("hf.out.hl", ci, ch, 1);
  p.out_hl_b = b.bias("hf.out.hl", ci);
  p.out_hh_w = b.conv("hf.out.hh", ci, ch, 1);
  p.out_hh_b = b.bias("hf.out.hh", ci);

  p.lf_stem_w = b.conv("lf.stem", cl, ci, 1);
  p.lf_stem_b = b.bias("lf.stem", cl);

  p.tr.resize(size_t(cfg.stages));
  for (int i = 0; i < cfg.stages; ++i) {
    const std::string pre = "lf.tr." + std::to_string(i);
    auto& blk = p.tr[size_t(i)];
    blk.heads = cfg.heads;
    blk.ln1_g = b.ones(pre + ".ln1.g", cl);
    blk.ln1_b = b.zeros1d(pre + ".ln1.b", cl);
    blk.wq = b.matrix(pre + ".attn.wq", cl, cl);
    blk.wk = b.matrix(pre + ".attn.wk", cl, cl);
    blk.wv = b.matrix(pre + ".attn.wv", cl, cl);
    blk.wo = b.matrix(pre + ".attn.wo", cl, cl);
    blk.ln2_g = b.ones(pre + ".ln2.g", cl);
    blk.ln2_b = b.zeros1d(pre + ".ln2.b", cl);
    blk.fc1_w = b.matrix(pre + ".mlp.fc1.w", cl, 2 * cl);
    blk.fc1_b = b.bias(pre + ".mlp.fc1", 2 * cl);
    blk.fc2_w = b.matrix(pre + ".mlp.fc2.w", 2 * cl, cl);
    blk.fc2_b = b.bias(pre + ".mlp.fc2", cl);
  }

  p.pcdm.diff_w = b.conv("lf.pcdm.diff", cl, cl, 3);
  p.pcdm.diff_b = b.bias("lf.pcdm.diff", cl);
  p.pcdm.dil7_w = b.conv("lf.pcdm.dil7", cl, cl, 3);
  p.pcdm.dil7_b = b.bias("lf.pcdm.dil7", cl);
  p.pcdm.dil5_w = b.conv("lf.pcdm.dil5", cl, cl, 3);
  p.pcdm.dil5_b = b.bias("lf.pcdm.dil5", cl);
  p.pcdm.dil3_w = b.conv("lf.pcdm.dil3", cl, cl, 3);
  p.pcdm.dil3_b = b.bias("lf.pcdm.dil3", cl);
  p.pcdm.dil1_w = b.conv("lf.pcdm.dil1", cl, cl, 3);
  p.pcdm.dil1_b = b.bias("lf.pcdm.dil1", cl);
  p.pcdm.fuse_w = b.conv("lf.pcdm.fuse", cl, 2 * cl, 3);
  p.pcdm.fuse_b = b.bias("lf.pcdm.fuse", cl);
  p.pcdm.proj_w = b.conv("lf.pcdm.proj", cl, cl, 1);
  p.pcdm.proj_b = b.bias("lf.pcdm.proj", cl);

  p.lf_out_w = b.conv("lf.out", ci, cl, 1);
  p.lf_out_b = b.bias("lf.out", ci);

  p.cls1_w = b.conv("cls.conv1", 16, ci, 3);
  p.cls1_b = b.bias("cls.conv1", 16);
  p.cls2_w = b.conv("cls.conv2", 1, 16, 1);
  p.cls2_b = b.bias("cls.conv2", 1);

  // The registry must be total and collision-free.
  for (size_t i = 0; i < p.named.size(); ++i)
    for (size_t j = i + 1; j < p.named.size(); ++j)
      if (p.named[i].first == p.named[j].first)
        throw ConfigError("duplicate parameter name " + p.named[i].first);
  return p;
}

template <class S>
const Tensor<S>* WgdfParams<S>::find(std::string_view name) const {
  for (const auto& [n, t] : named)
    if (n == name) return &t;
  return nullptr;
}

template <class S>
void WgdfParams<S>::zero_grad() {
  for (auto& [n, t] : named) t.zero_grad();
}

template <class S>
int64_t WgdfParams<S>::param_count() const {
  int64_t total = 0;
  for (const auto& [n, t] : named) total += t.numel();
  return total;
}

template <class S>
const Tensor<S>* ForwardTrace<S>::find(std::string_view name) const {
  for (const auto& [n, t] : entries)
    if (n == name) return &t;
  return nullptr;
}

namespace {

// Fixed sinusoidal embedding over the flattened token index, tiled across
// the batch and shared by both temporal streams.
template <class S>
Tensor<S> positional_map(int n, int c, int h, int w) {
  const int t = h * w;
  std::vector<S> plane(size_t(c) * t);
  for (int ci = 0; ci < c; ++ci) {
    const double freq = std::pow(10000.0, -double(2 * (ci / 2)) / double(c));
    for (int pos = 0; pos < t; ++pos) {
      const double angle = double(pos) * freq;
      plane[size_t(ci) * t + pos] =
          S(ci % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  std::vector<S> data(size_t(n) * c * t);
  for (int i = 0; i < n; ++i)
    std::copy(plane.begin(), plane.end(), data.begin() + int64_t(i) * c * t);
  return Tensor<S>::from_vector({n, c, h, w}, std::move(data), false);
}

}  // namespace

template <class S>
Tensor<S> wgdf_forward(const Tensor<S>& a, const Tensor<S>& b,
                       const WgdfParams<S>& params, const ModelConfig& cfg,
                       ForwardTrace<S>* trace) {
  require(a.rank() == 4 && b.rank() == 4, "wgdf_forward: inputs must be NCHW");
  require(shape_eq(a.shape(), b.shape()),
          "wgdf_forward: bi-temporal shapes must match, " +
              shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  require(a.dim(1) == cfg.c_img,
          "wgdf_forward: input channels " + std::to_string(a.dim(1)) +
              " do not match model.c_img " + std::to_string(cfg.c_img));

  Subbands<S> sa = dwt2(a);
  Subbands<S> sb = dwt2(b);
  if (trace) {
    trace->put("bands.a.ll", sa.ll);
    trace->put("bands.a.lh", sa.lh);
    trace->put("bands.a.hl", sa.hl);
    trace->put("bands.a.hh", sa.hh);
    trace->put("bands.b.ll", sb.ll);
    trace->put("bands.b.lh", sb.lh);
    trace->put("bands.b.hl", sb.hl);
    trace->put("bands.b.hh", sb.hh);
  }

  // High-frequency path: joint detail tuple -> stacked DFFE -> per-band
  // heads -> FDID -> image-channel projections.
  Tensor<S> t1 = conv2d(concat<S>({sa.lh, sa.hl, sa.hh}, 1), params.hf_stem_w,
                        params.hf_stem_b, 1, 1, 1);
  Tensor<S> t2 = conv2d(concat<S>({sb.lh, sb.hl, sb.hh}, 1), params.hf_stem_w,
                        params.hf_stem_b, 1, 1, 1);
  for (int i = 0; i < cfg.stages; ++i) {
    DffeResult<S> r =
        dffe_forward(t1, t2, params.dffe[size_t(i)], cfg.eq2_combine);
    t1 = r.out1;
    t2 = r.out2;
    if (trace) {
      trace->put("hf.dffe." + std::to_string(i) + ".t_d", r.acts.t_d);
      trace->put("hf.dffe." + std::to_string(i) + ".w", r.acts.w);
    }
  }
  if (trace) {
    trace->put("hf.t1", t1);
    trace->put("hf.t2", t2);
  }

  auto band_diff = [&](const Tensor<S>& head_w, const Tensor<S>& head_b,
                       const FdidParams<S>& fdid, const Tensor<S>& out_w,
                       const Tensor<S>& out_b, const char* name) {
    Tensor<S> f1 = conv2d(t1, head_w, head_b);
    Tensor<S> f2 = conv2d(t2, head_w, head_b);
    FdidResult<S> r = fdid_forward(f1, f2, fdid);
    Tensor<S> d = conv2d(r.h_diff, out_w, out_b);
    if (trace) {
      trace->put(std::string("hf.fdid.") + name + ".d", r.acts.d);
      trace->put(std::string("diff.") + name, d);
    }
    return d;
  };
  const auto& fd_lh = params.fdid.front();
  const auto& fd_hl = cfg.fdid_shared ? params.fdid.front() : params.fdid[1];
  const auto& fd_hh = cfg.fdid_shared ? params.fdid.front() : params.fdid[2];
  Tensor<S> d_lh = band_diff(params.head_lh_w, params.head_lh_b, fd_lh,
                             params.out_lh_w, params.out_lh_b, "lh");
  Tensor<S> d_hl = band_diff(params.head_hl_w, params.head_hl_b, fd_hl,
                             params.out_hl_w, params.out_hl_b, "hl");
  Tensor<S> d_hh = band_diff(params.head_hh_w, params.head_hh_b, fd_hh,
                             params.out_hh_w, params.out_hh_b, "hh");

  // Low-frequency path: Siamese transformer stack -> PCDM -> image channels.
  Tensor<S> f1 = conv2d(sa.ll, params.lf_stem_w, params.lf_stem_b);
  Tensor<S> f2 = conv2d(sb.ll, params.lf_stem_w, params.lf_stem_b);
  if (cfg.positional_encoding) {
    Tensor<S> pe =
        positional_map<S>(f1.dim(0), cfg.c_lf, f1.dim(2), f1.dim(3));
    f1 = add(f1, pe);
    f2 = add(f2, pe);
  }
  for (int i = 0; i < cfg.stages; ++i) {
    auto [o1, o2] = tr_block(f1, f2, params.tr[size_t(i)]);
    f1 = o1;
    f2 = o2;
  }
  if (trace) {
    trace->put("lf.f1", f1);
    trace->put("lf.f2", f2);
  }
  PcdmResult<S> pr = pcdm_forward(f1, f2, params.pcdm, cfg.pcdm_combine);
  Tensor<S> d_ll = conv2d(pr.d_ll, params.lf_out_w, params.lf_out_b);
  if (trace) {
    trace->put("lf.pcdm.d_i", pr.acts.d_i);
    trace->put("diff.ll", d_ll);
  }

  Tensor<S> fused = idwt2(Subbands<S>{d_ll, d_lh, d_hl, d_hh});
  if (trace) trace->put("fused", fused);

  Tensor<S> logits = conv2d(
      relu(conv2d(fused, params.cls1_w, params.cls1_b, 1, 1, 1)), params.cls2_w,
      params.cls2_b);
  if (trace) trace->put("logits", logits);
  return logits;
}

template <class S>
std::vector<Mask> classify(const Tensor<S>& logits, double threshold) {
  require(logits.rank() == 4 && logits.dim(1) == 1,
          "classify: logits must be (N,1,H,W)");
  require(threshold > 0.0 && threshold < 1.0,
          "classify: threshold must be in (0,1)");
  const int n = logits.dim(0), h = logits.dim(2), w = logits.dim(3);
  auto lv = logits.data();
  std::vector<Mask> masks;
  masks.reserve(size_t(n));
  for (int i = 0; i < n; ++i) {
    Mask m(h, w);
    const S* src = lv.data() + int64_t(i) * h * w;
    for (int64_t p = 0; p < int64_t(h) * w; ++p) {
      const double x = double(src[p]);
      const double prob =
          x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                   : std::exp(x) / (1.0 + std::exp(x));
      m.v[size_t(p)] = prob > threshold ? 1 : 0;
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

int64_t param_count(const ModelConfig& cfg) {
  return init_params<float>(cfg).param_count();
}

std::string describe(const ModelConfig& cfg) {
  auto params = init_params<float>(cfg);
  std::ostringstream os;
  os << "name\tshape\tcount\n";
  for (const auto& [name, t] : params.named)
    os << name << "\t" << shape_str(t.shape()) << "\t" << t.numel() << "\n";
  os << "total\t\t" << params.param_count() << "\n";
  return os.str();
}

#define WGDF_INSTANTIATE_MODEL(S)                                         \
  template struct WgdfParams<S>;                                          \
  template struct ForwardTrace<S>;                                        \
  template WgdfParams<S> init_params<S>(const ModelConfig&);              \
  template Tensor<S> wgdf_forward<S>(const Tensor<S>&, const Tensor<S>&,  \
                                     const WgdfParams<S>&,                \
                                     const ModelConfig&, ForwardTrace<S>*); \
  template std::vector<Mask> classify<S>(const Tensor<S>&, double);

WGDF_INSTANTIATE_MODEL(float)
WGDF_INSTANTIATE_MODEL(double)

}  // namespace wgdf
