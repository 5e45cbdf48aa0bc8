#include "wgdf/wavelet.hpp"

#include "op_common.hpp"

namespace wgdf {

namespace {

// Signed half-sum over each non-overlapping 2x2 block [a b; c d]. The 4x4
// Haar block matrix is symmetric, so analysis and its transpose share the
// same sign pattern per band.
struct BandSigns {
  int a, b, c, d;
};
constexpr BandSigns kLL{+1, +1, +1, +1};
constexpr BandSigns kLH{+1, +1, -1, -1};
constexpr BandSigns kHL{+1, -1, +1, -1};
constexpr BandSigns kHH{+1, -1, -1, +1};

template <class S>
Tensor<S> band(const char* name, const Tensor<S>& x, BandSigns sg) {
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int oh = h / 2, ow = w / 2;
  auto xv = x.data();
  std::vector<S> out(size_t(n) * c * oh * ow);
  for (int64_t plane = 0; plane < int64_t(n) * c; ++plane) {
    const S* src = xv.data() + plane * h * w;
    S* dst = out.data() + plane * oh * ow;
    for (int y = 0; y < oh; ++y) {
      for (int xg = 0; xg < ow; ++xg) {
        const S a = src[(2 * y) * w + 2 * xg];
        const S b = src[(2 * y) * w + 2 * xg + 1];
        const S cc = src[(2 * y + 1) * w + 2 * xg];
        const S dd = src[(2 * y + 1) * w + 2 * xg + 1];
        dst[y * ow + xg] =
            (S(sg.a) * a + S(sg.b) * b + S(sg.c) * cc + S(sg.d) * dd) * S(0.5);
      }
    }
  }
  return detail::make_op<S>(
      name, {n, c, oh, ow}, std::move(out), {x},
      [n, c, h, w, oh, ow, sg](detail::Node<S>& o) {
        auto& p = *o.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (int64_t plane = 0; plane < int64_t(n) * c; ++plane) {
          const S* g = o.grad.data() + plane * oh * ow;
          S* dst = p.grad.data() + plane * h * w;
          for (int y = 0; y < oh; ++y) {
            for (int xg = 0; xg < ow; ++xg) {
              const S gv = g[y * ow + xg] * S(0.5);
              dst[(2 * y) * w + 2 * xg] += S(sg.a) * gv;
              dst[(2 * y) * w + 2 * xg + 1] += S(sg.b) * gv;
              dst[(2 * y + 1) * w + 2 * xg] += S(sg.c) * gv;
              dst[(2 * y + 1) * w + 2 * xg + 1] += S(sg.d) * gv;
            }
          }
        }
      });
}

}  // namespace

template <class S>
Subbands<S> dwt2(const Tensor<S>& x) {
  require(x.rank() == 4, "dwt2: input must be NCHW");
  require(x.dim(2) % 2 == 0 && x.dim(3) % 2 == 0,
          "dwt2: spatial dims must be even, got " + shape_str(x.shape()));
  Subbands<S> s;
  s.ll = band<S>("dwt2_ll", x, kLL);
  s.lh = band<S>("dwt2_lh", x, kLH);
  s.hl = band<S>("dwt2_hl", x, kHL);
  s.hh = band<S>("dwt2_hh", x, kHH);
  return s;
}

template <class S>
Tensor<S> idwt2(const Subbands<S>& s) {
  require(s.ll.defined() && s.lh.defined() && s.hl.defined() && s.hh.defined(),
          "idwt2: all four subbands must be set");
  require(shape_eq(s.ll.shape(), s.lh.shape()) &&
              shape_eq(s.ll.shape(), s.hl.shape()) &&
              shape_eq(s.ll.shape(), s.hh.shape()),
          "idwt2: subband shapes disagree");
  require(s.ll.rank() == 4, "idwt2: subbands must be NCHW");
  const int n = s.ll.dim(0), c = s.ll.dim(1), oh = s.ll.dim(2),
            ow = s.ll.dim(3);
  const int h = 2 * oh, w = 2 * ow;
  auto llv = s.ll.data();
  auto lhv = s.lh.data();
  auto hlv = s.hl.data();
  auto hhv = s.hh.data();
  std::vector<S> out(size_t(n) * c * h * w);
  for (int64_t plane = 0; plane < int64_t(n) * c; ++plane) {
    const int64_t bo = plane * oh * ow;
    S* dst = out.data() + plane * h * w;
    for (int y = 0; y < oh; ++y) {
      for (int xg = 0; xg < ow; ++xg) {
        const S ll = llv[size_t(bo + y * ow + xg)];
        const S lh = lhv[size_t(bo + y * ow + xg)];
        const S hl = hlv[size_t(bo + y * ow + xg)];
        const S hh = hhv[size_t(bo + y * ow + xg)];
        dst[(2 * y) * w + 2 * xg] = (ll + lh + hl + hh) * S(0.5);
        dst[(2 * y) * w + 2 * xg + 1] = (ll + lh - hl - hh) * S(0.5);
        dst[(2 * y + 1) * w + 2 * xg] = (ll - lh + hl - hh) * S(0.5);
        dst[(2 * y + 1) * w + 2 * xg + 1] = (ll - lh - hl + hh) * S(0.5);
      }
    }
  }
  return detail::make_op<S>(
      "idwt2", {n, c, h, w}, std::move(out), {s.ll, s.lh, s.hl, s.hh},
      [n, c, h, w, oh, ow](detail::Node<S>& o) {
        const BandSigns all[4] = {kLL, kLH, kHL, kHH};
        for (int bi = 0; bi < 4; ++bi) {
          auto& p = *o.parents[size_t(bi)];
          if (!p.requires_grad) continue;
          p.ensure_grad();
          const BandSigns sg = all[bi];
          for (int64_t plane = 0; plane < int64_t(n) * c; ++plane) {
            const S* g = o.grad.data() + plane * h * w;
            S* dst = p.grad.data() + plane * oh * ow;
            for (int y = 0; y < oh; ++y) {
              for (int xg = 0; xg < ow; ++xg) {
                const S ga = g[(2 * y) * w + 2 * xg];
                const S gb = g[(2 * y) * w + 2 * xg + 1];
                const S gc = g[(2 * y + 1) * w + 2 * xg];
                const S gd = g[(2 * y + 1) * w + 2 * xg + 1];
                dst[y * ow + xg] += (S(sg.a) * ga + S(sg.b) * gb +
                                     S(sg.c) * gc + S(sg.d) * gd) *
                                    S(0.5);
              }
            }
          }
        }
      });
}

#define WGDF_INSTANTIATE_WAVELET(S)              \
  template Subbands<S> dwt2<S>(const Tensor<S>&); \
  template Tensor<S> idwt2<S>(const Subbands<S>&);

WGDF_INSTANTIATE_WAVELET(float)
WGDF_INSTANTIATE_WAVELET(double)

}  // namespace wgdf
