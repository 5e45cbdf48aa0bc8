#include <Eigen/Dense>

#include "op_common.hpp"
#include "wgdf/ops.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wgdf {

int conv_out_size(int in, int k, int stride, int padding, int dilation) {
  return (in + 2 * padding - dilation * (k - 1) - 1) / stride + 1;
}

namespace {

template <class S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using MatCM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

struct ConvDims {
  int n, ic, h, w, oc, k, stride, pad, dil, oh, ow;
  int64_t kk() const { return int64_t(ic) * k * k; }
  int64_t m() const { return int64_t(n) * oh * ow; }
};

// Patch matrix (kk x m), one output pixel per column. Column blocks are a
// fixed size so the partition never depends on the thread count.
constexpr int64_t kColBlock = 2048;

// Reusable scratch: the patch matrices are tens of MB and would otherwise be
// mmap'd and page-faulted on every call.
template <class S>
S* scratch(int slot, int64_t need) {
  thread_local std::vector<S> bufs[3];
  auto& b = bufs[slot];
  if (int64_t(b.size()) < need) b.resize(size_t(need));
  return b.data();
}

template <class S>
void im2col(const ConvDims& d, const S* x, S* col) {
  const int64_t m = d.m();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int64_t blk = 0; blk < (m + kColBlock - 1) / kColBlock; ++blk) {
    const int64_t lo = blk * kColBlock, hi = std::min(m, lo + kColBlock);
    for (int64_t col_i = lo; col_i < hi; ++col_i) {
      const int ox = int(col_i % d.ow);
      const int oy = int((col_i / d.ow) % d.oh);
      const int n = int(col_i / (int64_t(d.ow) * d.oh));
      S* dst = col + col_i * d.kk();
      const int iy0 = oy * d.stride - d.pad;
      const int ix0 = ox * d.stride - d.pad;
      int64_t r = 0;
      for (int ic = 0; ic < d.ic; ++ic) {
        const S* plane = x + (int64_t(n) * d.ic + ic) * d.h * d.w;
        for (int ky = 0; ky < d.k; ++ky) {
          const int iy = iy0 + ky * d.dil;
          for (int kx = 0; kx < d.k; ++kx, ++r) {
            const int ix = ix0 + kx * d.dil;
            dst[r] = (iy >= 0 && iy < d.h && ix >= 0 && ix < d.w)
                         ? plane[int64_t(iy) * d.w + ix]
                         : S(0);
          }
        }
      }
    }
  }
}

template <class S>
void col2im_add(const ConvDims& d, const S* dcol, S* dx) {
  const int64_t m = d.m();
  for (int64_t col_i = 0; col_i < m; ++col_i) {
    const int ox = int(col_i % d.ow);
    const int oy = int((col_i / d.ow) % d.oh);
    const int n = int(col_i / (int64_t(d.ow) * d.oh));
    const S* src = dcol + col_i * d.kk();
    const int iy0 = oy * d.stride - d.pad;
    const int ix0 = ox * d.stride - d.pad;
    int64_t r = 0;
    for (int ic = 0; ic < d.ic; ++ic) {
      S* plane = dx + (int64_t(n) * d.ic + ic) * d.h * d.w;
      for (int ky = 0; ky < d.k; ++ky) {
        const int iy = iy0 + ky * d.dil;
        for (int kx = 0; kx < d.k; ++kx, ++r) {
          const int ix = ix0 + kx * d.dil;
          if (iy >= 0 && iy < d.h && ix >= 0 && ix < d.w)
            plane[int64_t(iy) * d.w + ix] += src[r];
        }
      }
    }
  }
}

// out_rm = W (oc x kk) * col (kk x m), threaded over fixed column blocks.
template <class S>
void gemm_blocked(const Eigen::Map<const MatRM<S>>& w,
                  const Eigen::Map<const MatCM<S>>& col,
                  Eigen::Map<MatRM<S>>& out) {
  const int64_t m = col.cols();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int64_t blk = 0; blk < (m + kColBlock - 1) / kColBlock; ++blk) {
    const int64_t lo = blk * kColBlock;
    const int64_t len = std::min(m, lo + kColBlock) - lo;
    out.middleCols(lo, len).noalias() = w * col.middleCols(lo, len);
  }
}

}  // namespace

template <class S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b,
                 int stride, int padding, int dilation) {
  require(x.rank() == 4, "conv2d: x must be NCHW");
  require(w.rank() == 4, "conv2d: w must be (outC, inC, k, k)");
  require(b.rank() == 1 && b.dim(0) == w.dim(0),
          "conv2d: bias must be 1-d of outC");
  require(w.dim(2) == w.dim(3) && w.dim(2) % 2 == 1,
          "conv2d: kernel must be square with odd size");
  require(x.dim(1) == w.dim(1),
          "conv2d: input channels " + std::to_string(x.dim(1)) +
              " do not match kernel channels " + std::to_string(w.dim(1)));
  require(stride >= 1 && dilation >= 1 && padding >= 0,
          "conv2d: stride/dilation must be >= 1, padding >= 0");

  ConvDims d;
  d.n = x.dim(0); d.ic = x.dim(1); d.h = x.dim(2); d.w = x.dim(3);
  d.oc = w.dim(0); d.k = w.dim(2);
  d.stride = stride; d.pad = padding; d.dil = dilation;
  d.oh = conv_out_size(d.h, d.k, stride, padding, dilation);
  d.ow = conv_out_size(d.w, d.k, stride, padding, dilation);
  require(d.oh > 0 && d.ow > 0, "conv2d: kernel does not fit the input");

  S* col_buf = scratch<S>(0, d.kk() * d.m());
  im2col(d, x.data().data(), col_buf);
  Eigen::Map<const MatCM<S>> col(col_buf, d.kk(), d.m());
  S* out_buf = scratch<S>(1, int64_t(d.oc) * d.m());
  Eigen::Map<MatRM<S>> out_mat(out_buf, d.oc, d.m());
  Eigen::Map<const MatRM<S>> wm(w.data().data(), d.oc, d.kk());
  gemm_blocked<S>(wm, col, out_mat);

  std::vector<S> out(size_t(d.n) * d.oc * d.oh * d.ow);
  const int64_t ohw = int64_t(d.oh) * d.ow;
  auto bv = b.data();
  for (int n = 0; n < d.n; ++n) {
    for (int oc = 0; oc < d.oc; ++oc) {
      const S* src = out_buf + oc * d.m() + int64_t(n) * ohw;
      S* dst = out.data() + (int64_t(n) * d.oc + oc) * ohw;
      const S bias = bv[size_t(oc)];
      for (int64_t i = 0; i < ohw; ++i) dst[i] = src[i] + bias;
    }
  }

  return detail::make_op<S>(
      "conv2d", {d.n, d.oc, d.oh, d.ow}, std::move(out), {x, w, b},
      [d](detail::Node<S>& o) {
        auto& xn = *o.parents[0];
        auto& wn = *o.parents[1];
        auto& bn = *o.parents[2];
        const int64_t ohw = int64_t(d.oh) * d.ow;
        // Gather the NCHW grad into (oc x m) layout.
        S* g_buf = scratch<S>(1, int64_t(d.oc) * d.m());
        Eigen::Map<MatRM<S>> g_mat(g_buf, d.oc, d.m());
        for (int n = 0; n < d.n; ++n)
          for (int oc = 0; oc < d.oc; ++oc)
            std::copy_n(o.grad.data() + (int64_t(n) * d.oc + oc) * ohw, ohw,
                        g_buf + oc * d.m() + int64_t(n) * ohw);
        if (bn.requires_grad) {
          bn.ensure_grad();
          for (int oc = 0; oc < d.oc; ++oc)
            bn.grad[size_t(oc)] += g_mat.row(oc).sum();
        }
        const bool need_w = wn.requires_grad;
        const bool need_x = xn.requires_grad;
        if (!need_w && !need_x) return;
        S* col_buf = scratch<S>(0, d.kk() * d.m());
        im2col(d, xn.value.data(), col_buf);
        Eigen::Map<const MatCM<S>> col(col_buf, d.kk(), d.m());
        if (need_w) {
          wn.ensure_grad();
          Eigen::Map<MatRM<S>> dw(wn.grad.data(), d.oc, d.kk());
          // Disjoint row blocks; fixed split keeps results thread-count
          // independent.
          constexpr int kRowBlock = 8;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
          for (int blk = 0; blk < (d.oc + kRowBlock - 1) / kRowBlock; ++blk) {
            const int lo = blk * kRowBlock;
            const int len = std::min(d.oc, lo + kRowBlock) - lo;
            dw.middleRows(lo, len).noalias() +=
                g_mat.middleRows(lo, len) * col.transpose();
          }
        }
        if (need_x) {
          xn.ensure_grad();
          S* dcol_buf = scratch<S>(2, d.kk() * d.m());
          Eigen::Map<MatCM<S>> dcol(dcol_buf, d.kk(), d.m());
          Eigen::Map<const MatRM<S>> wm(wn.value.data(), d.oc, d.kk());
          const int64_t m = d.m();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
          for (int64_t blk = 0; blk < (m + kColBlock - 1) / kColBlock; ++blk) {
            const int64_t lo = blk * kColBlock;
            const int64_t len = std::min(m, lo + kColBlock) - lo;
            dcol.middleCols(lo, len).noalias() =
                wm.transpose() * g_mat.middleCols(lo, len);
          }
          col2im_add<S>(d, dcol_buf, xn.grad.data());
        }
      });
}

template Tensor<float> conv2d<float>(const Tensor<float>&, const Tensor<float>&,
                                     const Tensor<float>&, int, int, int);
template Tensor<double> conv2d<double>(const Tensor<double>&,
                                       const Tensor<double>&,
                                       const Tensor<double>&, int, int, int);

}  // namespace wgdf
