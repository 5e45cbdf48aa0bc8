#include <Eigen/Dense>
#include <cmath>

#include "op_common.hpp"
#include "wgdf/ops.hpp"

namespace wgdf {

namespace {

template <class S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using MapRM = Eigen::Map<MatRM<S>>;
template <class S>
using CMapRM = Eigen::Map<const MatRM<S>>;

struct MatmulPlan {
  int64_t batch = 1;
  int m = 0, k = 0, n = 0;
  bool a_shared = false;  // rank-2 operand reused across the batch
  bool b_shared = false;
  Shape out_shape;
};

MatmulPlan plan_matmul(const Shape& a, const Shape& b) {
  require(a.size() >= 2 && b.size() >= 2, "matmul: operands must be rank >= 2");
  MatmulPlan p;
  p.m = a[a.size() - 2];
  p.k = a[a.size() - 1];
  require(b[b.size() - 2] == p.k,
          "matmul: inner dims disagree, " + shape_str(a) + " x " + shape_str(b));
  p.n = b[b.size() - 1];
  Shape lead;
  if (a.size() == 2 && b.size() == 2) {
    p.out_shape = {p.m, p.n};
    return p;
  }
  if (b.size() == 2) {
    p.b_shared = true;
    lead.assign(a.begin(), a.end() - 2);
  } else if (a.size() == 2) {
    p.a_shared = true;
    lead.assign(b.begin(), b.end() - 2);
  } else {
    require(a.size() == b.size() &&
                std::equal(a.begin(), a.end() - 2, b.begin()),
            "matmul: batch dims disagree, " + shape_str(a) + " x " + shape_str(b));
    lead.assign(a.begin(), a.end() - 2);
  }
  p.batch = shape_numel(lead);
  p.out_shape = lead;
  p.out_shape.push_back(p.m);
  p.out_shape.push_back(p.n);
  return p;
}

}  // namespace

template <class S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  MatmulPlan p = plan_matmul(a.shape(), b.shape());
  auto av = a.data();
  auto bv = b.data();
  std::vector<S> out(size_t(shape_numel(p.out_shape)));
  const int64_t asz = int64_t(p.m) * p.k, bsz = int64_t(p.k) * p.n,
                osz = int64_t(p.m) * p.n;
  for (int64_t i = 0; i < p.batch; ++i) {
    CMapRM<S> A(av.data() + (p.a_shared ? 0 : i * asz), p.m, p.k);
    CMapRM<S> B(bv.data() + (p.b_shared ? 0 : i * bsz), p.k, p.n);
    MapRM<S> C(out.data() + i * osz, p.m, p.n);
    C.noalias() = A * B;
  }
  return detail::make_op<S>(
      "matmul", p.out_shape, std::move(out), {a, b}, [p, asz, bsz, osz](detail::Node<S>& o) {
        auto& an = *o.parents[0];
        auto& bn = *o.parents[1];
        if (an.requires_grad) an.ensure_grad();
        if (bn.requires_grad) bn.ensure_grad();
        for (int64_t i = 0; i < p.batch; ++i) {
          CMapRM<S> G(o.grad.data() + i * osz, p.m, p.n);
          if (an.requires_grad) {
            CMapRM<S> B(bn.value.data() + (p.b_shared ? 0 : i * bsz), p.k, p.n);
            MapRM<S> dA(an.grad.data() + (p.a_shared ? 0 : i * asz), p.m, p.k);
            dA.noalias() += G * B.transpose();
          }
          if (bn.requires_grad) {
            CMapRM<S> A(an.value.data() + (p.a_shared ? 0 : i * asz), p.m, p.k);
            MapRM<S> dB(bn.grad.data() + (p.b_shared ? 0 : i * bsz), p.k, p.n);
            dB.noalias() += A.transpose() * G;
          }
        }
      });
}

template <class S>
Tensor<S> dense(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b) {
  require(x.rank() == 2 && w.rank() == 2 && b.rank() == 1,
          "dense: expects x (N,F), w (F,G), b (G)");
  const int n = x.dim(0), f = x.dim(1), g = w.dim(1);
  require(w.dim(0) == f, "dense: w rows must equal x features");
  require(b.dim(0) == g, "dense: bias length must equal w cols");
  std::vector<S> out(size_t(n) * g);
  {
    CMapRM<S> X(x.data().data(), n, f);
    CMapRM<S> W(w.data().data(), f, g);
    MapRM<S> O(out.data(), n, g);
    O.noalias() = X * W;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < g; ++c) O(r, c) += b.data()[size_t(c)];
  }
  return detail::make_op<S>(
      "dense", {n, g}, std::move(out), {x, w, b},
      [n, f, g](detail::Node<S>& o) {
        auto& xn = *o.parents[0];
        auto& wn = *o.parents[1];
        auto& bn = *o.parents[2];
        CMapRM<S> G(o.grad.data(), n, g);
        if (xn.requires_grad) {
          xn.ensure_grad();
          CMapRM<S> W(wn.value.data(), f, g);
          MapRM<S> dX(xn.grad.data(), n, f);
          dX.noalias() += G * W.transpose();
        }
        if (wn.requires_grad) {
          wn.ensure_grad();
          CMapRM<S> X(xn.value.data(), n, f);
          MapRM<S> dW(wn.grad.data(), f, g);
          dW.noalias() += X.transpose() * G;
        }
        if (bn.requires_grad) {
          bn.ensure_grad();
          for (int r = 0; r < n; ++r)
            for (int c = 0; c < g; ++c) bn.grad[size_t(c)] += G(r, c);
        }
      });
}

template <class S>
Tensor<S> softmax(const Tensor<S>& a, int axis) {
  require(axis >= 0 && axis < a.rank(), "softmax: axis out of range");
  const Shape& s = a.shape();
  int64_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= s[size_t(i)];
  for (int i = axis + 1; i < a.rank(); ++i) inner *= s[size_t(i)];
  const int64_t len = s[size_t(axis)];
  auto av = a.data();
  std::vector<S> out(av.size());
  for (int64_t ou = 0; ou < outer; ++ou) {
    for (int64_t in = 0; in < inner; ++in) {
      const int64_t base = ou * len * inner + in;
      S mx = av[size_t(base)];
      for (int64_t j = 1; j < len; ++j)
        mx = std::max(mx, av[size_t(base + j * inner)]);
      S denom = S(0);
      for (int64_t j = 0; j < len; ++j) {
        S e = std::exp(av[size_t(base + j * inner)] - mx);
        out[size_t(base + j * inner)] = e;
        denom += e;
      }
      const S inv = S(1) / denom;
      for (int64_t j = 0; j < len; ++j) out[size_t(base + j * inner)] *= inv;
    }
  }
  return detail::make_op<S>(
      "softmax", a.shape(), std::move(out), {a},
      [outer, inner, len](detail::Node<S>& o) {
        auto& p = *o.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (int64_t ou = 0; ou < outer; ++ou) {
          for (int64_t in = 0; in < inner; ++in) {
            const int64_t base = ou * len * inner + in;
            S dot = S(0);
            for (int64_t j = 0; j < len; ++j) {
              const size_t k = size_t(base + j * inner);
              dot += o.grad[k] * o.value[k];
            }
            for (int64_t j = 0; j < len; ++j) {
              const size_t k = size_t(base + j * inner);
              p.grad[k] += o.value[k] * (o.grad[k] - dot);
            }
          }
        }
      });
}

template <class S>
Tensor<S> layer_norm(const Tensor<S>& x, const Tensor<S>& gain,
                     const Tensor<S>& bias) {
  require(x.rank() >= 2, "layer_norm: input must be rank >= 2");
  const int c = x.dim(x.rank() - 1);
  require(gain.rank() == 1 && gain.dim(0) == c && bias.rank() == 1 &&
              bias.dim(0) == c,
          "layer_norm: gain/bias must be 1-d of the feature length");
  const int64_t rows = x.numel() / c;
  constexpr S kEps = S(1e-5);
  auto xv = x.data();
  auto gv = gain.data();
  auto bv = bias.data();
  std::vector<S> out(xv.size());
  std::vector<S> xhat(xv.size());
  std::vector<S> inv_std(static_cast<size_t>(rows), S(0));
  for (int64_t r = 0; r < rows; ++r) {
    const S* row = xv.data() + r * c;
    S mean = S(0);
    for (int j = 0; j < c; ++j) mean += row[j];
    mean /= S(c);
    S var = S(0);
    for (int j = 0; j < c; ++j) {
      S d = row[j] - mean;
      var += d * d;
    }
    var /= S(c);
    const S inv = S(1) / std::sqrt(var + kEps);
    inv_std[size_t(r)] = inv;
    for (int j = 0; j < c; ++j) {
      S xh = (row[j] - mean) * inv;
      xhat[size_t(r * c + j)] = xh;
      out[size_t(r * c + j)] = xh * gv[size_t(j)] + bv[size_t(j)];
    }
  }
  return detail::make_op<S>(
      "layer_norm", x.shape(), std::move(out), {x, gain, bias},
      [rows, c, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](detail::Node<S>& o) {
        auto& xn = *o.parents[0];
        auto& gn = *o.parents[1];
        auto& bn = *o.parents[2];
        if (gn.requires_grad) gn.ensure_grad();
        if (bn.requires_grad) bn.ensure_grad();
        if (xn.requires_grad) xn.ensure_grad();
        for (int64_t r = 0; r < rows; ++r) {
          const S* g = o.grad.data() + r * c;
          const S* xh = xhat.data() + r * c;
          if (gn.requires_grad || bn.requires_grad) {
            for (int j = 0; j < c; ++j) {
              if (gn.requires_grad) gn.grad[size_t(j)] += g[j] * xh[j];
              if (bn.requires_grad) bn.grad[size_t(j)] += g[j];
            }
          }
          if (xn.requires_grad) {
            S m1 = S(0), m2 = S(0);
            for (int j = 0; j < c; ++j) {
              S dxh = g[j] * gn.value[size_t(j)];
              m1 += dxh;
              m2 += dxh * xh[j];
            }
            m1 /= S(c);
            m2 /= S(c);
            const S inv = inv_std[size_t(r)];
            for (int j = 0; j < c; ++j) {
              S dxh = g[j] * gn.value[size_t(j)];
              xn.grad[size_t(r * c + j)] += inv * (dxh - m1 - xh[j] * m2);
            }
          }
        }
      });
}

#define WGDF_INSTANTIATE_LINALG(S)                                           \
  template Tensor<S> matmul<S>(const Tensor<S>&, const Tensor<S>&);          \
  template Tensor<S> dense<S>(const Tensor<S>&, const Tensor<S>&,            \
                              const Tensor<S>&);                             \
  template Tensor<S> softmax<S>(const Tensor<S>&, int);                      \
  template Tensor<S> layer_norm<S>(const Tensor<S>&, const Tensor<S>&,       \
                                   const Tensor<S>&);

WGDF_INSTANTIATE_LINALG(float)
WGDF_INSTANTIATE_LINALG(double)

}  // namespace wgdf
