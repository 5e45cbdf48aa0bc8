#include <Eigen/Dense>
#include <cmath>

#include "op_common.hpp"
#include "wgdf/ops.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wgdf {

namespace {

template <class S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using MapRM = Eigen::Map<MatRM<S>>;
template <class S>
using CMapRM = Eigen::Map<const MatRM<S>>;

// Query rows are processed in blocks that keep the score slab cache-resident;
// each block still spans the full key dimension, so the row softmax is exact.
constexpr int kQueryBlock = 64;

template <class S>
S* tile_scratch(int slot, int64_t need) {
  thread_local std::vector<S> bufs[2];
  auto& b = bufs[slot];
  if (int64_t(b.size()) < need) b.resize(size_t(need));
  return b.data();
}

// Stable softmax over each row of a (rows x t) slab, vectorized exp.
template <class S>
void softmax_rows(MapRM<S>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r).array();
    const S mx = row.maxCoeff();
    row = (row - mx).exp();
    row *= S(1) / row.sum();
  }
}

}  // namespace

// Fused scaled-dot-product attention over (N, heads, T, d). The T x T score
// matrix is never materialized; backward recomputes the probabilities
// blockwise from q and k instead of retaining them.
template <class S>
Tensor<S> attention(const Tensor<S>& q, const Tensor<S>& k, const Tensor<S>& v) {
  require(q.rank() == 4, "attention: operands must be (N, heads, T, d)");
  require(shape_eq(q.shape(), k.shape()) && shape_eq(q.shape(), v.shape()),
          "attention: q/k/v shapes must match");
  const int n = q.dim(0), heads = q.dim(1), t = q.dim(2), dh = q.dim(3);
  const int64_t tiles = int64_t(n) * heads;
  const int64_t td = int64_t(t) * dh;
  const S inv_sqrt = S(1) / std::sqrt(S(dh));

  std::vector<S> out(size_t(q.numel()));
  {
    auto qv = q.data();
    auto kv = k.data();
    auto vv = v.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int64_t i = 0; i < tiles; ++i) {
      CMapRM<S> Q(qv.data() + i * td, t, dh);
      CMapRM<S> K(kv.data() + i * td, t, dh);
      CMapRM<S> V(vv.data() + i * td, t, dh);
      for (int r0 = 0; r0 < t; r0 += kQueryBlock) {
        const int rows = std::min(kQueryBlock, t - r0);
        MapRM<S> P(tile_scratch<S>(0, int64_t(rows) * t), rows, t);
        P.noalias() = (Q.middleRows(r0, rows) * K.transpose()) * inv_sqrt;
        softmax_rows(P);
        MapRM<S> O(out.data() + i * td + int64_t(r0) * dh, rows, dh);
        O.noalias() = P * V;
      }
    }
  }

  return detail::make_op<S>(
      "attention", q.shape(), std::move(out), {q, k, v},
      [tiles, t, dh, td, inv_sqrt](detail::Node<S>& o) {
        auto& qn = *o.parents[0];
        auto& kn = *o.parents[1];
        auto& vn = *o.parents[2];
        qn.ensure_grad();
        kn.ensure_grad();
        vn.ensure_grad();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int64_t i = 0; i < tiles; ++i) {
          CMapRM<S> Q(qn.value.data() + i * td, t, dh);
          CMapRM<S> K(kn.value.data() + i * td, t, dh);
          CMapRM<S> V(vn.value.data() + i * td, t, dh);
          CMapRM<S> G(o.grad.data() + i * td, t, dh);
          MapRM<S> dQ(qn.grad.data() + i * td, t, dh);
          MapRM<S> dK(kn.grad.data() + i * td, t, dh);
          MapRM<S> dV(vn.grad.data() + i * td, t, dh);
          for (int r0 = 0; r0 < t; r0 += kQueryBlock) {
            const int rows = std::min(kQueryBlock, t - r0);
            MapRM<S> P(tile_scratch<S>(0, int64_t(rows) * t), rows, t);
            P.noalias() = (Q.middleRows(r0, rows) * K.transpose()) * inv_sqrt;
            softmax_rows(P);
            MapRM<S> dP(tile_scratch<S>(1, int64_t(rows) * t), rows, t);
            dP.noalias() = G.middleRows(r0, rows) * V.transpose();
            dV.noalias() += P.transpose() * G.middleRows(r0, rows);
            // dS = P .* (dP - rowsum(dP .* P)), written back onto dP.
            const Eigen::Array<S, Eigen::Dynamic, 1> dots =
                (dP.array() * P.array()).rowwise().sum();
            dP.array() = P.array() * (dP.array().colwise() - dots);
            dQ.middleRows(r0, rows).noalias() += (dP * K) * inv_sqrt;
            dK.noalias() += (dP.transpose() * Q.middleRows(r0, rows)) * inv_sqrt;
          }
        }
      });
}

template Tensor<float> attention<float>(const Tensor<float>&,
                                        const Tensor<float>&,
                                        const Tensor<float>&);
template Tensor<double> attention<double>(const Tensor<double>&,
                                          const Tensor<double>&,
                                          const Tensor<double>&);

}  // namespace wgdf
