#include <numeric>

#include "op_common.hpp"
#include "wgdf/ops.hpp"

namespace wgdf {

template <class S>
Tensor<S> reshape(const Tensor<S>& a, const Shape& shape) {
  require(shape_numel(shape) == a.numel(),
          "reshape: element count mismatch, " + shape_str(a.shape()) +
              " -> " + shape_str(shape));
  std::vector<S> out(a.data().begin(), a.data().end());
  return detail::make_op<S>(
      "reshape", shape, std::move(out), {a}, [](detail::Node<S>& o) {
        auto& p = *o.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < o.grad.size(); ++i) p.grad[i] += o.grad[i];
      });
}

namespace {

std::vector<int64_t> strides_of(const Shape& s) {
  std::vector<int64_t> st(s.size());
  int64_t acc = 1;
  for (int i = int(s.size()) - 1; i >= 0; --i) {
    st[size_t(i)] = acc;
    acc *= s[size_t(i)];
  }
  return st;
}

}  // namespace

template <class S>
Tensor<S> permute(const Tensor<S>& a, const std::vector<int>& axes) {
  const int r = a.rank();
  require(int(axes.size()) == r, "permute: axes rank mismatch");
  std::vector<bool> seen(size_t(r), false);
  for (int ax : axes) {
    require(ax >= 0 && ax < r && !seen[size_t(ax)],
            "permute: axes must be a permutation of 0.." + std::to_string(r - 1));
    seen[size_t(ax)] = true;
  }
  Shape out_shape(axes.size());
  for (int i = 0; i < r; ++i) out_shape[size_t(i)] = a.dim(axes[size_t(i)]);
  auto in_strides = strides_of(a.shape());
  // Stride of output axis i in the input's flat layout.
  std::vector<int64_t> gather(axes.size());
  for (int i = 0; i < r; ++i) gather[size_t(i)] = in_strides[size_t(axes[size_t(i)])];

  auto av = a.data();
  std::vector<S> out(av.size());
  std::vector<int> idx(size_t(r), 0);
  int64_t src = 0;
  for (size_t o = 0; o < out.size(); ++o) {
    out[o] = av[size_t(src)];
    for (int i = r - 1; i >= 0; --i) {
      idx[size_t(i)]++;
      src += gather[size_t(i)];
      if (idx[size_t(i)] < out_shape[size_t(i)]) break;
      src -= int64_t(out_shape[size_t(i)]) * gather[size_t(i)];
      idx[size_t(i)] = 0;
    }
  }
  return detail::make_op<S>(
      "permute", out_shape, std::move(out), {a},
      [out_shape, gather, r](detail::Node<S>& o) {
        auto& p = *o.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        std::vector<int> idx(size_t(r), 0);
        int64_t src = 0;
        for (size_t i = 0; i < o.grad.size(); ++i) {
          p.grad[size_t(src)] += o.grad[i];
          for (int k = r - 1; k >= 0; --k) {
            idx[size_t(k)]++;
            src += gather[size_t(k)];
            if (idx[size_t(k)] < out_shape[size_t(k)]) break;
            src -= int64_t(out_shape[size_t(k)]) * gather[size_t(k)];
            idx[size_t(k)] = 0;
          }
        }
      });
}

template <class S>
Tensor<S> concat(const std::vector<Tensor<S>>& parts, int axis) {
  require(!parts.empty(), "concat: needs at least one tensor");
  const int r = parts[0].rank();
  require(axis >= 0 && axis < r, "concat: axis out of range");
  int axis_total = 0;
  for (const auto& t : parts) {
    require(t.rank() == r, "concat: rank mismatch");
    for (int i = 0; i < r; ++i)
      require(i == axis || t.dim(i) == parts[0].dim(i),
              "concat: shapes must match outside the concat axis, " +
                  shape_str(t.shape()) + " vs " + shape_str(parts[0].shape()));
    axis_total += t.dim(axis);
  }
  Shape out_shape = parts[0].shape();
  out_shape[size_t(axis)] = axis_total;

  int64_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= out_shape[size_t(i)];
  for (int i = axis + 1; i < r; ++i) inner *= out_shape[size_t(i)];

  std::vector<S> out(size_t(shape_numel(out_shape)));
  std::vector<int> spans;
  spans.reserve(parts.size());
  for (const auto& t : parts) spans.push_back(t.dim(axis));

  int64_t offset = 0;
  for (size_t pi = 0; pi < parts.size(); ++pi) {
    auto v = parts[pi].data();
    const int64_t block = int64_t(spans[pi]) * inner;
    for (int64_t ou = 0; ou < outer; ++ou) {
      std::copy(v.begin() + ou * block, v.begin() + (ou + 1) * block,
                out.begin() + ou * (int64_t(axis_total) * inner) + offset);
    }
    offset += block;
  }

  return detail::make_op<S>(
      "concat", out_shape, std::move(out), parts,
      [outer, inner, axis_total, spans](detail::Node<S>& o) {
        int64_t offset = 0;
        for (size_t pi = 0; pi < o.parents.size(); ++pi) {
          auto& p = *o.parents[pi];
          const int64_t block = int64_t(spans[pi]) * inner;
          if (p.requires_grad) {
            p.ensure_grad();
            for (int64_t ou = 0; ou < outer; ++ou) {
              const S* src =
                  o.grad.data() + ou * (int64_t(axis_total) * inner) + offset;
              S* dst = p.grad.data() + ou * block;
              for (int64_t i = 0; i < block; ++i) dst[i] += src[i];
            }
          }
          offset += block;
        }
      });
}

#define WGDF_INSTANTIATE_STRUCTURE(S)                                     \
  template Tensor<S> reshape<S>(const Tensor<S>&, const Shape&);          \
  template Tensor<S> permute<S>(const Tensor<S>&, const std::vector<int>&); \
  template Tensor<S> concat<S>(const std::vector<Tensor<S>>&, int);

WGDF_INSTANTIATE_STRUCTURE(float)
WGDF_INSTANTIATE_STRUCTURE(double)

}  // namespace wgdf
