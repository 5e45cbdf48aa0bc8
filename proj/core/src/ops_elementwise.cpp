#include <cmath>

#include "op_common.hpp"
#include "wgdf/ops.hpp"

namespace wgdf {

namespace {

// Broadcast classification for binary ops. Pattern 0: identical shapes.
// Pattern 1: small operand (N,1,H,W) against (N,C,H,W) — spatial attention
// map applied across channels. Pattern 2: small operand (N,C,1,1) — channel
// attention map applied across space.
struct BinaryPlan {
  int pattern = 0;
  bool b_is_small = true;  // which operand broadcasts (pattern != 0)
  int n = 0, c = 0, h = 0, w = 0;
};

bool small_matches(const Shape& big, const Shape& small, int* pattern) {
  if (big.size() != 4 || small.size() != 4) return false;
  if (small[0] != big[0]) return false;
  if (small[1] == 1 && small[2] == big[2] && small[3] == big[3] && big[1] != 1) {
    *pattern = 1;
    return true;
  }
  if (small[1] == big[1] && small[2] == 1 && small[3] == 1 &&
      (big[2] != 1 || big[3] != 1)) {
    *pattern = 2;
    return true;
  }
  return false;
}

BinaryPlan plan_binary(const Shape& a, const Shape& b, const char* op) {
  BinaryPlan p;
  if (shape_eq(a, b)) return p;
  int pat = 0;
  if (small_matches(a, b, &pat)) {
    p.pattern = pat;
    p.b_is_small = true;
    p.n = a[0]; p.c = a[1]; p.h = a[2]; p.w = a[3];
    return p;
  }
  if (small_matches(b, a, &pat)) {
    p.pattern = pat;
    p.b_is_small = false;
    p.n = b[0]; p.c = b[1]; p.h = b[2]; p.w = b[3];
    return p;
  }
  throw ContractError(std::string(op) + ": incompatible shapes " +
                      shape_str(a) + " vs " + shape_str(b));
}

// Flat index into the small operand for a flat index of the big one.
template <int kPattern>
int64_t small_index(int64_t big, int c, int hw) {
  if constexpr (kPattern == 1) {
    // (N,1,H,W): drop the channel digit.
    int64_t chw = big % (int64_t(c) * hw);
    return (big / (int64_t(c) * hw)) * hw + chw % hw;
  } else {
    // (N,C,1,1): keep only (n, c).
    return big / hw;
  }
}

template <class S, class FwdFn>
std::vector<S> binary_forward(const Tensor<S>& a, const Tensor<S>& b,
                              const BinaryPlan& p, FwdFn f) {
  auto av = a.data();
  auto bv = b.data();
  const Tensor<S>& big = p.b_is_small ? a : b;
  std::vector<S> out(size_t(big.numel()));
  if (p.pattern == 0) {
    for (size_t i = 0; i < out.size(); ++i) out[i] = f(av[i], bv[i]);
    return out;
  }
  const int hw = p.h * p.w;
  auto small = p.b_is_small ? bv : av;
  auto bigv = p.b_is_small ? av : bv;
  for (int64_t i = 0; i < int64_t(out.size()); ++i) {
    int64_t si = p.pattern == 1 ? small_index<1>(i, p.c, hw)
                                : small_index<2>(i, p.c, hw);
    S x = p.b_is_small ? bigv[size_t(i)] : small[size_t(si)];
    S y = p.b_is_small ? small[size_t(si)] : bigv[size_t(i)];
    out[size_t(i)] = f(x, y);
  }
  return out;
}

// Accumulates `contrib(i)` into the grad of parent `pi`, reducing over the
// broadcast axes when that parent is the small operand.
template <class S, class Contrib>
void accumulate(detail::Node<S>& out, size_t pi, const BinaryPlan& p,
                bool parent_is_small, Contrib contrib) {
  auto& parent = *out.parents[pi];
  if (!parent.requires_grad) return;
  parent.ensure_grad();
  const int64_t n = int64_t(out.value.size());
  if (p.pattern == 0 || !parent_is_small) {
    for (int64_t i = 0; i < n; ++i) parent.grad[size_t(i)] += contrib(i);
    return;
  }
  const int hw = p.h * p.w;
  for (int64_t i = 0; i < n; ++i) {
    int64_t si = p.pattern == 1 ? small_index<1>(i, p.c, hw)
                                : small_index<2>(i, p.c, hw);
    parent.grad[size_t(si)] += contrib(i);
  }
}

}  // namespace

template <class S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  BinaryPlan p = plan_binary(a.shape(), b.shape(), "add");
  auto out = binary_forward(a, b, p, [](S x, S y) { return x + y; });
  Shape shape = (p.pattern == 0 || p.b_is_small) ? a.shape() : b.shape();
  return detail::make_op<S>(
      "add", shape, std::move(out), {a, b}, [p](detail::Node<S>& o) {
        accumulate<S>(o, 0, p, p.pattern != 0 && !p.b_is_small,
                      [&](int64_t i) { return o.grad[size_t(i)]; });
        accumulate<S>(o, 1, p, p.pattern != 0 && p.b_is_small,
                      [&](int64_t i) { return o.grad[size_t(i)]; });
      });
}

template <class S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  BinaryPlan p = plan_binary(a.shape(), b.shape(), "sub");
  auto out = binary_forward(a, b, p, [](S x, S y) { return x - y; });
  Shape shape = (p.pattern == 0 || p.b_is_small) ? a.shape() : b.shape();
  return detail::make_op<S>(
      "sub", shape, std::move(out), {a, b}, [p](detail::Node<S>& o) {
        accumulate<S>(o, 0, p, p.pattern != 0 && !p.b_is_small,
                      [&](int64_t i) { return o.grad[size_t(i)]; });
        accumulate<S>(o, 1, p, p.pattern != 0 && p.b_is_small,
                      [&](int64_t i) { return -o.grad[size_t(i)]; });
      });
}

template <class S>
Tensor<S> hadamard(const Tensor<S>& a, const Tensor<S>& b) {
  BinaryPlan p = plan_binary(a.shape(), b.shape(), "hadamard");
  auto out = binary_forward(a, b, p, [](S x, S y) { return x * y; });
  Shape shape = (p.pattern == 0 || p.b_is_small) ? a.shape() : b.shape();
  const int hw = p.h * p.w;
  return detail::make_op<S>(
      "hadamard", shape, std::move(out), {a, b}, [p, hw](detail::Node<S>& o) {
        auto& an = *o.parents[0];
        auto& bn = *o.parents[1];
        auto other_val = [&](const detail::Node<S>& other,
                             bool other_is_small, int64_t i) -> S {
          if (p.pattern == 0 || !other_is_small) return other.value[size_t(i)];
          int64_t si = p.pattern == 1 ? small_index<1>(i, p.c, hw)
                                      : small_index<2>(i, p.c, hw);
          return other.value[size_t(si)];
        };
        bool a_small = p.pattern != 0 && !p.b_is_small;
        bool b_small = p.pattern != 0 && p.b_is_small;
        accumulate<S>(o, 0, p, a_small, [&](int64_t i) {
          return o.grad[size_t(i)] * other_val(bn, b_small, i);
        });
        accumulate<S>(o, 1, p, b_small, [&](int64_t i) {
          return o.grad[size_t(i)] * other_val(an, a_small, i);
        });
      });
}

template <class S>
Tensor<S> divide(const Tensor<S>& a, const Tensor<S>& b) {
  require(shape_eq(a.shape(), b.shape()),
          "divide: shapes must match, " + shape_str(a.shape()) + " vs " +
              shape_str(b.shape()));
  auto av = a.data();
  auto bv = b.data();
  std::vector<S> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] / bv[i];
  return detail::make_op<S>(
      "divide", a.shape(), std::move(out), {a, b}, [](detail::Node<S>& o) {
        auto& an = *o.parents[0];
        auto& bn = *o.parents[1];
        if (an.requires_grad) {
          an.ensure_grad();
          for (size_t i = 0; i < o.grad.size(); ++i)
            an.grad[i] += o.grad[i] / bn.value[i];
        }
        if (bn.requires_grad) {
          bn.ensure_grad();
          for (size_t i = 0; i < o.grad.size(); ++i)
            bn.grad[i] -= o.grad[i] * an.value[i] / (bn.value[i] * bn.value[i]);
        }
      });
}

namespace {

template <class S, class F, class DF>
Tensor<S> unary(const char* name, const Tensor<S>& a, F f, DF df) {
  auto av = a.data();
  std::vector<S> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = f(av[i]);
  return detail::make_op<S>(
      name, a.shape(), std::move(out), {a}, [df](detail::Node<S>& o) {
        auto& p = *o.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < o.grad.size(); ++i)
          p.grad[i] += o.grad[i] * df(p.value[i], o.value[i]);
      });
}

}  // namespace

template <class S>
Tensor<S> abs(const Tensor<S>& a) {
  return unary<S>(
      "abs", a, [](S x) { return x < S(0) ? -x : x; },
      [](S x, S) { return x > S(0) ? S(1) : (x < S(0) ? S(-1) : S(0)); });
}

template <class S>
Tensor<S> sigmoid(const Tensor<S>& a) {
  return unary<S>(
      "sigmoid", a,
      [](S x) {
        // Split by sign for numerical stability.
        if (x >= S(0)) return S(1) / (S(1) + std::exp(-x));
        S e = std::exp(x);
        return e / (S(1) + e);
      },
      [](S, S y) { return y * (S(1) - y); });
}

template <class S>
Tensor<S> relu(const Tensor<S>& a) {
  return unary<S>(
      "relu", a, [](S x) { return x > S(0) ? x : S(0); },
      [](S x, S) { return x > S(0) ? S(1) : S(0); });
}

template <class S>
Tensor<S> log(const Tensor<S>& a) {
  for (S x : a.data())
    if (!(x > S(0)))
      throw NumericError("log: argument must be strictly positive");
  return unary<S>(
      "log", a, [](S x) { return std::log(x); },
      [](S x, S) { return S(1) / x; });
}

template <class S>
Tensor<S> clamp(const Tensor<S>& a, S lo, S hi) {
  require(lo < hi, "clamp: lo must be < hi");
  return unary<S>(
      "clamp", a,
      [lo, hi](S x) { return x < lo ? lo : (x > hi ? hi : x); },
      [lo, hi](S x, S) { return (x >= lo && x <= hi) ? S(1) : S(0); });
}

template <class S>
Tensor<S> scale(const Tensor<S>& a, S k) {
  return unary<S>(
      "scale", a, [k](S x) { return k * x; }, [k](S, S) { return k; });
}

template <class S>
Tensor<S> add_scalar(const Tensor<S>& a, S k) {
  return unary<S>(
      "add_scalar", a, [k](S x) { return x + k; }, [](S, S) { return S(1); });
}

template <class S>
Tensor<S> sum_all(const Tensor<S>& a) {
  S acc = S(0);
  for (S x : a.data()) acc += x;
  return detail::make_op<S>(
      "sum_all", {1}, {acc}, {a}, [](detail::Node<S>& o) {
        auto& p = *o.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += o.grad[0];
      });
}

template <class S>
Tensor<S> mean_all(const Tensor<S>& a) {
  S acc = S(0);
  for (S x : a.data()) acc += x;
  const S inv = S(1) / S(a.numel());
  return detail::make_op<S>(
      "mean_all", {1}, {acc * inv}, {a}, [inv](detail::Node<S>& o) {
        auto& p = *o.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += o.grad[0] * inv;
      });
}

#define WGDF_INSTANTIATE_ELEMENTWISE(S)                                   \
  template Tensor<S> add<S>(const Tensor<S>&, const Tensor<S>&);          \
  template Tensor<S> sub<S>(const Tensor<S>&, const Tensor<S>&);          \
  template Tensor<S> hadamard<S>(const Tensor<S>&, const Tensor<S>&);     \
  template Tensor<S> divide<S>(const Tensor<S>&, const Tensor<S>&);       \
  template Tensor<S> abs<S>(const Tensor<S>&);                            \
  template Tensor<S> sigmoid<S>(const Tensor<S>&);                        \
  template Tensor<S> relu<S>(const Tensor<S>&);                           \
  template Tensor<S> log<S>(const Tensor<S>&);                            \
  template Tensor<S> clamp<S>(const Tensor<S>&, S, S);                    \
  template Tensor<S> scale<S>(const Tensor<S>&, S);                       \
  template Tensor<S> add_scalar<S>(const Tensor<S>&, S);                  \
  template Tensor<S> sum_all<S>(const Tensor<S>&);                        \
  template Tensor<S> mean_all<S>(const Tensor<S>&);

WGDF_INSTANTIATE_ELEMENTWISE(float)
WGDF_INSTANTIATE_ELEMENTWISE(double)

}  // namespace wgdf
