#include "op_common.hpp"
#include "wgdf/ops.hpp"

namespace wgdf {

template <class S>
Tensor<S> pool(const Tensor<S>& x, PoolMode mode) {
  require(x.rank() == 4, "pool: input must be NCHW");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int64_t hw = int64_t(h) * w;
  auto xv = x.data();

  switch (mode) {
    case PoolMode::kChannelMax: {
      std::vector<S> out(size_t(n) * hw);
      std::vector<int> arg(out.size());
      for (int i = 0; i < n; ++i) {
        for (int64_t p = 0; p < hw; ++p) {
          S best = xv[size_t((int64_t(i) * c) * hw + p)];
          int bc = 0;
          for (int ch = 1; ch < c; ++ch) {
            S v = xv[size_t((int64_t(i) * c + ch) * hw + p)];
            if (v > best) {
              best = v;
              bc = ch;
            }
          }
          out[size_t(i * hw + p)] = best;
          arg[size_t(i * hw + p)] = bc;
        }
      }
      return detail::make_op<S>(
          "channel_max", {n, 1, h, w}, std::move(out), {x},
          [n, c, hw, arg = std::move(arg)](detail::Node<S>& o) {
            auto& p = *o.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            for (int i = 0; i < n; ++i)
              for (int64_t q = 0; q < hw; ++q)
                p.grad[size_t((int64_t(i) * c + arg[size_t(i * hw + q)]) * hw +
                              q)] += o.grad[size_t(i * hw + q)];
          });
    }
    case PoolMode::kChannelAvg: {
      std::vector<S> out(size_t(n) * hw, S(0));
      for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < c; ++ch)
          for (int64_t p = 0; p < hw; ++p)
            out[size_t(i * hw + p)] += xv[size_t((int64_t(i) * c + ch) * hw + p)];
      const S inv = S(1) / S(c);
      for (S& v : out) v *= inv;
      return detail::make_op<S>(
          "channel_avg", {n, 1, h, w}, std::move(out), {x},
          [n, c, hw, inv](detail::Node<S>& o) {
            auto& p = *o.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            for (int i = 0; i < n; ++i)
              for (int ch = 0; ch < c; ++ch)
                for (int64_t q = 0; q < hw; ++q)
                  p.grad[size_t((int64_t(i) * c + ch) * hw + q)] +=
                      o.grad[size_t(i * hw + q)] * inv;
          });
    }
    case PoolMode::kGlobalAvg: {
      std::vector<S> out(size_t(n) * c, S(0));
      for (int64_t i = 0; i < int64_t(n) * c; ++i) {
        S acc = S(0);
        for (int64_t p = 0; p < hw; ++p) acc += xv[size_t(i * hw + p)];
        out[size_t(i)] = acc / S(hw);
      }
      return detail::make_op<S>(
          "global_avg", {n, c, 1, 1}, std::move(out), {x},
          [n, c, hw](detail::Node<S>& o) {
            auto& p = *o.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            const S inv = S(1) / S(hw);
            for (int64_t i = 0; i < int64_t(n) * c; ++i)
              for (int64_t q = 0; q < hw; ++q)
                p.grad[size_t(i * hw + q)] += o.grad[size_t(i)] * inv;
          });
    }
    case PoolMode::kGlobalMax: {
      std::vector<S> out(size_t(n) * c);
      std::vector<int64_t> arg(out.size());
      for (int64_t i = 0; i < int64_t(n) * c; ++i) {
        S best = xv[size_t(i * hw)];
        int64_t bp = 0;
        for (int64_t p = 1; p < hw; ++p) {
          S v = xv[size_t(i * hw + p)];
          if (v > best) {
            best = v;
            bp = p;
          }
        }
        out[size_t(i)] = best;
        arg[size_t(i)] = bp;
      }
      return detail::make_op<S>(
          "global_max", {n, c, 1, 1}, std::move(out), {x},
          [n, c, hw, arg = std::move(arg)](detail::Node<S>& o) {
            auto& p = *o.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            for (int64_t i = 0; i < int64_t(n) * c; ++i)
              p.grad[size_t(i * hw + arg[size_t(i)])] += o.grad[size_t(i)];
          });
    }
  }
  throw ContractError("pool: unknown mode");
}

template Tensor<float> pool<float>(const Tensor<float>&, PoolMode);
template Tensor<double> pool<double>(const Tensor<double>&, PoolMode);

}  // namespace wgdf
