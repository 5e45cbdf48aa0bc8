#include "wgdf/optimizer.hpp"

#include <cmath>

namespace wgdf {

void AdamWConfig::validate() const {
  if (lr <= 0.0) throw ConfigError("opt.lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("opt.beta1/beta2 must be in [0,1)");
  if (weight_decay < 0.0) throw ConfigError("opt.weight_decay must be >= 0");
  if (eps <= 0.0) throw ConfigError("opt.eps must be positive");
  if (grad_clip < 0.0) throw ConfigError("opt.grad_clip must be >= 0");
}

template <class S>
OptState<S> OptState<S>::init(const AdamWConfig& cfg,
                              const WgdfParams<S>& params) {
  cfg.validate();
  OptState<S> st;
  st.cfg = cfg;
  st.m.reserve(params.named.size());
  st.v.reserve(params.named.size());
  for (const auto& [name, t] : params.named) {
    st.m.emplace_back(size_t(t.numel()), S(0));
    st.v.emplace_back(size_t(t.numel()), S(0));
  }
  return st;
}

template <class S>
void adamw_step(WgdfParams<S>& params, OptState<S>& st) {
  require(st.m.size() == params.named.size(),
          "adamw_step: state does not match the parameter set");
  for (auto& [name, t] : params.named) {
    if (!t.has_grad())
      throw TrainError("missing gradient for parameter " + name);
    for (S g : t.grad())
      if (!std::isfinite(double(g)))
        throw TrainError("non-finite gradient for parameter " + name);
  }

  double clip_scale = 1.0;
  if (st.cfg.grad_clip > 0.0) {
    double sq = 0.0;
    for (auto& [name, t] : params.named)
      for (S g : t.grad()) sq += double(g) * double(g);
    const double norm = std::sqrt(sq);
    if (norm > st.cfg.grad_clip) clip_scale = st.cfg.grad_clip / norm;
  }

  st.step_count += 1;
  const double b1 = st.cfg.beta1, b2 = st.cfg.beta2;
  const double bc1 = 1.0 - std::pow(b1, double(st.step_count));
  const double bc2 = 1.0 - std::pow(b2, double(st.step_count));
  const double lr = st.cfg.lr, wd = st.cfg.weight_decay, eps = st.cfg.eps;

  for (size_t pi = 0; pi < params.named.size(); ++pi) {
    auto& t = params.named[pi].second;
    auto grad = t.grad();
    auto val = t.mutable_data();
    auto& m = st.m[pi];
    auto& v = st.v[pi];
    for (size_t i = 0; i < m.size(); ++i) {
      const double g = double(grad[i]) * clip_scale;
      m[i] = S(b1 * double(m[i]) + (1.0 - b1) * g);
      v[i] = S(b2 * double(v[i]) + (1.0 - b2) * g * g);
      const double mhat = double(m[i]) / bc1;
      const double vhat = double(v[i]) / bc2;
      const double update =
          mhat / (std::sqrt(vhat) + eps) + wd * double(val[i]);
      val[i] = S(double(val[i]) - lr * update);
    }
  }
}

template struct OptState<float>;
template struct OptState<double>;
template void adamw_step<float>(WgdfParams<float>&, OptState<float>&);
template void adamw_step<double>(WgdfParams<double>&, OptState<double>&);

}  // namespace wgdf
