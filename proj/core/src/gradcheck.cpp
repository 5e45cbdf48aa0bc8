#include "wgdf/gradcheck.hpp"

#include <cmath>

namespace wgdf {

double grad_check(
    const std::function<Tensor<double>(const std::vector<Tensor<double>>&)>& f,
    std::vector<Tensor<double>> inputs, double eps) {
  // Fresh leaves so the analytic pass owns its own gradient buffers.
  std::vector<Tensor<double>> leaves;
  leaves.reserve(inputs.size());
  for (auto& in : inputs) {
    leaves.push_back(Tensor<double>::from_vector(
        in.shape(), std::vector<double>(in.data().begin(), in.data().end()),
        true));
  }
  Tensor<double> loss = f(leaves);
  require(loss.numel() == 1, "grad_check: f must return a scalar");
  backward(loss);

  // Finite differences need values only; skip graph recording.
  NoGradGuard no_grad;
  double worst = 0.0;
  for (size_t li = 0; li < leaves.size(); ++li) {
    auto node = leaves[li].node();
    std::vector<double> analytic(node->value.size(), 0.0);
    if (!node->grad.empty()) analytic = node->grad;
    for (size_t j = 0; j < node->value.size(); ++j) {
      const double saved = node->value[j];
      node->value[j] = saved + eps;
      double up = f(leaves).item();
      node->value[j] = saved - eps;
      double down = f(leaves).item();
      node->value[j] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double denom =
          std::max({1.0, std::fabs(analytic[j]), std::fabs(numeric)});
      worst = std::max(worst, std::fabs(analytic[j] - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace wgdf
