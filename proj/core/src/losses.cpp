#include "wgdf/losses.hpp"

#include "wgdf/ops.hpp"

namespace wgdf {

namespace {
constexpr double kClampEps = 1e-7;
}

template <class S>
Tensor<S> bce_loss(const Tensor<S>& y, const Tensor<S>& y_hat) {
  require(shape_eq(y.shape(), y_hat.shape()),
          "bce_loss: shapes must match, " + shape_str(y.shape()) + " vs " +
              shape_str(y_hat.shape()));
  Tensor<S> p = clamp(y_hat, S(kClampEps), S(1.0 - kClampEps));
  Tensor<S> one_minus_p = add_scalar(scale(p, S(-1)), S(1));
  Tensor<S> one_minus_y = add_scalar(scale(y, S(-1)), S(1));
  Tensor<S> term =
      add(hadamard(y, log(p)), hadamard(one_minus_y, log(one_minus_p)));
  return scale(mean_all(term), S(-1));
}

template <class S>
Tensor<S> dice_loss(const Tensor<S>& y, const Tensor<S>& y_hat) {
  require(shape_eq(y.shape(), y_hat.shape()),
          "dice_loss: shapes must match, " + shape_str(y.shape()) + " vs " +
              shape_str(y_hat.shape()));
  Tensor<S> inter = sum_all(hadamard(y, y_hat));
  Tensor<S> num = add_scalar(scale(inter, S(2)), S(1));
  Tensor<S> den = add_scalar(add(sum_all(y), sum_all(y_hat)), S(1));
  return add_scalar(scale(divide(num, den), S(-1)), S(1));
}

template <class S>
Tensor<S> total_loss(const Tensor<S>& y, const Tensor<S>& y_hat,
                     const LossWeights& w) {
  require(w.lambda1 >= 0.0 && w.lambda2 >= 0.0,
          "total_loss: weights must be nonnegative");
  return add(scale(bce_loss(y, y_hat), S(w.lambda1)),
             scale(dice_loss(y, y_hat), S(w.lambda2)));
}

#define WGDF_INSTANTIATE_LOSSES(S)                                      \
  template Tensor<S> bce_loss<S>(const Tensor<S>&, const Tensor<S>&);   \
  template Tensor<S> dice_loss<S>(const Tensor<S>&, const Tensor<S>&);  \
  template Tensor<S> total_loss<S>(const Tensor<S>&, const Tensor<S>&,  \
                                   const LossWeights&);

WGDF_INSTANTIATE_LOSSES(float)
WGDF_INSTANTIATE_LOSSES(double)

}  // namespace wgdf
