#pragma once

#include <functional>
#include <vector>

#include "wgdf/tensor.hpp"

namespace wgdf {

// Compares analytic gradients of a scalar-valued function against central
// finite differences. Returns the max over all input elements of
// |analytic - numeric| / max(1, |analytic|, |numeric|). Meaningful in 64-bit
// precision only.
double grad_check(
    const std::function<Tensor<double>(const std::vector<Tensor<double>>&)>& f,
    std::vector<Tensor<double>> inputs, double eps = 1e-6);

}  // namespace wgdf
