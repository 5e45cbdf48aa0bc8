#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "wgdf/errors.hpp"
#include "wgdf/tensor.hpp"

namespace wgdf::detail {

template <class S>
void check_finite(const std::vector<S>& v, const char* op) {
  for (const S& x : v) {
    if (!std::isfinite(double(x)))
      throw NumericError(std::string("non-finite value produced by op '") +
                         op + "'");
  }
}

// Allocates the output node for an op. Records parents and the backward rule
// only when grad mode is on and some parent needs gradients; the result is
// always checked for NaN/Inf before being returned.
template <class S>
Tensor<S> make_op(const char* op, Shape shape, std::vector<S> value,
                  std::vector<Tensor<S>> parents,
                  std::function<void(Node<S>&)> backward) {
  check_finite(value, op);
  auto n = std::make_shared<Node<S>>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->leaf = false;
  n->op = op;
  bool rg = false;
  for (const auto& p : parents) rg = rg || p.requires_grad();
  if (rg && grad_enabled()) {
    n->requires_grad = true;
    n->parents.reserve(parents.size());
    for (auto& p : parents) n->parents.push_back(p.node());
    n->backward = std::move(backward);
  }
  return Tensor<S>::wrap(std::move(n));
}

}  // namespace wgdf::detail
