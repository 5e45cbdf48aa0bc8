#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wgdf/errors.hpp"

namespace wgdf {

using Shape = std::vector<int>;

int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);
bool shape_eq(const Shape& a, const Shape& b);

namespace detail {

// One value in the autodiff graph. Ops allocate a fresh node; leaves are
// created directly (parameters, inputs). `backward` reads this node's grad
// and accumulates into the parents' grads.
template <class S>
struct Node {
  Shape shape;
  std::vector<S> value;
  std::vector<S> grad;  // empty until first accumulation
  bool requires_grad = false;
  bool leaf = true;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), S(0));
  }
};

}  // namespace detail

// Thread-local switch: while disabled, ops produce plain values with no
// recorded parents (used for evaluation passes).
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

// Dense row-major N-d array; image-like data uses NCHW. Tensor is a cheap
// handle: copies alias the same storage. From a caller's perspective values
// are immutable once an op has consumed them; in-place mutation is reserved
// for parameter initialization and optimizer updates between steps.
template <class S>
class Tensor {
 public:
  using Scalar = S;

  Tensor() = default;

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor full(const Shape& shape, S v, bool requires_grad = false);
  static Tensor from_vector(const Shape& shape, std::vector<S> data,
                            bool requires_grad = false);
  static Tensor scalar(S v, bool requires_grad = false);

  bool defined() const { return n_ != nullptr; }
  const Shape& shape() const { return n_->shape; }
  int rank() const { return int(n_->shape.size()); }
  int dim(int i) const { return n_->shape[size_t(i)]; }
  int64_t numel() const { return int64_t(n_->value.size()); }

  std::span<const S> data() const { return {n_->value.data(), n_->value.size()}; }
  // Direct write access to the stored values. Only valid before the tensor
  // participates in a forward pass, or between steps on parameter leaves.
  std::span<S> mutable_data() { return {n_->value.data(), n_->value.size()}; }

  bool requires_grad() const { return n_->requires_grad; }
  bool has_grad() const { return !n_->grad.empty(); }
  std::span<const S> grad() const { return {n_->grad.data(), n_->grad.size()}; }
  void zero_grad() { n_->grad.clear(); }

  S item() const;
  // Element access by multi-index, for tests and small readers.
  S at(std::initializer_list<int> idx) const;

  // A leaf copy of the values, detached from the graph.
  Tensor detach() const;

  std::shared_ptr<detail::Node<S>> node() const { return n_; }
  static Tensor wrap(std::shared_ptr<detail::Node<S>> n) {
    Tensor t;
    t.n_ = std::move(n);
    return t;
  }

 private:
  std::shared_ptr<detail::Node<S>> n_;
};

// Ordered record of the ops reachable from a loss value; inputs always
// precede the ops that consume them. Single-owner: one backward() per tape.
template <class S>
class GradTape {
 public:
  explicit GradTape(const Tensor<S>& loss);

  // One reverse traversal; fills grads on every requires_grad leaf reachable
  // from the loss. Throws if invoked twice.
  void backward();

  size_t size() const { return order_.size(); }

 private:
  Tensor<S> root_;
  std::vector<detail::Node<S>*> order_;
  bool used_ = false;
};

// Convenience: record and traverse in one call.
template <class S>
void backward(const Tensor<S>& loss);

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class GradTape<float>;
extern template class GradTape<double>;

}  // namespace wgdf
