#include "wgdf/tensor.hpp"

#include <sstream>
#include <unordered_set>

namespace wgdf {

int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ",";
    os << s[i];
  }
  os << ")";
  return os.str();
}

bool shape_eq(const Shape& a, const Shape& b) { return a == b; }

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

template <class S>
Tensor<S> Tensor<S>::zeros(const Shape& shape, bool requires_grad) {
  return from_vector(shape, std::vector<S>(size_t(shape_numel(shape)), S(0)),
                     requires_grad);
}

template <class S>
Tensor<S> Tensor<S>::full(const Shape& shape, S v, bool requires_grad) {
  return from_vector(shape, std::vector<S>(size_t(shape_numel(shape)), v),
                     requires_grad);
}

template <class S>
Tensor<S> Tensor<S>::from_vector(const Shape& shape, std::vector<S> data,
                                 bool requires_grad) {
  for (int d : shape)
    require(d > 0, "tensor dims must be positive, got " + shape_str(shape));
  require(int64_t(data.size()) == shape_numel(shape),
          "data length " + std::to_string(data.size()) +
              " does not match shape " + shape_str(shape));
  auto n = std::make_shared<detail::Node<S>>();
  n->shape = shape;
  n->value = std::move(data);
  n->requires_grad = requires_grad;
  n->leaf = true;
  return wrap(std::move(n));
}

template <class S>
Tensor<S> Tensor<S>::scalar(S v, bool requires_grad) {
  return from_vector({1}, {v}, requires_grad);
}

template <class S>
S Tensor<S>::item() const {
  require(numel() == 1, "item() requires a scalar tensor, shape is " +
                            shape_str(shape()));
  return n_->value[0];
}

template <class S>
S Tensor<S>::at(std::initializer_list<int> idx) const {
  require(int(idx.size()) == rank(), "index rank mismatch");
  int64_t flat = 0;
  int i = 0;
  for (int v : idx) {
    require(v >= 0 && v < dim(i), "index out of range");
    flat = flat * dim(i) + v;
    ++i;
  }
  return n_->value[size_t(flat)];
}

template <class S>
Tensor<S> Tensor<S>::detach() const {
  return from_vector(shape(), std::vector<S>(n_->value), false);
}

template <class S>
GradTape<S>::GradTape(const Tensor<S>& loss) : root_(loss) {
  require(loss.defined(), "backward: loss tensor is undefined");
  require(loss.numel() == 1,
          "backward: loss must be scalar, shape is " + shape_str(loss.shape()));
  // Iterative DFS postorder: every node appears after all of its parents.
  std::unordered_set<detail::Node<S>*> visited;
  struct Frame {
    detail::Node<S>* node;
    size_t next_parent;
  };
  std::vector<Frame> stack;
  auto* rootn = loss.node().get();
  if (visited.insert(rootn).second) stack.push_back({rootn, 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      auto* p = f.node->parents[f.next_parent++].get();
      if (visited.insert(p).second) stack.push_back({p, 0});
    } else {
      order_.push_back(f.node);
      stack.pop_back();
    }
  }
}

template <class S>
void GradTape<S>::backward() {
  require(!used_, "GradTape::backward called twice on the same tape");
  used_ = true;
  auto* rootn = root_.node().get();
  rootn->ensure_grad();
  rootn->grad[0] = S(1);
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    detail::Node<S>* n = *it;
    if (n->backward && n->requires_grad && !n->grad.empty()) n->backward(*n);
  }
}

template <class S>
void backward(const Tensor<S>& loss) {
  GradTape<S> tape(loss);
  tape.backward();
}

template class Tensor<float>;
template class Tensor<double>;
template class GradTape<float>;
template class GradTape<double>;
template void backward<float>(const Tensor<float>&);
template void backward<double>(const Tensor<double>&);

}  // namespace wgdf
