#include "qgcn/tensor/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace qgcn::tensor {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {
thread_local bool t_grad_enabled = true;
}

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

template <typename T>
void check_finite(std::span<const T> values, const char* where) {
  for (const T v : values) {
    if (!std::isfinite(v)) throw NonFiniteError(std::string("non-finite value produced by ") + where);
  }
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data, bool requires_grad) {
  if (shape.size() > 4) throw ShapeError("tensor rank above 4: " + to_string(shape));
  if (qgcn::tensor::numel(shape) != data.size()) {
    throw ShapeError("shape " + to_string(shape) + " does not match data length " +
                     std::to_string(data.size()));
  }
  node_ = std::make_shared<Node<T>>();
  node_->shape = std::move(shape);
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  const std::size_t n = qgcn::tensor::numel(shape);
  return Tensor(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::from_node(std::shared_ptr<Node<T>> node) {
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape()));
  return node_->data[0];
}

template <typename T>
void Tensor<T>::zero_grad() {
  if (has_grad()) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
}

template <typename T>
void Tensor<T>::backward() {
  if (numel() != 1) throw ShapeError("backward() needs a single-element tensor, got " + to_string(shape()));
  if (!node_->requires_grad) throw std::logic_error("backward() on a tensor that does not require grad");

  // Iterative post-order DFS; `order` ends up with parents before children.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node<T>* p = n->parents[next++].get();
      if (p && p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->ensure_grad()[0] = T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward_fn && n->grad.size() == n->data.size()) n->backward_fn(*n);
  }
  for (Node<T>* n : order) {
    if (n->parents.empty()) {
      check_finite<T>(n->grad, "backward");
      continue;
    }
    n->parents.clear();
    n->backward_fn = nullptr;
    if (n != node_.get()) {
      n->grad.clear();
      n->grad.shrink_to_fit();
    }
  }
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(node_->shape, node_->data, false);
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  return Tensor(node_->shape, node_->data, node_->requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::reshape(Shape shape) const {
  if (qgcn::tensor::numel(shape) != numel()) {
    throw ShapeError("cannot reshape " + to_string(this->shape()) + " to " + to_string(shape));
  }
  Tensor out(std::move(shape), node_->data, false);
  if (node_->requires_grad && grad_enabled()) {
    auto& on = *out.node_;
    on.requires_grad = true;
    on.op = "reshape";
    on.parents = {node_};
    on.backward_fn = [](Node<T>& self) {
      auto& g = self.parents[0]->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    };
  }
  return out;
}

template void check_finite<float>(std::span<const float>, const char*);
template void check_finite<double>(std::span<const double>, const char*);
template class Tensor<float>;
template class Tensor<double>;

}  // namespace qgcn::tensor
