#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgcn::tensor {

// Extents in N,C,H,W order for image data. At most four entries.
using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;
  bool requires_grad = false;
  // Non-empty only for nodes produced by a differentiable op while recording.
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
  const char* op = "leaf";

  std::vector<T>& ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
    return grad;
  }
};

// Shared handle to a node of the reverse-mode tape. Copies alias the same
// storage; values are only mutated through mutable_data() by optimizers,
// initializers and checkpoint loading.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  Tensor(Shape shape, std::vector<T> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->data.size(); }

  std::span<const T> data() const { return node_->data; }
  std::span<T> mutable_data() { return node_->data; }
  T item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return node_->grad.size() == node_->data.size(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->ensure_grad(); }
  void zero_grad();

  // Seeds d(self)/d(self) = 1 for a single-element tensor, propagates to
  // every reachable leaf, then releases the recorded graph.
  void backward();

  // Same data, no history, no gradient requirement.
  Tensor detach() const;
  Tensor clone() const;
  Tensor reshape(Shape shape) const;

  const std::shared_ptr<Node<T>>& node() const { return node_; }
  static Tensor from_node(std::shared_ptr<Node<T>> node);

 private:
  std::shared_ptr<Node<T>> node_;
};

// Recording is on by default; a NoGradGuard turns it off for the current
// thread until it goes out of scope (inference paths).
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Throws NonFiniteError naming `where` if any value is NaN/Inf.
template <typename T>
void check_finite(std::span<const T> values, const char* where);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace qgcn::tensor
