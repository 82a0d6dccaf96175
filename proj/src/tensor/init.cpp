#include "qgcn/tensor/init.hpp"

#include <stdexcept>

namespace qgcn::tensor {

template <typename T>
void gaussian_fill(Tensor<T>& t, double stddev, std::mt19937_64& rng) {
  if (!(stddev > 0.0)) throw std::invalid_argument("gaussian_init: stddev must be positive");
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.mutable_data()) v = static_cast<T>(dist(rng));
}

template <typename T>
Tensor<T> gaussian_init(Shape shape, double stddev, std::mt19937_64& rng, bool requires_grad) {
  auto t = Tensor<T>::zeros(std::move(shape), requires_grad);
  gaussian_fill(t, stddev, rng);
  return t;
}

template Tensor<float> gaussian_init<float>(Shape, double, std::mt19937_64&, bool);
template Tensor<double> gaussian_init<double>(Shape, double, std::mt19937_64&, bool);
template void gaussian_fill<float>(Tensor<float>&, double, std::mt19937_64&);
template void gaussian_fill<double>(Tensor<double>&, double, std::mt19937_64&);

}  // namespace qgcn::tensor
