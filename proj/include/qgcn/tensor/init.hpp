#pragma once

#include <random>

#include "qgcn/tensor/tensor.hpp"

namespace qgcn::tensor {

// I.i.d. N(0, stddev²) entries drawn from `rng`; stddev must be positive.
template <typename T>
Tensor<T> gaussian_init(Shape shape, double stddev, std::mt19937_64& rng, bool requires_grad = true);

// Refills an existing tensor in place with N(0, stddev²) draws.
template <typename T>
void gaussian_fill(Tensor<T>& t, double stddev, std::mt19937_64& rng);

}  // namespace qgcn::tensor
