#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qgcn/tensor/tensor.hpp"

namespace qgcn::tensor {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment buffers are allocated on the first step to match the parameter list.
// The learning rate is whatever the caller last set; schedules live outside.
template <typename T>
struct AdamState {
  AdamOptions options;
  std::int64_t step = 0;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
};

// One bias-corrected Adam update of every parameter from its accumulated
// gradient. Parameters without a gradient buffer are treated as zero-gradient.
// Throws NonFiniteError if any gradient is NaN/Inf (parameters untouched).
template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state);

}  // namespace qgcn::tensor
