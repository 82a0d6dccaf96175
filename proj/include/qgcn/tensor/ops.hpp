#pragma once

#include <cstddef>

#include "qgcn/tensor/tensor.hpp"

// Differentiable operations. Each op records itself on the tape only when at
// least one input requires grad, and throws ShapeError on contract violations.
namespace qgcn::tensor {

// input N×Cin×H×W, weight Cout×Cin×k×k, bias Cout (or undefined for none).
// Output N×Cout×H'×W' with H' = (H + 2·padding − k) / stride + 1, zero padding.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, int stride,
                 int padding);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& x, double factor);

// Depth-to-space: N×(C·r²)×H×W -> N×C×(rH)×(rW).
template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& x, int r);

// Space-to-depth, the exact inverse of pixel_shuffle.
template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& x, int r);

// input N×D (any trailing extents are flattened), weight Out×D, bias Out.
template <typename T>
Tensor<T> linear(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias);

// Mean absolute error over all elements; the subgradient at a tie is 0.
template <typename T>
Tensor<T> l1_loss(const Tensor<T>& pred, const Tensor<T>& target);

// Concatenate two N×C×H×W tensors along the channel axis.
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

// N×C vector -> N×C×h×w by repeating it at every spatial site.
template <typename T>
Tensor<T> tile_spatial(const Tensor<T>& v, std::size_t h, std::size_t w);

}  // namespace qgcn::tensor
