#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qgcn/model/config.hpp"
#include "qgcn/tensor/tensor.hpp"

namespace qgcn::model {

using tensor::Tensor;

template <typename T>
struct ConvParams {
  Tensor<T> weight;  // Cout×Cin×k×k
  Tensor<T> bias;    // Cout
  int stride = 1;
  int padding = 1;
};

template <typename T>
struct LinearParams {
  Tensor<T> weight;  // Out×In
  Tensor<T> bias;    // Out
};

template <typename T>
struct ResidualBlockParams {
  ConvParams<T> conv1;
  ConvParams<T> conv2;
};

template <typename T>
struct GlobalBranchParams {
  std::vector<ConvParams<T>> convs;  // one per kGlobalConvStack row
  LinearParams<T> fc1;
  LinearParams<T> fc2;
};

template <typename T>
Tensor<T> conv(const Tensor<T>& x, const ConvParams<T>& p);

// x + res_scale · conv2(relu(conv1(x))), no normalisation layer.
template <typename T>
Tensor<T> residual_block(const Tensor<T>& x, const ResidualBlockParams<T>& p, double res_scale);

// Chain of residual blocks wrapped by one identity skip.
template <typename T>
Tensor<T> residual_group(const Tensor<T>& x, std::span<const ResidualBlockParams<T>> blocks, double res_scale);

// N×C×S×S (S = global_input_size) -> N×global_vec_dim. ReLU after every conv
// and after fc1; fc2 is linear.
template <typename T>
Tensor<T> global_branch(const Tensor<T>& resized, const GlobalBranchParams<T>& p, int input_size);

// Tiles global_vec (N×G) over local's h×w grid and appends it after the local
// channels: N×(F+G)×h×w.
template <typename T>
Tensor<T> fuse_global(const Tensor<T>& local, const Tensor<T>& global_vec);

// Bilinear resampling with half-pixel centres. Result carries no gradient.
template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& x, std::size_t out_h, std::size_t out_w);

template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T> tensor;
};

// Restoration branch at half resolution conditioned on a quantization map,
// plus the optional whole-image global branch.
template <typename T>
class QgcnModel {
 public:
  // All parameters zero; call init_gaussian() for training.
  explicit QgcnModel(const ModelConfig& config);

  QgcnModel(QgcnModel&&) noexcept = default;
  QgcnModel& operator=(QgcnModel&&) noexcept = default;
  QgcnModel(const QgcnModel&) = delete;
  QgcnModel& operator=(const QgcnModel&) = delete;

  const ModelConfig& config() const { return config_; }

  // Weights ~ N(0, stddev²), biases zero.
  void init_gaussian(double stddev, std::mt19937_64& rng);
  // Weights ~ N(0, gain² / fan_in), biases zero.
  void init_fan_in(double gain, std::mt19937_64& rng);

  std::span<NamedParam<T>> parameters() { return params_; }
  std::span<const NamedParam<T>> parameters() const { return params_; }
  std::vector<Tensor<T>> parameter_tensors() const;
  std::size_t parameter_count() const;
  Tensor<T> parameter(const std::string& name) const;
  void zero_grad();

  // image N×C×H×W and qmap N×K×H×W, both in [0,1]; H and W even.
  // Returns N×C×H×W, unclamped; records the tape when grad is enabled.
  Tensor<T> forward(const Tensor<T>& image, const Tensor<T>& qmap) const;

  // forward() without recording, clamped to [0,1].
  Tensor<T> infer(const Tensor<T>& image, const Tensor<T>& qmap) const;

  // Global-branch feature vector of the concatenated input (exposed for tests).
  Tensor<T> global_features(const Tensor<T>& input) const;

  const GlobalBranchParams<T>& global_params() const { return global_; }
  std::span<const ResidualBlockParams<T>> group_blocks(int group) const {
    return group == 1 ? std::span<const ResidualBlockParams<T>>(group1_) : std::span<const ResidualBlockParams<T>>(group2_);
  }

  // Deep copy, optionally into another precision.
  template <typename U>
  QgcnModel<U> cast() const;
  QgcnModel clone() const { return cast<T>(); }

 private:
  ConvParams<T> make_conv(const std::string& name, int cin, int cout, int k, int stride, int padding);
  LinearParams<T> make_linear(const std::string& name, int in, int out);

  ModelConfig config_;
  std::vector<NamedParam<T>> params_;
  ConvParams<T> head_, down_, fusion_, up_, tail_;
  std::vector<ResidualBlockParams<T>> group1_, group2_;
  GlobalBranchParams<T> global_;
};

template <typename T>
template <typename U>
QgcnModel<U> QgcnModel<T>::cast() const {
  QgcnModel<U> out(config_);
  auto dst = out.parameters();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto src = params_[i].tensor.data();
    auto d = dst[i].tensor.mutable_data();
    for (std::size_t j = 0; j < src.size(); ++j) d[j] = static_cast<U>(src[j]);
  }
  return out;
}

extern template class QgcnModel<float>;
extern template class QgcnModel<double>;

}  // namespace qgcn::model
