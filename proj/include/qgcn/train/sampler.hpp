#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "qgcn/image.hpp"
#include "qgcn/jpeg/quant_map.hpp"
#include "qgcn/sim/compress.hpp"
#include "qgcn/tensor/tensor.hpp"
#include "qgcn/train/dataset.hpp"

namespace qgcn::train {

using tensor::Tensor;

struct SamplerOptions {
  std::size_t patch_size = 64;
  std::size_t batch_size = 16;
  int qf_lo = 1;
  int qf_hi = 60;
  bool color = true;  // gray mode converts crops to luma first
  sim::Subsampling subsampling = sim::Subsampling::k420;
};

struct Batch {
  Tensor<float> clean;     // N×C×P×P in [0,1]
  Tensor<float> degraded;  // N×C×P×P in [0,1]
  Tensor<float> qmap;      // N×K×P×P, step sizes / 255
  std::vector<int> qfs;
};

// Stacks same-sized images into N×C×H×W, values / 255.
Tensor<float> images_to_tensor(const std::vector<Image8>& images);
Image8 tensor_to_image(const Tensor<float>& t, std::size_t index, ColorSpace cs);
// 1×K×H×W normalized planes.
Tensor<float> qmap_to_tensor(const jpeg::QuantMap& qm);

// Draws `batch_size` triplets: a uniform crop from `store`, a uniform patch
// position inside it and a uniform integer qf in [qf_lo, qf_hi]; the patch is
// degraded by the simulator and paired with its quantization map.
Batch sample_batch(const SampleStore& store, const SamplerOptions& opts, std::mt19937_64& rng);

}  // namespace qgcn::train
