#pragma once

#include <cstddef>
#include <cstdint>

#include "json.hpp"

namespace qgcn::model {

// One row of the global-branch convolution stack.
struct GlobalConvSpec {
  const char* name;
  int out_channels;
  int kernel;
  int stride;
  int padding;
};

// conv1-1 … conv4-2: channels 32..256, 4×4/stride-2 then 3×3/stride-1 per stage.
inline constexpr GlobalConvSpec kGlobalConvStack[] = {
    {"conv1_1", 32, 4, 2, 1},  {"conv1_2", 32, 3, 1, 1},  {"conv2_1", 64, 4, 2, 1},  {"conv2_2", 64, 3, 1, 1},
    {"conv3_1", 128, 4, 2, 1}, {"conv3_2", 128, 3, 1, 1}, {"conv4_1", 256, 4, 2, 1}, {"conv4_2", 256, 3, 1, 1},
};
inline constexpr int kGlobalFc1Width = 1024;

struct ModelConfig {
  int in_channels = 5;  // image + quantization map: 5 (color) or 2 (gray)
  int feat_channels = 64;
  int n_res_per_group = 32;
  double res_scale = 0.1;
  int global_vec_dim = 64;
  int global_input_size = 112;
  bool enable_global_branch = true;
  bool global_residual_skip = true;

  int image_channels() const { return in_channels == 5 ? 3 : 1; }
  int qmap_channels() const { return in_channels == 5 ? 2 : 1; }
  bool color() const { return in_channels == 5; }
  // Side length after the four stride-2 stages (7 for a 112 input).
  int global_output_size() const { return global_input_size / 16; }

  // Throws std::invalid_argument on any violated field constraint.
  void validate() const;

  // Architecture of the full-size network (64 channels, 32 blocks per group).
  static ModelConfig full(bool color = true);
  // Desk-scale preset: 16 channels, 2 blocks per group.
  static ModelConfig toy(bool color = true);

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);

  // FNV-1a 64 over the canonical JSON text.
  std::uint64_t digest() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Closed-form parameter counts.
std::size_t restoration_parameter_count(const ModelConfig& cfg);
std::size_t global_branch_parameter_count(const ModelConfig& cfg);
std::size_t fusion_parameter_count(const ModelConfig& cfg);
std::size_t expected_parameter_count(const ModelConfig& cfg);

}  // namespace qgcn::model
