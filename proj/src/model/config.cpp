#include "qgcn/model/config.hpp"

#include <stdexcept>
#include <string>

namespace qgcn::model {
namespace {

std::size_t conv_params(std::size_t cin, std::size_t cout, std::size_t k) { return cin * cout * k * k + cout; }

}  // namespace

void ModelConfig::validate() const {
  if (in_channels != 2 && in_channels != 5) throw std::invalid_argument("in_channels must be 2 (gray) or 5 (color)");
  if (feat_channels <= 0) throw std::invalid_argument("feat_channels must be positive");
  if (n_res_per_group < 1) throw std::invalid_argument("n_res_per_group must be at least 1");
  if (global_vec_dim <= 0) throw std::invalid_argument("global_vec_dim must be positive");
  if (global_input_size < 16 || global_input_size % 16 != 0) {
    throw std::invalid_argument("global_input_size must be a positive multiple of 16");
  }
}

ModelConfig ModelConfig::full(bool color) {
  ModelConfig c;
  c.in_channels = color ? 5 : 2;
  return c;
}

ModelConfig ModelConfig::toy(bool color) {
  ModelConfig c = full(color);
  c.feat_channels = 16;
  c.n_res_per_group = 2;
  return c;
}

nlohmann::json ModelConfig::to_json() const {
  return {
      {"in_channels", in_channels},
      {"feat_channels", feat_channels},
      {"n_res_per_group", n_res_per_group},
      {"res_scale", res_scale},
      {"global_vec_dim", global_vec_dim},
      {"global_input_size", global_input_size},
      {"enable_global_branch", enable_global_branch},
      {"global_residual_skip", global_residual_skip},
  };
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.in_channels = j.value("in_channels", c.in_channels);
  c.feat_channels = j.value("feat_channels", c.feat_channels);
  c.n_res_per_group = j.value("n_res_per_group", c.n_res_per_group);
  c.res_scale = j.value("res_scale", c.res_scale);
  c.global_vec_dim = j.value("global_vec_dim", c.global_vec_dim);
  c.global_input_size = j.value("global_input_size", c.global_input_size);
  c.enable_global_branch = j.value("enable_global_branch", c.enable_global_branch);
  c.global_residual_skip = j.value("global_residual_skip", c.global_residual_skip);
  c.validate();
  return c;
}

std::uint64_t ModelConfig::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json().dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t restoration_parameter_count(const ModelConfig& cfg) {
  const std::size_t f = static_cast<std::size_t>(cfg.feat_channels);
  std::size_t n = conv_params(static_cast<std::size_t>(cfg.in_channels), f, 3);  // head
  n += conv_params(f, f, 3);                                                     // downsample
  n += 2 * static_cast<std::size_t>(cfg.n_res_per_group) * 2 * conv_params(f, f, 3);
  n += conv_params(f, 4 * f, 3);                                                  // upsample
  n += conv_params(f, static_cast<std::size_t>(cfg.image_channels()), 3);         // tail
  return n;
}

std::size_t global_branch_parameter_count(const ModelConfig& cfg) {
  std::size_t n = 0;
  std::size_t cin = static_cast<std::size_t>(cfg.in_channels);
  for (const auto& s : kGlobalConvStack) {
    n += conv_params(cin, static_cast<std::size_t>(s.out_channels), static_cast<std::size_t>(s.kernel));
    cin = static_cast<std::size_t>(s.out_channels);
  }
  const std::size_t side = static_cast<std::size_t>(cfg.global_output_size());
  n += cin * side * side * kGlobalFc1Width + kGlobalFc1Width;
  n += static_cast<std::size_t>(kGlobalFc1Width) * cfg.global_vec_dim + cfg.global_vec_dim;
  return n;
}

std::size_t fusion_parameter_count(const ModelConfig& cfg) {
  const std::size_t f = static_cast<std::size_t>(cfg.feat_channels);
  return conv_params(f + static_cast<std::size_t>(cfg.global_vec_dim), f, 3);
}

std::size_t expected_parameter_count(const ModelConfig& cfg) {
  std::size_t n = restoration_parameter_count(cfg);
  if (cfg.enable_global_branch) n += global_branch_parameter_count(cfg) + fusion_parameter_count(cfg);
  return n;
}

}  // namespace qgcn::model
