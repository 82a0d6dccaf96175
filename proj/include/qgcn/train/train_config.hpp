#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "qgcn/model/config.hpp"
#include "qgcn/sim/compress.hpp"

namespace qgcn::train {

struct StageConfig {
  std::size_t patch = 64;
  std::size_t batch = 256;
  int epochs = 1;
};

struct TrainConfig {
  int qf_lo = 1;
  int qf_hi = 60;
  StageConfig stage1{64, 256, 1};
  StageConfig stage2{256, 32, 1};
  int steps_per_epoch = 100;
  double lr = 1e-4;
  double lr_decay = 0.1;
  int lr_decay_every = 20;  // epochs; the schedule restarts with each stage
  std::uint64_t seed = 0;
  // "gaussian": N(0, init_std²) weights. "fan_in": N(0, init_gain² / fan_in),
  // which the narrow toy presets need to train at all.
  std::string init = "gaussian";
  double init_std = 0.01;
  double init_gain = 0.3;
  std::size_t crop_size = 256;
  std::size_t crop_stride = 128;
  sim::Subsampling subsampling = sim::Subsampling::k420;
  double val_fraction = 0.02;
  std::size_t val_batch = 8;
  model::ModelConfig model;

  // Paths; relative ones are resolved against the config file's directory.
  std::filesystem::path train_dir;
  std::vector<std::filesystem::path> held_out;  // files or directories never trained on
  std::filesystem::path output_dir;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  nlohmann::json to_json() const;
  // "model" may carry "preset": "toy" | "full" plus field overrides.
  static TrainConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
};

TrainConfig load_train_config(const std::filesystem::path& path);

// start · decay^floor(epoch / every), epoch counted from 0 within a stage.
double lr_at_epoch(const TrainConfig& cfg, int epoch);

}  // namespace qgcn::train
