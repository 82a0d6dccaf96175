#pragma once

#include <filesystem>

#include "qgcn/model/network.hpp"
#include "qgcn/tensor/checkpoint.hpp"

namespace qgcn::model {

tensor::Checkpoint to_checkpoint(const QgcnModel<float>& model);

// Copies records into a model built from `config`. Throws CheckpointError when
// the digest, a record name, or a shape disagrees with the configuration.
QgcnModel<float> from_checkpoint(const tensor::Checkpoint& ckpt, const ModelConfig& config);

// Writes `path` plus the JSON config sidecar `path` + ".json".
void save_checkpoint(const QgcnModel<float>& model, const std::filesystem::path& path);

// Loads against an expected configuration.
QgcnModel<float> load_checkpoint(const std::filesystem::path& path, const ModelConfig& config);

// Loads using the config sidecar next to `path`.
QgcnModel<float> load_checkpoint(const std::filesystem::path& path);

std::filesystem::path config_sidecar(const std::filesystem::path& checkpoint);

}  // namespace qgcn::model
