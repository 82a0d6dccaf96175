#include "qgcn/model/model_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qgcn::model {

using tensor::CheckpointError;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::filesystem::path config_sidecar(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p += ".json";
  return p;
}

tensor::Checkpoint to_checkpoint(const QgcnModel<float>& model) {
  tensor::Checkpoint ckpt;
  ckpt.config_digest = model.config().digest();
  for (const auto& p : model.parameters()) {
    tensor::ParamRecord rec;
    rec.name = p.name;
    const auto& shape = p.tensor.shape();
    for (std::size_t i = 0; i < shape.size(); ++i) rec.shape[i] = static_cast<std::uint32_t>(shape[i]);
    const auto data = p.tensor.data();
    rec.values.assign(data.begin(), data.end());
    ckpt.records.push_back(std::move(rec));
  }
  return ckpt;
}

QgcnModel<float> from_checkpoint(const tensor::Checkpoint& ckpt, const ModelConfig& config) {
  if (ckpt.config_digest != config.digest()) {
    throw CheckpointError("config digest mismatch: checkpoint " + hex64(ckpt.config_digest) + ", expected " +
                          hex64(config.digest()));
  }
  QgcnModel<float> model(config);
  auto params = model.parameters();
  if (params.size() != ckpt.records.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(ckpt.records.size()) + " records, model expects " +
                          std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& rec = ckpt.records[i];
    auto& p = params[i];
    if (rec.name != p.name) throw CheckpointError("record " + std::to_string(i) + " is '" + rec.name + "', expected '" + p.name + "'");
    std::array<std::uint32_t, 4> want{1, 1, 1, 1};
    for (std::size_t d = 0; d < p.tensor.rank(); ++d) want[d] = static_cast<std::uint32_t>(p.tensor.dim(d));
    if (rec.shape != want) throw CheckpointError("shape mismatch for '" + rec.name + "'");
    auto dst = p.tensor.mutable_data();
    std::copy(rec.values.begin(), rec.values.end(), dst.begin());
  }
  return model;
}

void save_checkpoint(const QgcnModel<float>& model, const std::filesystem::path& path) {
  tensor::write_checkpoint(path, to_checkpoint(model));
  std::ofstream out(config_sidecar(path), std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write " + config_sidecar(path).string());
  out << model.config().to_json().dump(2) << '\n';
}

QgcnModel<float> load_checkpoint(const std::filesystem::path& path, const ModelConfig& config) {
  return from_checkpoint(tensor::read_checkpoint(path), config);
}

QgcnModel<float> load_checkpoint(const std::filesystem::path& path) {
  const auto sidecar = config_sidecar(path);
  std::ifstream in(sidecar);
  if (!in) throw CheckpointError("missing config sidecar " + sidecar.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("malformed config sidecar " + sidecar.string() + ": " + e.what());
  }
  return load_checkpoint(path, ModelConfig::from_json(j));
}

}  // namespace qgcn::model
