#include "qgcn/train/train_config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace qgcn::train {

namespace fs = std::filesystem;

namespace {

void check_stage(const StageConfig& s, const char* name) {
  const std::string n(name);
  if (s.patch == 0 || s.patch % 8 != 0) throw std::invalid_argument(n + ".patch must be a positive multiple of 8");
  if (s.batch == 0) throw std::invalid_argument(n + ".batch must be positive");
  if (s.epochs < 0) throw std::invalid_argument(n + ".epochs must be non-negative");
}

StageConfig stage_from_json(const nlohmann::json& j, StageConfig s) {
  s.patch = j.value("patch", s.patch);
  s.batch = j.value("batch", s.batch);
  s.epochs = j.value("epochs", s.epochs);
  return s;
}

nlohmann::json stage_to_json(const StageConfig& s) {
  return {{"patch", s.patch}, {"batch", s.batch}, {"epochs", s.epochs}};
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

void TrainConfig::validate() const {
  if (qf_lo < 1 || qf_hi > 100 || qf_lo > qf_hi) throw std::invalid_argument("qf_range must satisfy 1 <= lo <= hi <= 100");
  check_stage(stage1, "stage1");
  check_stage(stage2, "stage2");
  if (stage1.patch > crop_size || stage2.patch > crop_size) throw std::invalid_argument("stage patch exceeds crop_size");
  if (steps_per_epoch <= 0) throw std::invalid_argument("steps_per_epoch must be positive");
  if (!(lr > 0)) throw std::invalid_argument("lr must be positive");
  if (!(lr_decay > 0) || lr_decay > 1) throw std::invalid_argument("lr_decay must be in (0,1]");
  if (lr_decay_every <= 0) throw std::invalid_argument("lr_decay_every must be positive");
  if (init != "gaussian" && init != "fan_in") throw std::invalid_argument("init must be \"gaussian\" or \"fan_in\"");
  if (!(init_std > 0)) throw std::invalid_argument("init_std must be positive");
  if (!(init_gain > 0)) throw std::invalid_argument("init_gain must be positive");
  if (crop_size == 0 || crop_stride == 0) throw std::invalid_argument("crop_size and crop_stride must be positive");
  if (val_fraction < 0 || val_fraction >= 1) throw std::invalid_argument("val_fraction must be in [0,1)");
  model.validate();
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json held = nlohmann::json::array();
  for (const auto& p : held_out) held.push_back(p.string());
  return {
      {"qf_range", {qf_lo, qf_hi}},
      {"stage1", stage_to_json(stage1)},
      {"stage2", stage_to_json(stage2)},
      {"steps_per_epoch", steps_per_epoch},
      {"lr", lr},
      {"lr_decay", lr_decay},
      {"lr_decay_every", lr_decay_every},
      {"seed", seed},
      {"init", init},
      {"init_std", init_std},
      {"init_gain", init_gain},
      {"crop_size", crop_size},
      {"crop_stride", crop_stride},
      {"subsampling", sim::to_string(subsampling)},
      {"val_fraction", val_fraction},
      {"val_batch", val_batch},
      {"model", model.to_json()},
      {"train_dir", train_dir.string()},
      {"held_out", held},
      {"output_dir", output_dir.string()},
  };
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
  TrainConfig c;
  try {
    if (j.contains("qf_range")) {
      const auto& r = j.at("qf_range");
      if (!r.is_array() || r.size() != 2) throw std::invalid_argument("qf_range must be [lo, hi]");
      c.qf_lo = r[0].get<int>();
      c.qf_hi = r[1].get<int>();
    }
    if (j.contains("stage1")) c.stage1 = stage_from_json(j.at("stage1"), c.stage1);
    if (j.contains("stage2")) c.stage2 = stage_from_json(j.at("stage2"), c.stage2);
    c.steps_per_epoch = j.value("steps_per_epoch", c.steps_per_epoch);
    c.lr = j.value("lr", c.lr);
    c.lr_decay = j.value("lr_decay", c.lr_decay);
    c.lr_decay_every = j.value("lr_decay_every", c.lr_decay_every);
    c.seed = j.value("seed", c.seed);
    c.init = j.value("init", c.init);
    c.init_std = j.value("init_std", c.init_std);
    c.init_gain = j.value("init_gain", c.init_gain);
    c.crop_size = j.value("crop_size", c.crop_size);
    c.crop_stride = j.value("crop_stride", c.crop_stride);
    if (j.contains("subsampling")) c.subsampling = sim::parse_subsampling(j.at("subsampling").get<std::string>());
    c.val_fraction = j.value("val_fraction", c.val_fraction);
    c.val_batch = j.value("val_batch", c.val_batch);
    if (j.contains("model")) {
      nlohmann::json m = j.at("model");
      const bool color = m.value("in_channels", 5) == 5;
      const std::string preset = m.value("preset", std::string("full"));
      model::ModelConfig base;
      if (preset == "toy") {
        base = model::ModelConfig::toy(color);
      } else if (preset == "full") {
        base = model::ModelConfig::full(color);
      } else {
        throw std::invalid_argument("unknown model preset '" + preset + "'");
      }
      nlohmann::json merged = base.to_json();
      m.erase("preset");
      merged.update(m);
      c.model = model::ModelConfig::from_json(merged);
    }
    if (j.contains("train_dir")) c.train_dir = resolve(base_dir, j.at("train_dir").get<std::string>());
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    if (j.contains("held_out")) {
      for (const auto& p : j.at("held_out")) c.held_out.push_back(resolve(base_dir, p.get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return TrainConfig::from_json(j, path.parent_path());
}

double lr_at_epoch(const TrainConfig& cfg, int epoch) {
  return cfg.lr * std::pow(cfg.lr_decay, epoch / cfg.lr_decay_every);
}

}  // namespace qgcn::train
