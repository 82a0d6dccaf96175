#include "qgcn/train/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>

#include "json.hpp"
#include "qgcn/model/model_io.hpp"
#include "qgcn/tensor/adam.hpp"
#include "qgcn/tensor/ops.hpp"
#include "qgcn/train/sampler.hpp"

namespace qgcn::train {

namespace fs = std::filesystem;
using model::QgcnModel;

namespace {

// Separate streams so that adding validation or changing the init does not
// shift the training batches.
constexpr std::uint64_t kInitStream = 0x1;
constexpr std::uint64_t kBatchStream = 0x2;
constexpr std::uint64_t kValStream = 0x3;

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

SamplerOptions sampler_for(const TrainConfig& cfg, const StageConfig& stage, std::size_t batch) {
  SamplerOptions o;
  o.patch_size = stage.patch;
  o.batch_size = batch;
  o.qf_lo = cfg.qf_lo;
  o.qf_hi = cfg.qf_hi;
  o.color = cfg.model.color();
  o.subsampling = cfg.subsampling;
  return o;
}

nlohmann::json tensor_stats(const std::string& name, const tensor::Tensor<float>& t) {
  double lo = INFINITY, hi = -INFINITY, sum_abs = 0;
  std::size_t bad = 0, bad_grad = 0;
  for (float v : t.data()) {
    if (!std::isfinite(v)) {
      ++bad;
      continue;
    }
    lo = std::min<double>(lo, v);
    hi = std::max<double>(hi, v);
    sum_abs += std::abs(v);
  }
  if (t.has_grad()) {
    for (float g : t.grad()) bad_grad += !std::isfinite(g);
  }
  return {{"name", name},        {"min", lo},           {"max", hi}, {"mean_abs", sum_abs / double(t.numel())},
          {"nonfinite", bad},    {"nonfinite_grad", bad_grad}};
}

[[noreturn]] void diverged(const TrainConfig& cfg, const QgcnModel<float>& model, const LossPoint& at,
                           const std::vector<int>& qfs, const std::string& what, std::ostream* log) {
  nlohmann::json dump = {{"error", what},   {"stage", at.stage}, {"epoch", at.epoch},
                         {"step", at.step}, {"lr", at.lr},       {"loss", at.loss},
                         {"batch_qfs", qfs}};
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : model.parameters()) params.push_back(tensor_stats(p.name, p.tensor));
  dump["parameters"] = params;
  std::string where = "log";
  if (!cfg.output_dir.empty()) {
    const auto path = cfg.output_dir / "divergence.json";
    std::ofstream(path) << dump.dump(2) << '\n';
    where = path.string();
  } else if (log) {
    *log << dump.dump() << '\n';
  }
  throw TrainingDiverged("training diverged at stage " + std::to_string(at.stage) + " step " +
                         std::to_string(at.step) + " (" + what + "); diagnostics in " + where);
}

double eval_loss(const QgcnModel<float>& model, const Batch& b) {
  tensor::NoGradGuard guard;
  return tensor::l1_loss(model.forward(b.degraded, b.qmap), b.clean).item();
}

}  // namespace

TrainResult train(const TrainConfig& cfg, QgcnModel<float>& model, const SampleStore& store, std::ostream* log) {
  cfg.validate();
  if (!(model.config() == cfg.model)) throw std::invalid_argument("train: model config differs from the training config");
  const SampleStore train_set = store.subset(false);
  const SampleStore val_set = store.subset(true);
  if (train_set.empty()) throw std::invalid_argument("train: no training samples");

  std::ofstream curve_csv, epoch_csv;
  if (!cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir / "checkpoints");
    curve_csv.open(cfg.output_dir / "loss_curve.csv", std::ios::trunc);
    epoch_csv.open(cfg.output_dir / "epochs.csv", std::ios::trunc);
    curve_csv << "stage,epoch,step,lr,loss\n";
    epoch_csv << "stage,epoch,lr,train_loss,val_loss\n";
  }

  TrainResult result;
  auto batch_rng = stream(cfg.seed, kBatchStream);
  auto params = model.parameter_tensors();
  std::size_t step = 0;

  const StageConfig* stages[2] = {&cfg.stage1, &cfg.stage2};
  for (int s = 0; s < 2; ++s) {
    const StageConfig& stage = *stages[s];
    if (stage.epochs == 0) continue;
    const SamplerOptions opts = sampler_for(cfg, stage, stage.batch);
    std::optional<Batch> val_batch;
    if (!val_set.empty() && cfg.val_batch > 0) {
      auto vr = stream(cfg.seed, kValStream + 16 * static_cast<std::uint64_t>(s));
      val_batch = sample_batch(val_set, sampler_for(cfg, stage, cfg.val_batch), vr);
    }
    tensor::AdamState<float> adam;

    for (int epoch = 0; epoch < stage.epochs; ++epoch) {
      adam.options.lr = lr_at_epoch(cfg, epoch);
      double sum = 0;
      for (int i = 0; i < cfg.steps_per_epoch; ++i) {
        ++step;
        LossPoint pt{s + 1, epoch + 1, step, adam.options.lr, NAN};
        Batch b = sample_batch(train_set, opts, batch_rng);
        try {
          model.zero_grad();
          auto loss = tensor::l1_loss(model.forward(b.degraded, b.qmap), b.clean);
          pt.loss = loss.item();
          loss.backward();
          tensor::adam_step(std::span<tensor::Tensor<float>>(params), adam);
        } catch (const tensor::NonFiniteError& e) {
          diverged(cfg, model, pt, b.qfs, e.what(), log);
        }
        sum += pt.loss;
        result.curve.push_back(pt);
        if (curve_csv.is_open()) {
          char line[128];
          std::snprintf(line, sizeof line, "%d,%d,%zu,%.9g,%.9g\n", pt.stage, pt.epoch, pt.step, pt.lr, pt.loss);
          curve_csv << line;
        }
      }

      EpochSummary es{s + 1, epoch + 1, adam.options.lr, sum / cfg.steps_per_epoch, std::nullopt, {}};
      if (val_batch) {
        es.val_loss = eval_loss(model, *val_batch);
        if (!std::isfinite(*es.val_loss)) {
          diverged(cfg, model, {s + 1, epoch + 1, step, adam.options.lr, *es.val_loss}, val_batch->qfs,
                   "non-finite validation loss", log);
        }
      }
      if (!cfg.output_dir.empty()) {
        char name[64];
        std::snprintf(name, sizeof name, "stage%d_epoch%03d.qgcn", s + 1, epoch + 1);
        es.checkpoint = cfg.output_dir / "checkpoints" / name;
        model::save_checkpoint(model, es.checkpoint);
        char line[160];
        std::snprintf(line, sizeof line, "%d,%d,%.9g,%.9g,", es.stage, es.epoch, es.lr, es.train_loss);
        epoch_csv << line;
        if (es.val_loss) {
          std::snprintf(line, sizeof line, "%.9g", *es.val_loss);
          epoch_csv << line;
        }
        epoch_csv << '\n' << std::flush;
        curve_csv << std::flush;
      }
      if (log) {
        *log << "stage " << es.stage << " epoch " << es.epoch << " lr " << es.lr << " loss " << es.train_loss;
        if (es.val_loss) *log << " val " << *es.val_loss;
        *log << std::endl;
      }
      result.epochs.push_back(es);
    }
  }
  return result;
}

std::vector<fs::path> held_out_files(const TrainConfig& cfg) {
  std::vector<fs::path> out;
  for (const auto& p : cfg.held_out) {
    if (fs::is_directory(p)) {
      for (auto& f : list_images(p)) out.push_back(f);
    } else {
      out.push_back(p);
    }
  }
  return out;
}

TrainResult run_training(const TrainConfig& cfg, std::ostream* log) {
  cfg.validate();
  if (cfg.train_dir.empty()) throw std::invalid_argument("train_dir is required");
  IngestOptions io;
  io.crop_size = cfg.crop_size;
  io.stride = cfg.crop_stride;
  io.val_fraction = cfg.val_fraction;
  io.seed = cfg.seed;
  const SampleStore store = ingest_dataset(cfg.train_dir, io, log);
  if (store.empty()) throw std::runtime_error("no usable training images in " + cfg.train_dir.string());
  assert_disjoint(store.records, held_out_files(cfg));

  if (!cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir);
    write_manifest(cfg.output_dir / "manifest.jsonl", store);
    std::ofstream(cfg.output_dir / "train_config.json") << cfg.to_json().dump(2) << '\n';
  }

  QgcnModel<float> model(cfg.model);
  auto init_rng = stream(cfg.seed, kInitStream);
  if (cfg.init == "fan_in") {
    model.init_fan_in(cfg.init_gain, init_rng);
  } else {
    model.init_gaussian(cfg.init_std, init_rng);
  }
  TrainResult result = train(cfg, model, store, log);
  if (!cfg.output_dir.empty()) model::save_checkpoint(model, cfg.output_dir / "model.qgcn");
  return result;
}

}  // namespace qgcn::train
