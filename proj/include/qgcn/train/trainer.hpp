#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qgcn/model/network.hpp"
#include "qgcn/train/dataset.hpp"
#include "qgcn/train/train_config.hpp"

namespace qgcn::train {

// Raised when a loss or gradient turns NaN/Inf; a diagnostic dump has been
// written by then (to the output directory, or the log stream).
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LossPoint {
  int stage = 1;
  int epoch = 0;
  std::size_t step = 0;  // global optimizer step, from 1
  double lr = 0;
  double loss = 0;
};

struct EpochSummary {
  int stage = 1;
  int epoch = 0;
  double lr = 0;
  double train_loss = 0;  // mean over the epoch's steps
  std::optional<double> val_loss;
  std::filesystem::path checkpoint;
};

struct TrainResult {
  std::vector<LossPoint> curve;
  std::vector<EpochSummary> epochs;
};

// Runs both stages on `store` (its validation records are held back for the
// per-epoch validation loss). When cfg.output_dir is set, writes the loss
// curve, epoch table and a checkpoint per epoch there.
TrainResult train(const TrainConfig& cfg, model::QgcnModel<float>& model, const SampleStore& store,
                  std::ostream* log = nullptr);

// Ingest + disjointness check + seeded init + train(); saves model.qgcn and
// manifest.jsonl into cfg.output_dir.
TrainResult run_training(const TrainConfig& cfg, std::ostream* log = nullptr);

// Files named by cfg.held_out, with directories expanded.
std::vector<std::filesystem::path> held_out_files(const TrainConfig& cfg);

}  // namespace qgcn::train
