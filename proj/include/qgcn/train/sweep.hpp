#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qgcn/image.hpp"
#include "qgcn/jpeg/quant_table.hpp"
#include "qgcn/metrics/metrics.hpp"
#include "qgcn/model/network.hpp"
#include "qgcn/sim/compress.hpp"

namespace qgcn::train {

struct TestImage {
  std::string name;
  Image8 image;
};

struct SweepRow {
  std::string name;
  int qf = 0;
  metrics::QualityReport report;
};

struct SweepMean {
  double psnr = 0;
  double ssim = 0;
  double psnr_b = 0;
  double ipsnr = 0;
  std::size_t count = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;       // qf-major, test-set order within a qf
  std::map<int, SweepMean> means;   // per qf; +∞ PSNRs enter as the sentinel
};

// Restores a degraded image given the tables it was quantized with. The
// image is edge-padded to a multiple of 8, run through the model (clamped)
// and cropped back. Color models need both tables; gray models use luma only.
Image8 restore_image(const model::QgcnModel<float>& model, const Image8& degraded, const jpeg::QuantTable& luma,
                     const jpeg::QuantTable& chroma);

std::vector<TestImage> load_testset(const std::filesystem::path& dir_or_file);

// Area-downscales every image by `factor` per side (1 leaves the set as is).
std::vector<TestImage> rescale_testset(const std::vector<TestImage>& set, std::size_t factor);

struct SweepOptions {
  sim::Subsampling subsampling = sim::Subsampling::k420;
  metrics::Channels channels = metrics::Channels::All;
};

// For every qf and every test image: simulate, restore, score (with IPSNR).
SweepResult sweep_eval(const model::QgcnModel<float>& model, const std::vector<TestImage>& testset,
                       const std::vector<int>& qfs, const SweepOptions& opts = {});

// path,qf,psnr,ssim,psnr_b,ipsnr rows followed by one "mean" row per qf.
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_sweep_json(std::ostream& out, const SweepResult& result);

std::vector<int> parse_qf_list(const std::string& text);

}  // namespace qgcn::train
