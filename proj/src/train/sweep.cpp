#include "qgcn/train/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "qgcn/jpeg/quant_map.hpp"
#include "qgcn/sim/image_io.hpp"
#include "qgcn/train/dataset.hpp"
#include "qgcn/train/sampler.hpp"

namespace qgcn::train {

namespace fs = std::filesystem;

namespace {

double capped(double db) { return std::min(db, metrics::kPsnrSentinel); }

}  // namespace

Image8 restore_image(const model::QgcnModel<float>& model, const Image8& degraded, const jpeg::QuantTable& luma,
                     const jpeg::QuantTable& chroma) {
  const bool color = model.config().color();
  if (color != (degraded.channels() == 3)) {
    throw std::invalid_argument(std::string("restore: ") + (color ? "color" : "grayscale") + " model given a " +
                                (degraded.channels() == 3 ? "color" : "grayscale") + " image");
  }
  const auto padded = jpeg::pad_to_block_multiple(degraded, 8);
  const auto& img = padded.image;
  const auto qm = jpeg::build_qmap(img.width(), img.height(), luma,
                                   color ? std::optional<jpeg::QuantTable>(chroma) : std::nullopt);
  const auto out = model.infer(images_to_tensor({img}), qmap_to_tensor(qm));
  return jpeg::unpad(tensor_to_image(out, 0, degraded.colorspace()), padded.original_height, padded.original_width);
}

std::vector<TestImage> load_testset(const fs::path& path) {
  std::vector<TestImage> out;
  if (fs::is_directory(path)) {
    for (const auto& f : list_images(path)) out.push_back({f.filename().string(), sim::read_image(f)});
  } else {
    out.push_back({path.filename().string(), sim::read_image(path)});
  }
  if (out.empty()) throw std::runtime_error("empty test set: " + path.string());
  return out;
}

std::vector<TestImage> rescale_testset(const std::vector<TestImage>& set, std::size_t factor) {
  if (factor == 0) throw std::invalid_argument("rescale factor must be positive");
  if (factor == 1) return set;
  std::vector<TestImage> out;
  for (const auto& t : set) out.push_back({t.name, downscale_box(t.image, factor)});
  return out;
}

SweepResult sweep_eval(const model::QgcnModel<float>& model, const std::vector<TestImage>& testset,
                       const std::vector<int>& qfs, const SweepOptions& opts) {
  if (testset.empty()) throw std::invalid_argument("sweep: empty test set");
  if (qfs.empty()) throw std::invalid_argument("sweep: no quality factors");
  SweepResult res;
  for (int qf : qfs) {
    if (qf < 1 || qf > 100) throw std::out_of_range("sweep: quality factor " + std::to_string(qf) + " outside [1,100]");
    SweepMean& m = res.means[qf];
    for (const auto& t : testset) {
      Image8 ref = model.config().color() ? t.image : to_gray(t.image);
      if (model.config().color() && ref.channels() != 3) throw std::invalid_argument("sweep: color model given a grayscale image " + t.name);
      const auto sim = sim::compress_simulate(ref, qf, opts.subsampling);
      const Image8 restored = restore_image(model, sim.image, sim.luma, sim.chroma);
      SweepRow row{t.name, qf, metrics::evaluate(ref, restored, &sim.image, opts.channels)};
      m.psnr += capped(row.report.psnr);
      m.ssim += row.report.ssim;
      m.psnr_b += capped(row.report.psnr_b);
      m.ipsnr += capped(row.report.psnr) - capped(metrics::psnr(ref, sim.image, opts.channels));
      ++m.count;
      res.rows.push_back(std::move(row));
    }
    m.psnr /= double(m.count);
    m.ssim /= double(m.count);
    m.psnr_b /= double(m.count);
    m.ipsnr /= double(m.count);
  }
  return res;
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << "path,qf,psnr,ssim,psnr_b,ipsnr\n";
  char ssim[32];
  for (const auto& row : r.rows) {
    std::snprintf(ssim, sizeof ssim, "%.6f", row.report.ssim);
    out << row.name << ',' << row.qf << ',' << metrics::format_db(row.report.psnr) << ',' << ssim << ','
        << metrics::format_db(row.report.psnr_b) << ',' << metrics::format_db(row.report.ipsnr.value_or(0)) << '\n';
  }
  for (const auto& [qf, m] : r.means) {
    std::snprintf(ssim, sizeof ssim, "%.6f", m.ssim);
    out << "mean," << qf << ',' << metrics::format_db(m.psnr) << ',' << ssim << ',' << metrics::format_db(m.psnr_b)
        << ',' << metrics::format_db(m.ipsnr) << '\n';
  }
}

void write_sweep_json(std::ostream& out, const SweepResult& r) {
  auto db = [](double v) { return capped(v); };
  nlohmann::json rows = nlohmann::json::array(), means = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"path", row.name},
                    {"qf", row.qf},
                    {"psnr", db(row.report.psnr)},
                    {"ssim", row.report.ssim},
                    {"psnr_b", db(row.report.psnr_b)},
                    {"ipsnr", db(row.report.ipsnr.value_or(0))}});
  }
  for (const auto& [qf, m] : r.means) {
    means.push_back({{"qf", qf}, {"psnr", m.psnr}, {"ssim", m.ssim}, {"psnr_b", m.psnr_b}, {"ipsnr", m.ipsnr},
                     {"count", m.count}});
  }
  out << nlohmann::json{{"rows", rows}, {"means", means}}.dump(2) << '\n';
}

std::vector<int> parse_qf_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument("bad quality factor '" + item + "'");
    if (v < 1 || v > 100) throw std::out_of_range("quality factor " + item + " outside [1,100]");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty quality-factor list");
  return out;
}

}  // namespace qgcn::train
