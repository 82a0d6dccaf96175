#include "qgcn/train/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "qgcn/sim/image_io.hpp"

namespace qgcn::train {

namespace fs = std::filesystem;

SampleStore SampleStore::subset(bool validation) const {
  SampleStore out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].validation == validation) {
      out.records.push_back(records[i]);
      out.crops.push_back(crops[i]);
    }
  }
  return out;
}

std::size_t grid_crop_count(std::size_t height, std::size_t width, std::size_t crop, std::size_t stride) {
  if (crop == 0 || stride == 0) throw std::invalid_argument("crop size and stride must be positive");
  if (height < crop || width < crop) return 0;
  return ((height - crop) / stride + 1) * ((width - crop) / stride + 1);
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    h ^= static_cast<unsigned char>(*it);
    h *= 0x100000001b3ULL;
  }
  return h;
}

SampleStore ingest_images(const std::vector<fs::path>& files, const IngestOptions& opts, std::ostream* warn) {
  if (opts.val_fraction < 0 || opts.val_fraction >= 1) throw std::invalid_argument("val_fraction must be in [0,1)");
  SampleStore store;
  for (const auto& f : files) {
    const Image8 img = sim::read_image(f);
    const std::size_t n = grid_crop_count(img.height(), img.width(), opts.crop_size, opts.stride);
    if (n == 0) {
      if (warn) {
        *warn << "warning: skipping " << f.string() << " (" << img.width() << "x" << img.height()
              << " is smaller than the " << opts.crop_size << "-pixel crop)\n";
      }
      continue;
    }
    const std::uint64_t hash = file_hash(f);
    for (std::size_t y = 0; y + opts.crop_size <= img.height(); y += opts.stride) {
      for (std::size_t x = 0; x + opts.crop_size <= img.width(); x += opts.stride) {
        store.records.push_back({f.string(), hash, y, x, opts.crop_size, false});
        store.crops.push_back(crop(img, y, x, opts.crop_size, opts.crop_size));
      }
    }
  }

  if (opts.val_fraction > 0 && store.size() > 1) {
    auto n_val = static_cast<std::size_t>(opts.val_fraction * static_cast<double>(store.size()));
    n_val = std::clamp<std::size_t>(n_val, 1, store.size() - 1);
    std::vector<std::size_t> idx(store.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(opts.seed ^ 0x5eed5eedULL);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < n_val; ++i) store.records[idx[i]].validation = true;
  }
  return store;
}

SampleStore ingest_dataset(const fs::path& dir, const IngestOptions& opts, std::ostream* warn) {
  return ingest_images(list_images(dir), opts, warn);
}

void write_manifest(const fs::path& path, const SampleStore& store) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  for (const auto& r : store.records) {
    nlohmann::json j = {{"source", r.source}, {"source_hash", r.source_hash}, {"y", r.y}, {"x", r.x},
                        {"size", r.size},     {"split", r.validation ? "val" : "train"}};
    out << j.dump() << '\n';
  }
}

std::vector<CropRecord> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest " + path.string());
  std::vector<CropRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("source").get<std::string>(), j.at("source_hash").get<std::uint64_t>(),
                     j.at("y").get<std::size_t>(), j.at("x").get<std::size_t>(), j.at("size").get<std::size_t>(),
                     j.at("split").get<std::string>() == "val"});
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void assert_disjoint(const std::vector<CropRecord>& training, const std::vector<fs::path>& held_out) {
  std::set<std::string> paths;
  std::set<std::uint64_t> hashes;
  for (const auto& p : held_out) {
    paths.insert(fs::weakly_canonical(p).string());
    hashes.insert(file_hash(p));
  }
  for (const auto& r : training) {
    if (paths.count(fs::weakly_canonical(r.source).string()) || hashes.count(r.source_hash)) {
      throw std::runtime_error("training data overlaps the held-out set: " + r.source);
    }
  }
}

}  // namespace qgcn::train
