#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qgcn/image.hpp"

namespace qgcn::train {

struct CropRecord {
  std::string source;  // path of the source image as ingested
  std::uint64_t source_hash = 0;  // FNV-1a 64 of the source file bytes
  std::size_t y = 0;
  std::size_t x = 0;
  std::size_t size = 0;
  bool validation = false;
};

struct SampleStore {
  std::vector<CropRecord> records;
  std::vector<Image8> crops;  // parallel to records

  std::size_t size() const { return crops.size(); }
  bool empty() const { return crops.empty(); }
  // Sub-store of the training (or validation) records.
  SampleStore subset(bool validation) const;
};

struct IngestOptions {
  std::size_t crop_size = 256;
  std::size_t stride = 128;
  double val_fraction = 0.0;
  std::uint64_t seed = 0;  // drives the validation split only
};

// Crops per image on a grid: (floor((H−crop)/stride)+1)·(floor((W−crop)/stride)+1),
// 0 when either side is shorter than the crop.
std::size_t grid_crop_count(std::size_t height, std::size_t width, std::size_t crop, std::size_t stride);

// Lossless images (.png .ppm .pgm .pnm) directly inside `dir`, sorted by name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

std::uint64_t file_hash(const std::filesystem::path& path);

// Grid-crops every image in `dir`. Undersized images are skipped with a
// warning on `warn` (if given). Throws std::runtime_error when `dir` is missing.
SampleStore ingest_dataset(const std::filesystem::path& dir, const IngestOptions& opts, std::ostream* warn = nullptr);
SampleStore ingest_images(const std::vector<std::filesystem::path>& files, const IngestOptions& opts,
                          std::ostream* warn = nullptr);

// One JSON object per line.
void write_manifest(const std::filesystem::path& path, const SampleStore& store);
std::vector<CropRecord> read_manifest(const std::filesystem::path& path);

// Throws std::runtime_error if any training record shares a path or content
// hash with one of `held_out`.
void assert_disjoint(const std::vector<CropRecord>& training, const std::vector<std::filesystem::path>& held_out);

}  // namespace qgcn::train
