#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "qgcn/image.hpp"
#include "qgcn/jpeg/quant_table.hpp"

namespace qgcn::jpeg {

// Divisor that maps raw step sizes into (0,1] for network input.
inline constexpr double kQuantMapScale = 255.0;

// Quantization tables tiled over the pixel grid, aligned to 8×8 blocks:
// plane k at (y, x) holds table_k(y mod 8, x mod 8). One plane (luma) for
// grayscale, two (luma, chroma) for color.
class QuantMap {
 public:
  QuantMap(std::size_t height, std::size_t width, std::vector<QuantTable> sources);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t planes() const { return sources_.size(); }
  const std::vector<QuantTable>& sources() const { return sources_; }

  float at(std::size_t y, std::size_t x, std::size_t plane) const {
    return values_[(plane * height_ + y) * width_ + x];
  }
  // Planar K×H×W raw step sizes.
  const std::vector<float>& values() const { return values_; }
  // Planar K×H×W values divided by kQuantMapScale.
  std::vector<float> normalized() const;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<QuantTable> sources_;
  std::vector<float> values_;
};

// chroma present selects color mode (K = 2), absent selects grayscale (K = 1).
QuantMap build_qmap(std::size_t width, std::size_t height, const QuantTable& luma,
                    const std::optional<QuantTable>& chroma);

template <typename T>
struct PaddedImage {
  ImageBuffer<T> image;
  std::size_t original_height = 0;
  std::size_t original_width = 0;
};

// Grows the image to the next multiple of `block` in each direction by
// replicating the last row and column.
template <typename T>
PaddedImage<T> pad_to_block_multiple(const ImageBuffer<T>& img, std::size_t block = 8) {
  const std::size_t h = (img.height() + block - 1) / block * block;
  const std::size_t w = (img.width() + block - 1) / block * block;
  PaddedImage<T> out{ImageBuffer<T>(h, w, img.colorspace()), img.height(), img.width()};
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t sy = y < img.height() ? y : img.height() - 1;
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t sx = x < img.width() ? x : img.width() - 1;
      for (std::size_t c = 0; c < img.channels(); ++c) out.image.at(y, x, c) = img.at(sy, sx, c);
    }
  }
  return out;
}

// Top-left height×width window of `img`.
template <typename T>
ImageBuffer<T> unpad(const ImageBuffer<T>& img, std::size_t height, std::size_t width) {
  if (height > img.height() || width > img.width()) throw std::invalid_argument("unpad beyond image extents");
  ImageBuffer<T> out(height, width, img.colorspace());
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < img.channels(); ++c) out.at(y, x, c) = img.at(y, x, c);
    }
  }
  return out;
}

template <typename T>
ImageBuffer<T> unpad(const PaddedImage<T>& p) {
  return unpad(p.image, p.original_height, p.original_width);
}

}  // namespace qgcn::jpeg
