#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace qgcn {

enum class ColorSpace { Gray, Rgb, YCbCr };

const char* to_string(ColorSpace cs);

// Interleaved H×W×C pixel planes, C = 1 for Gray and 3 otherwise.
template <typename T>
class ImageBuffer {
 public:
  using value_type = T;

  ImageBuffer() = default;
  ImageBuffer(std::size_t height, std::size_t width, ColorSpace cs, T fill = T{})
      : height_(height), width_(width), channels_(cs == ColorSpace::Gray ? 1 : 3), cs_(cs) {
    if (height == 0 || width == 0) throw std::invalid_argument("image extents must be at least 1x1");
    pixels_.assign(height * width * channels_, fill);
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  ColorSpace colorspace() const { return cs_; }
  bool empty() const { return pixels_.empty(); }

  // Retags the planes without touching values (Rgb <-> YCbCr only).
  void retag(ColorSpace cs) {
    if ((cs == ColorSpace::Gray) != (cs_ == ColorSpace::Gray)) {
      throw std::invalid_argument("retag cannot change the channel count");
    }
    cs_ = cs;
  }

  T& at(std::size_t y, std::size_t x, std::size_t c = 0) { return pixels_[(y * width_ + x) * channels_ + c]; }
  const T& at(std::size_t y, std::size_t x, std::size_t c = 0) const {
    return pixels_[(y * width_ + x) * channels_ + c];
  }

  std::span<T> pixels() { return pixels_; }
  std::span<const T> pixels() const { return pixels_; }

  bool same_geometry(const ImageBuffer& o) const {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }
  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  ColorSpace cs_ = ColorSpace::Gray;
  std::vector<T> pixels_;
};

using Image8 = ImageBuffer<std::uint8_t>;
using ImageF = ImageBuffer<float>;

// 8-bit -> [0,1] by /255.
ImageF to_float(const Image8& img);
// [0,1] -> 8-bit by ×255, round half away from zero, clamp to [0,255].
Image8 to_u8(const ImageF& img);

std::uint8_t round_to_u8(double v);

Image8 crop(const Image8& img, std::size_t y, std::size_t x, std::size_t height, std::size_t width);

// Area-average downscale by an integer factor per side (trailing remainder dropped).
Image8 downscale_box(const Image8& img, std::size_t factor);

// Rec.601 luma of an RGB image as a float plane; a Gray image is returned as-is.
std::vector<double> luma_plane(const Image8& img);

// Single-channel image of the rounded luma plane.
Image8 to_gray(const Image8& img);

}  // namespace qgcn
