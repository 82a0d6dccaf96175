#include "qgcn/image.hpp"

#include <algorithm>
#include <cmath>

namespace qgcn {

const char* to_string(ColorSpace cs) {
  switch (cs) {
    case ColorSpace::Gray: return "gray";
    case ColorSpace::Rgb: return "rgb";
    case ColorSpace::YCbCr: return "ycbcr";
  }
  return "?";
}

std::uint8_t round_to_u8(double v) {
  // std::round is half away from zero.
  return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

ImageF to_float(const Image8& img) {
  ImageF out(img.height(), img.width(), img.colorspace());
  auto dst = out.pixels();
  auto src = img.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>(src[i]) / 255.0f;
  return out;
}

Image8 to_u8(const ImageF& img) {
  Image8 out(img.height(), img.width(), img.colorspace());
  auto dst = out.pixels();
  auto src = img.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = round_to_u8(double(src[i]) * 255.0);
  return out;
}

Image8 crop(const Image8& img, std::size_t y, std::size_t x, std::size_t height, std::size_t width) {
  if (y + height > img.height() || x + width > img.width()) {
    throw std::out_of_range("crop window exceeds image bounds");
  }
  Image8 out(height, width, img.colorspace());
  const std::size_t c = img.channels();
  for (std::size_t r = 0; r < height; ++r) {
    const auto* src = &img.at(y + r, x);
    std::copy_n(src, width * c, &out.at(r, 0));
  }
  return out;
}

Image8 downscale_box(const Image8& img, std::size_t factor) {
  if (factor == 0) throw std::invalid_argument("downscale factor must be positive");
  const std::size_t h = img.height() / factor, w = img.width() / factor;
  if (h == 0 || w == 0) throw std::invalid_argument("image too small for downscale factor");
  Image8 out(h, w, img.colorspace());
  const double area = double(factor * factor);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < img.channels(); ++c) {
        double s = 0;
        for (std::size_t dy = 0; dy < factor; ++dy) {
          for (std::size_t dx = 0; dx < factor; ++dx) s += img.at(y * factor + dy, x * factor + dx, c);
        }
        out.at(y, x, c) = round_to_u8(s / area);
      }
    }
  }
  return out;
}

std::vector<double> luma_plane(const Image8& img) {
  std::vector<double> y(img.height() * img.width());
  if (img.channels() == 1) {
    std::copy(img.pixels().begin(), img.pixels().end(), y.begin());
    return y;
  }
  if (img.colorspace() == ColorSpace::YCbCr) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = img.pixels()[i * 3];
    return y;
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto* p = img.pixels().data() + i * 3;
    y[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  }
  return y;
}

Image8 to_gray(const Image8& img) {
  if (img.channels() == 1) return img;
  const auto y = luma_plane(img);
  Image8 out(img.height(), img.width(), ColorSpace::Gray);
  for (std::size_t i = 0; i < y.size(); ++i) out.pixels()[i] = round_to_u8(y[i]);
  return out;
}

}  // namespace qgcn
