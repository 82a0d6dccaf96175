#include "qgcn/sim/color.hpp"

#include <stdexcept>

namespace qgcn::sim {

Image8 rgb_to_ycbcr(const Image8& rgb) {
  if (rgb.colorspace() != ColorSpace::Rgb) throw std::invalid_argument("rgb_to_ycbcr expects an RGB image");
  Image8 out(rgb.height(), rgb.width(), ColorSpace::YCbCr);
  const auto src = rgb.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const double r = src[i], g = src[i + 1], b = src[i + 2];
    dst[i] = round_to_u8(0.299 * r + 0.587 * g + 0.114 * b);
    dst[i + 1] = round_to_u8(-0.168736 * r - 0.331264 * g + 0.5 * b + 128.0);
    dst[i + 2] = round_to_u8(0.5 * r - 0.418688 * g - 0.081312 * b + 128.0);
  }
  return out;
}

Image8 ycbcr_to_rgb(const Image8& ycc) {
  if (ycc.colorspace() != ColorSpace::YCbCr) throw std::invalid_argument("ycbcr_to_rgb expects a YCbCr image");
  Image8 out(ycc.height(), ycc.width(), ColorSpace::Rgb);
  const auto src = ycc.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const double y = src[i], cb = src[i + 1] - 128.0, cr = src[i + 2] - 128.0;
    dst[i] = round_to_u8(y + 1.402 * cr);
    dst[i + 1] = round_to_u8(y - 0.344136 * cb - 0.714136 * cr);
    dst[i + 2] = round_to_u8(y + 1.772 * cb);
  }
  return out;
}

}  // namespace qgcn::sim
