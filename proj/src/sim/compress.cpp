#include "qgcn/sim/compress.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgcn/jpeg/quant_map.hpp"
#include "qgcn/sim/color.hpp"
#include "qgcn/sim/dct.hpp"

namespace qgcn::sim {
namespace {

struct Plane {
  std::size_t height = 0, width = 0;
  std::vector<std::uint8_t> v;
  std::uint8_t& at(std::size_t y, std::size_t x) { return v[y * width + x]; }
  std::uint8_t at(std::size_t y, std::size_t x) const { return v[y * width + x]; }
};

Plane extract(const Image8& img, std::size_t c) {
  Plane p{img.height(), img.width(), std::vector<std::uint8_t>(img.height() * img.width())};
  for (std::size_t y = 0; y < p.height; ++y) {
    for (std::size_t x = 0; x < p.width; ++x) p.at(y, x) = img.at(y, x, c);
  }
  return p;
}

// Extents must be multiples of 8.
void code_blocks(Plane& p, const jpeg::QuantTable& table) {
  Block block{};
  for (std::size_t by = 0; by < p.height; by += 8) {
    for (std::size_t bx = 0; bx < p.width; bx += 8) {
      for (std::size_t i = 0; i < 64; ++i) block[i] = p.at(by + i / 8, bx + i % 8);
      const Block rec = idct8x8(quantize_dequantize(fdct8x8(block), table));
      for (std::size_t i = 0; i < 64; ++i) p.at(by + i / 8, bx + i % 8) = round_to_u8(rec[i]);
    }
  }
}

Plane downsample2(const Plane& p) {
  Plane out{p.height / 2, p.width / 2, std::vector<std::uint8_t>(p.height / 2 * (p.width / 2))};
  for (std::size_t y = 0; y < out.height; ++y) {
    for (std::size_t x = 0; x < out.width; ++x) {
      const int s = p.at(2 * y, 2 * x) + p.at(2 * y, 2 * x + 1) + p.at(2 * y + 1, 2 * x) + p.at(2 * y + 1, 2 * x + 1);
      out.at(y, x) = round_to_u8(s / 4.0);
    }
  }
  return out;
}

Plane upsample2(const Plane& p) {
  Plane out{p.height * 2, p.width * 2, std::vector<std::uint8_t>(p.height * p.width * 4)};
  for (std::size_t y = 0; y < out.height; ++y) {
    for (std::size_t x = 0; x < out.width; ++x) out.at(y, x) = p.at(y / 2, x / 2);
  }
  return out;
}

}  // namespace

Subsampling parse_subsampling(std::string_view s) {
  if (s == "444" || s == "4:4:4") return Subsampling::k444;
  if (s == "420" || s == "4:2:0") return Subsampling::k420;
  throw std::invalid_argument("unknown subsampling '" + std::string(s) + "' (expected 444 or 420)");
}

const char* to_string(Subsampling s) { return s == Subsampling::k444 ? "444" : "420"; }

Image8 compress_with_tables(const Image8& img, const jpeg::QuantTable& luma, const jpeg::QuantTable& chroma,
                            Subsampling subsampling) {
  luma.validate();
  chroma.validate();
  if (img.colorspace() == ColorSpace::Gray) {
    auto padded = jpeg::pad_to_block_multiple(img, 8);
    Plane p = extract(padded.image, 0);
    code_blocks(p, luma);
    std::copy(p.v.begin(), p.v.end(), padded.image.pixels().begin());
    return jpeg::unpad(padded);
  }
  if (img.colorspace() != ColorSpace::Rgb) throw std::invalid_argument("compress_simulate expects RGB or gray input");

  const bool sub = subsampling == Subsampling::k420;
  auto padded = jpeg::pad_to_block_multiple(img, sub ? 16 : 8);
  Image8 ycc = rgb_to_ycbcr(padded.image);
  for (std::size_t c = 0; c < 3; ++c) {
    Plane p = extract(ycc, c);
    if (c == 0) {
      code_blocks(p, luma);
    } else if (sub) {
      Plane small = downsample2(p);
      code_blocks(small, chroma);
      p = upsample2(small);
    } else {
      code_blocks(p, chroma);
    }
    for (std::size_t y = 0; y < p.height; ++y) {
      for (std::size_t x = 0; x < p.width; ++x) ycc.at(y, x, c) = p.at(y, x);
    }
  }
  padded.image = ycbcr_to_rgb(ycc);
  return jpeg::unpad(padded);
}

CompressionResult compress_simulate(const Image8& img, int qf, Subsampling subsampling) {
  auto [luma, chroma] = jpeg::ijg_tables(qf);
  Image8 out = compress_with_tables(img, luma, chroma, subsampling);
  return {std::move(out), luma, chroma};
}

}  // namespace qgcn::sim
