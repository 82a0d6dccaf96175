#pragma once

#include <string_view>

#include "qgcn/image.hpp"
#include "qgcn/jpeg/quant_table.hpp"

namespace qgcn::sim {

enum class Subsampling { k444, k420 };

Subsampling parse_subsampling(std::string_view s);  // "444" | "420"
const char* to_string(Subsampling s);

struct CompressionResult {
  Image8 image;
  jpeg::QuantTable luma;
  jpeg::QuantTable chroma;
};

// Pixel-domain JPEG degradation without entropy coding. Color images go
// through YCbCr (optionally with 2×2 box-averaged chroma), every 8×8 block of
// every plane through fdct -> quantize/dequantize -> idct, and back to RGB;
// grayscale images use the luma table only. Deterministic. Input of any size
// is padded by edge replication and cropped back on return.
// Throws std::out_of_range for qf outside [1,100].
CompressionResult compress_simulate(const Image8& img, int qf, Subsampling subsampling = Subsampling::k420);

// Same pipeline with caller-supplied tables.
Image8 compress_with_tables(const Image8& img, const jpeg::QuantTable& luma, const jpeg::QuantTable& chroma,
                            Subsampling subsampling);

}  // namespace qgcn::sim
