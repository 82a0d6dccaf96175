#pragma once

#include <array>

#include "qgcn/jpeg/quant_table.hpp"

namespace qgcn::sim {

// Row-major 8×8 block.
using Block = std::array<double, 64>;

// Type-II DCT with the JPEG normalisation 1/4·C(u)·C(v), C(0) = 1/√2,
// applied to the level-shifted samples (value − 128).
Block fdct8x8(const Block& samples);

// Inverse of fdct8x8, including the +128 level shift. No rounding.
Block idct8x8(const Block& coeffs);

// c' = round(c / q)·q per coefficient, rounding half away from zero.
Block quantize_dequantize(const Block& coeffs, const jpeg::QuantTable& table);

}  // namespace qgcn::sim
