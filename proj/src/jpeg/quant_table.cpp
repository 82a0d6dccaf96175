#include "qgcn/jpeg/quant_table.hpp"

#include <algorithm>
#include <string>

namespace qgcn::jpeg {

const std::array<int, 64> kZigzagToNatural = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,  12, 19, 26, 33, 40, 48,
    41, 34, 27, 20, 13, 6,  7,  14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23,
    30, 37, 44, 51, 58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
};

namespace {

constexpr std::array<std::uint16_t, 64> kLumaBase = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99,
};

constexpr std::array<std::uint16_t, 64> kChromaBase = {
    17, 18, 24, 47, 99, 99, 99, 99,  //
    18, 21, 26, 66, 99, 99, 99, 99,  //
    24, 26, 56, 99, 99, 99, 99, 99,  //
    47, 66, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,
};

}  // namespace

void QuantTable::validate() const {
  if (precision_bits != 8 && precision_bits != 16) {
    throw std::invalid_argument("quantization table precision must be 8 or 16 bits");
  }
  if (table_id < 0 || table_id > 3) throw std::invalid_argument("quantization table id must be 0..3");
  for (auto e : entries) {
    if (e == 0) throw std::invalid_argument("quantization table entry of 0");
    if (precision_bits == 8 && e > 255) throw std::invalid_argument("8-bit quantization table entry above 255");
  }
}

std::pair<QuantTable, QuantTable> ijg_base_tables() {
  return {QuantTable{kLumaBase, 8, 0}, QuantTable{kChromaBase, 8, 1}};
}

QuantTable scale_qtable(const QuantTable& base, int qf) {
  if (qf < 1 || qf > 100) throw std::out_of_range("quality factor " + std::to_string(qf) + " outside [1,100]");
  const long s = qf < 50 ? 5000 / qf : 200 - 2 * qf;
  QuantTable out = base;
  out.precision_bits = 8;
  for (std::size_t i = 0; i < 64; ++i) {
    const long t = (static_cast<long>(base.entries[i]) * s + 50) / 100;
    out.entries[i] = static_cast<std::uint16_t>(std::clamp(t, 1L, 255L));
  }
  return out;
}

std::pair<QuantTable, QuantTable> ijg_tables(int qf) {
  const auto [luma, chroma] = ijg_base_tables();
  return {scale_qtable(luma, qf), scale_qtable(chroma, qf)};
}

std::array<std::uint16_t, 64> to_zigzag(const std::array<std::uint16_t, 64>& natural) {
  std::array<std::uint16_t, 64> out{};
  for (std::size_t k = 0; k < 64; ++k) out[k] = natural[static_cast<std::size_t>(kZigzagToNatural[k])];
  return out;
}

std::array<std::uint16_t, 64> from_zigzag(const std::array<std::uint16_t, 64>& zigzag) {
  std::array<std::uint16_t, 64> out{};
  for (std::size_t k = 0; k < 64; ++k) out[static_cast<std::size_t>(kZigzagToNatural[k])] = zigzag[k];
  return out;
}

}  // namespace qgcn::jpeg
