#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace qgcn::jpeg {

// zigzag_to_natural[k] is the row-major position of the k-th coefficient in
// zigzag (bitstream) order.
extern const std::array<int, 64> kZigzagToNatural;

// 8×8 quantizer step sizes in natural row-major order.
struct QuantTable {
  std::array<std::uint16_t, 64> entries{};
  int precision_bits = 8;  // 8 or 16
  int table_id = 0;        // 0..3

  std::uint16_t at(int row, int col) const { return entries[static_cast<std::size_t>(row * 8 + col)]; }
  // Throws std::invalid_argument if an entry is 0, exceeds 255 at 8-bit
  // precision, or the id/precision fields are out of range.
  void validate() const;

  friend bool operator==(const QuantTable&, const QuantTable&) = default;
};

// Annex K base tables as shipped with the IJG encoder; ids 0 and 1.
std::pair<QuantTable, QuantTable> ijg_base_tables();

// IJG quality scaling (baseline-clamped): S = 5000/qf for qf < 50, else
// 200 − 2·qf; entry = clamp((B·S + 50) / 100, 1, 255) in integer arithmetic.
// Throws std::out_of_range unless 1 <= qf <= 100.
QuantTable scale_qtable(const QuantTable& base, int qf);

// Both standard tables at one quality factor: {luma (id 0), chroma (id 1)}.
std::pair<QuantTable, QuantTable> ijg_tables(int qf);

std::array<std::uint16_t, 64> to_zigzag(const std::array<std::uint16_t, 64>& natural);
std::array<std::uint16_t, 64> from_zigzag(const std::array<std::uint16_t, 64>& zigzag);

}  // namespace qgcn::jpeg
