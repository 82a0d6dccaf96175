#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qgcn/jpeg/quant_table.hpp"

namespace qgcn::jpeg {

class JpegParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FrameComponent {
  int id = 0;
  int h_sampling = 1;
  int v_sampling = 1;
  int table_id = 0;
};

struct JpegMetadata {
  std::size_t width = 0;
  std::size_t height = 0;
  int sample_precision = 8;
  std::uint8_t frame_marker = 0;  // 0xC0 baseline, 0xC2 progressive, ...
  std::map<int, QuantTable> tables;
  std::vector<FrameComponent> components;

  bool progressive() const { return frame_marker == 0xC2 || frame_marker == 0xC6 || frame_marker == 0xCA || frame_marker == 0xCE; }
  // Table used by component `index` (0 = luma, 1 = first chroma component).
  const QuantTable& component_table(std::size_t index) const;
  // Luma table plus the first chroma table when the frame has 3+ components.
  std::pair<QuantTable, std::optional<QuantTable>> luma_chroma() const;
};

// Walks marker segments from SOI up to the first SOS (or EOI), decoding every
// DQT table (8/16-bit, several per segment, de-zigzagged) and the SOFn frame
// header. Entropy-coded data is never touched.
JpegMetadata parse_jpeg_metadata(std::span<const std::uint8_t> bytes);

// Decodes one standalone DQT segment, starting at its FF DB marker.
std::vector<QuantTable> parse_dqt_segment(std::span<const std::uint8_t> segment);

// FF DB segment holding `tables` in zigzag order.
std::vector<std::uint8_t> serialize_dqt(std::span<const QuantTable> tables);
// FF C0 (or the given SOFn) segment for the frame fields of `meta`.
std::vector<std::uint8_t> serialize_sof(const JpegMetadata& meta);
// SOI + DQT + SOFn + EOI: a header-only stream that parses back to `meta`.
std::vector<std::uint8_t> serialize_header(const JpegMetadata& meta);

}  // namespace qgcn::jpeg
