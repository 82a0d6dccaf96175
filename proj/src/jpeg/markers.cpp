#include "qgcn/jpeg/markers.hpp"

#include <string>

namespace qgcn::jpeg {
namespace {

constexpr std::uint8_t kSOI = 0xD8;
constexpr std::uint8_t kEOI = 0xD9;
constexpr std::uint8_t kSOS = 0xDA;
constexpr std::uint8_t kDQT = 0xDB;
constexpr std::uint8_t kTEM = 0x01;

bool is_sof(std::uint8_t m) {
  // C4 (DHT), C8 (JPG) and CC (DAC) share the range but are not frame headers.
  return m >= 0xC0 && m <= 0xCF && m != 0xC4 && m != 0xC8 && m != 0xCC;
}

bool is_standalone(std::uint8_t m) { return m == kTEM || (m >= 0xD0 && m <= 0xD7); }

std::string hex(std::uint8_t m) {
  static const char* digits = "0123456789ABCDEF";
  return std::string("FF") + digits[m >> 4] + digits[m & 15];
}

void parse_dqt(std::span<const std::uint8_t> seg, JpegMetadata& meta) {
  std::size_t pos = 0;
  while (pos < seg.size()) {
    const int pq = seg[pos] >> 4;
    const int tq = seg[pos] & 0x0F;
    ++pos;
    if (pq > 1) throw JpegParseError("DQT declares unknown precision " + std::to_string(pq));
    if (tq > 3) throw JpegParseError("DQT table id " + std::to_string(tq) + " out of range");
    const std::size_t need = pq ? 128 : 64;
    if (seg.size() - pos < need) throw JpegParseError("truncated segment: DQT table " + std::to_string(tq));
    std::array<std::uint16_t, 64> zz{};
    for (std::size_t k = 0; k < 64; ++k) {
      zz[k] = pq ? static_cast<std::uint16_t>((seg[pos + 2 * k] << 8) | seg[pos + 2 * k + 1]) : seg[pos + k];
      if (zz[k] == 0) throw JpegParseError("DQT table " + std::to_string(tq) + " has a zero entry");
    }
    pos += need;
    meta.tables[tq] = QuantTable{from_zigzag(zz), pq ? 16 : 8, tq};
  }
}

void parse_sof(std::uint8_t marker, std::span<const std::uint8_t> seg, JpegMetadata& meta) {
  if (seg.size() < 6) throw JpegParseError("truncated segment: " + hex(marker) + " frame header");
  const std::size_t nf = seg[5];
  if (seg.size() != 6 + 3 * nf) throw JpegParseError("frame header length does not match component count");
  if (nf == 0) throw JpegParseError("frame header declares no components");
  meta.frame_marker = marker;
  meta.sample_precision = seg[0];
  meta.height = static_cast<std::size_t>((seg[1] << 8) | seg[2]);
  meta.width = static_cast<std::size_t>((seg[3] << 8) | seg[4]);
  if (meta.width == 0 || meta.height == 0) throw JpegParseError("frame dimensions must be at least 1x1");
  meta.components.clear();
  for (std::size_t i = 0; i < nf; ++i) {
    const auto* c = seg.data() + 6 + 3 * i;
    meta.components.push_back({c[0], c[1] >> 4, c[1] & 0x0F, c[2]});
  }
}

}  // namespace

const QuantTable& JpegMetadata::component_table(std::size_t index) const {
  const auto it = tables.find(components.at(index).table_id);
  if (it == tables.end()) throw JpegParseError("component references an undefined quantization table");
  return it->second;
}

std::pair<QuantTable, std::optional<QuantTable>> JpegMetadata::luma_chroma() const {
  std::optional<QuantTable> chroma;
  if (components.size() >= 3) chroma = component_table(1);
  return {component_table(0), chroma};
}

JpegMetadata parse_jpeg_metadata(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 0xFF || bytes[1] != kSOI) throw JpegParseError("missing SOI marker");
  JpegMetadata meta;
  bool have_frame = false;
  bool terminated = false;
  std::size_t pos = 2;
  while (pos < bytes.size()) {
    if (bytes[pos] != 0xFF) throw JpegParseError("expected marker at offset " + std::to_string(pos));
    while (pos < bytes.size() && bytes[pos] == 0xFF) ++pos;  // fill bytes
    if (pos >= bytes.size()) break;
    const std::uint8_t marker = bytes[pos++];
    if (marker == kEOI || marker == kSOS) {
      terminated = true;
      break;
    }
    if (marker == kSOI) throw JpegParseError("unexpected second SOI marker");
    if (is_standalone(marker)) continue;
    if (bytes.size() - pos < 2) throw JpegParseError("truncated segment: " + hex(marker) + " length");
    const std::size_t len = static_cast<std::size_t>((bytes[pos] << 8) | bytes[pos + 1]);
    if (len < 2) throw JpegParseError("invalid segment length in " + hex(marker));
    if (bytes.size() - pos < len) throw JpegParseError("truncated segment: " + hex(marker));
    const auto seg = bytes.subspan(pos + 2, len - 2);
    if (marker == kDQT) {
      parse_dqt(seg, meta);
    } else if (is_sof(marker)) {
      if (have_frame) throw JpegParseError("multiple frame headers");
      parse_sof(marker, seg, meta);
      have_frame = true;
    }
    pos += len;
  }
  if (!terminated) throw JpegParseError("truncated stream: no SOS or EOI marker");
  if (!have_frame) throw JpegParseError("missing SOF frame header");
  for (const auto& c : meta.components) {
    if (!meta.tables.contains(c.table_id)) {
      throw JpegParseError("component " + std::to_string(c.id) + " references undefined table " +
                           std::to_string(c.table_id));
    }
  }
  return meta;
}

std::vector<QuantTable> parse_dqt_segment(std::span<const std::uint8_t> segment) {
  if (segment.size() < 2 || segment[0] != 0xFF || segment[1] != kDQT) throw JpegParseError("expected DQT marker");
  if (segment.size() < 4) throw JpegParseError("truncated segment: FFDB length");
  const std::size_t len = static_cast<std::size_t>((segment[2] << 8) | segment[3]);
  if (len < 2) throw JpegParseError("invalid segment length in FFDB");
  if (segment.size() - 2 < len) throw JpegParseError("truncated segment: FFDB");
  JpegMetadata scratch;
  parse_dqt(segment.subspan(4, len - 2), scratch);
  std::vector<QuantTable> out;
  for (auto& [id, t] : scratch.tables) out.push_back(t);
  return out;
}

std::vector<std::uint8_t> serialize_dqt(std::span<const QuantTable> tables) {
  std::vector<std::uint8_t> out{0xFF, kDQT, 0, 0};
  for (const auto& t : tables) {
    t.validate();
    const bool wide = t.precision_bits == 16;
    out.push_back(static_cast<std::uint8_t>(((wide ? 1 : 0) << 4) | t.table_id));
    for (auto v : to_zigzag(t.entries)) {
      if (wide) out.push_back(static_cast<std::uint8_t>(v >> 8));
      out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    }
  }
  const std::size_t len = out.size() - 2;
  if (len > 0xFFFF) throw std::invalid_argument("DQT segment too long");
  out[2] = static_cast<std::uint8_t>(len >> 8);
  out[3] = static_cast<std::uint8_t>(len);
  return out;
}

std::vector<std::uint8_t> serialize_sof(const JpegMetadata& meta) {
  if (meta.width == 0 || meta.height == 0 || meta.width > 0xFFFF || meta.height > 0xFFFF) {
    throw std::invalid_argument("frame dimensions out of range");
  }
  const std::uint8_t marker = meta.frame_marker ? meta.frame_marker : 0xC0;
  const std::size_t len = 8 + 3 * meta.components.size();
  std::vector<std::uint8_t> out{0xFF,
                                marker,
                                static_cast<std::uint8_t>(len >> 8),
                                static_cast<std::uint8_t>(len),
                                static_cast<std::uint8_t>(meta.sample_precision),
                                static_cast<std::uint8_t>(meta.height >> 8),
                                static_cast<std::uint8_t>(meta.height),
                                static_cast<std::uint8_t>(meta.width >> 8),
                                static_cast<std::uint8_t>(meta.width),
                                static_cast<std::uint8_t>(meta.components.size())};
  for (const auto& c : meta.components) {
    out.push_back(static_cast<std::uint8_t>(c.id));
    out.push_back(static_cast<std::uint8_t>((c.h_sampling << 4) | c.v_sampling));
    out.push_back(static_cast<std::uint8_t>(c.table_id));
  }
  return out;
}

std::vector<std::uint8_t> serialize_header(const JpegMetadata& meta) {
  std::vector<std::uint8_t> out{0xFF, kSOI};
  std::vector<QuantTable> tables;
  for (const auto& [id, t] : meta.tables) tables.push_back(t);
  const auto dqt = serialize_dqt(tables);
  const auto sof = serialize_sof(meta);
  out.insert(out.end(), dqt.begin(), dqt.end());
  out.insert(out.end(), sof.begin(), sof.end());
  out.push_back(0xFF);
  out.push_back(kEOI);
  return out;
}

}  // namespace qgcn::jpeg
