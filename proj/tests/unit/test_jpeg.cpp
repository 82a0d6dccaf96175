#include <algorithm>
#include <set>

#include "doctest.h"
#include "qgcn/jpeg/markers.hpp"
#include "qgcn/jpeg/quant_map.hpp"
#include "qgcn/jpeg/quant_table.hpp"
#include "test_support.hpp"

using namespace qgcn;
using namespace qgcn::jpeg;

TEST_CASE("base tables match the reference encoder at quality 50") {
  auto [luma, chroma] = ijg_base_tables();
  CHECK(luma.at(0, 0) == 16);
  CHECK(luma.at(7, 7) == 99);
  for (int r = 4; r < 8; ++r)
    for (int c = 4; c < 8; ++c) CHECK(chroma.at(r, c) == 99);
  const auto ref = testing::reference_tables(50);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(luma.entries[i] == ref[0][i]);
    CHECK(chroma.entries[i] == ref[1][i]);
  }
}

TEST_CASE("quality scaling laws") {
  auto [luma, chroma] = ijg_base_tables();
  CHECK(scale_qtable(luma, 50) == luma);
  CHECK(scale_qtable(chroma, 50) == chroma);
  for (auto v : scale_qtable(luma, 100).entries) CHECK(v == 1);
  CHECK(scale_qtable(luma, 10).at(0, 0) == 80);
  CHECK_THROWS_AS(scale_qtable(luma, 0), std::out_of_range);
  CHECK_THROWS_AS(scale_qtable(luma, 101), std::out_of_range);
  for (const auto& base : {luma, chroma}) {
    auto prev = scale_qtable(base, 1);
    for (int qf = 2; qf <= 100; ++qf) {
      auto cur = scale_qtable(base, qf);
      for (std::size_t i = 0; i < 64; ++i) {
        REQUIRE(cur.entries[i] <= prev.entries[i]);
        REQUIRE(cur.entries[i] >= 1);
        REQUIRE(cur.entries[i] <= 255);
      }
      prev = cur;
    }
  }
}

TEST_CASE("scaled tables equal the reference encoder at every quality") {
  for (int qf = 1; qf <= 100; ++qf) {
    const auto ref = testing::reference_tables(qf);
    auto [l, c] = ijg_tables(qf);
    for (std::size_t i = 0; i < 64; ++i) {
      REQUIRE(l.entries[i] == ref[0][i]);
      REQUIRE(c.entries[i] == ref[1][i]);
    }
  }
}

TEST_CASE("zigzag order agrees with a diagonal walk and inverts") {
  const auto walk = testing::zigzag_by_walk();
  REQUIRE(walk.size() == 64);
  for (std::size_t k = 0; k < 64; ++k) CHECK(kZigzagToNatural[k] == walk[k]);
  std::array<std::uint16_t, 64> nat{};
  for (std::size_t i = 0; i < 64; ++i) nat[i] = static_cast<std::uint16_t>(i * 3 + 1);
  CHECK(from_zigzag(to_zigzag(nat)) == nat);
  CHECK(to_zigzag(from_zigzag(nat)) == nat);
}

TEST_CASE("quantization map tiling law") {
  auto [luma, chroma] = ijg_tables(30);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{10, 10}, {16, 16}, {13, 21}}) {
    auto qm = build_qmap(w, h, luma, chroma);
    REQUIRE(qm.planes() == 2);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        REQUIRE(qm.at(y, x, 0) == luma.at(int(y % 8), int(x % 8)));
        REQUIRE(qm.at(y, x, 1) == chroma.at(int(y % 8), int(x % 8)));
      }
  }
  auto qm = build_qmap(10, 10, luma, std::nullopt);
  CHECK(qm.planes() == 1);
  CHECK(qm.at(9, 9, 0) == luma.at(1, 1));
  const auto norm = qm.normalized();
  CHECK(norm[0] == doctest::Approx(luma.at(0, 0) / 255.0));
  for (float v : norm) CHECK((v > 0.0f && v <= 1.0f));
}

TEST_CASE("padding to block multiples replicates edges and unpads exactly") {
  auto img16 = testing::random_image(16, 16, ColorSpace::Rgb, 1);
  auto p16 = pad_to_block_multiple(img16);
  CHECK(p16.image == img16);

  auto img = testing::random_image(9, 8, ColorSpace::Gray, 2);
  auto p = pad_to_block_multiple(img);
  REQUIRE(p.image.height() == 16);
  REQUIRE(p.image.width() == 8);
  for (std::size_t y = 9; y < 16; ++y)
    for (std::size_t x = 0; x < 8; ++x) CHECK(p.image.at(y, x) == img.at(8, x));
  CHECK(unpad(p) == img);

  for (std::uint64_t s = 0; s < 5; ++s) {
    auto r = testing::random_image(5 + s * 7, 3 + s * 5, ColorSpace::Rgb, s);
    auto pr = pad_to_block_multiple(r);
    CHECK(pr.image.height() % 8 == 0);
    CHECK(pr.image.width() % 8 == 0);
    CHECK(unpad(pr) == r);
  }
}

TEST_CASE("DQT parsing of a constant table and error paths") {
  std::vector<std::uint8_t> seg{0xFF, 0xDB, 0x00, 0x43, 0x00};
  seg.insert(seg.end(), 64, 0x10);
  auto tables = parse_dqt_segment(seg);
  REQUIRE(tables.size() == 1);
  CHECK(tables[0].table_id == 0);
  CHECK(tables[0].precision_bits == 8);
  for (auto v : tables[0].entries) CHECK(v == 16);

  std::vector<std::uint8_t> trunc{0xFF, 0xD8, 0xFF, 0xDB, 0x00, 0x43};
  CHECK_THROWS_WITH_AS(parse_jpeg_metadata(trunc), doctest::Contains("truncated segment"), JpegParseError);
  CHECK_THROWS_WITH_AS(parse_jpeg_metadata(std::vector<std::uint8_t>{0x00, 0x01}), doctest::Contains("SOI"),
                       JpegParseError);

  auto bad_precision = seg;
  bad_precision[4] = 0x20;
  CHECK_THROWS_WITH_AS(parse_dqt_segment(bad_precision), doctest::Contains("precision"), JpegParseError);
  auto bad_id = seg;
  bad_id[4] = 0x04;
  CHECK_THROWS_WITH_AS(parse_dqt_segment(bad_id), doctest::Contains("table id"), JpegParseError);
}

TEST_CASE("DQT and SOF serialize and parse back") {
  JpegMetadata meta;
  meta.width = 123;
  meta.height = 45;
  meta.frame_marker = 0xC2;
  auto [l, c] = ijg_tables(37);
  QuantTable wide = scale_qtable(l, 3);
  wide.precision_bits = 16;
  wide.table_id = 2;
  wide.entries[5] = 1000;
  meta.tables = {{0, l}, {1, c}, {2, wide}};
  meta.components = {{1, 2, 2, 0}, {2, 1, 1, 1}, {3, 1, 1, 2}};
  const auto parsed = parse_jpeg_metadata(serialize_header(meta));
  CHECK(parsed.width == 123);
  CHECK(parsed.height == 45);
  CHECK(parsed.progressive());
  REQUIRE(parsed.tables.size() == 3);
  CHECK(parsed.tables.at(0) == l);
  CHECK(parsed.tables.at(1) == c);
  CHECK(parsed.tables.at(2) == wide);
  REQUIRE(parsed.components.size() == 3);
  CHECK(parsed.components[0].h_sampling == 2);
  CHECK(parsed.components[2].table_id == 2);

  // Every valid single table survives a DQT round trip.
  for (int qf : {1, 7, 50, 93, 100}) {
    for (const auto& t : {scale_qtable(l, qf), scale_qtable(c, qf)}) {
      const std::vector<QuantTable> one{t};
      const auto back = parse_dqt_segment(serialize_dqt(one));
      REQUIRE(back.size() == 1);
      CHECK(back[0] == t);
    }
  }
}

TEST_CASE("metadata from reference-encoder files") {
  const auto img = testing::natural_rgb();
  for (int qf : {10, 25, 50, 75, 95}) {
    for (bool progressive : {false, true}) {
      const auto meta = parse_jpeg_metadata(testing::reference_jpeg(img, qf, progressive));
      CHECK(meta.width == img.width());
      CHECK(meta.height == img.height());
      CHECK(meta.progressive() == progressive);
      auto [l, c] = meta.luma_chroma();
      auto [el, ec] = ijg_tables(qf);
      CHECK(l == el);
      REQUIRE(c.has_value());
      CHECK(*c == ec);
    }
  }
  const auto gray = parse_jpeg_metadata(testing::reference_jpeg(testing::natural_gray(), 50));
  CHECK(gray.components.size() == 1);
  CHECK_FALSE(gray.luma_chroma().second.has_value());
  CHECK(gray.luma_chroma().first == ijg_base_tables().first);
}

TEST_CASE("parser rejects streams missing structure") {
  // SOI + DQT then EOI without a frame header.
  auto [l, c] = ijg_tables(50);
  const std::vector<QuantTable> ts{l};
  std::vector<std::uint8_t> s{0xFF, 0xD8};
  auto dqt = serialize_dqt(ts);
  s.insert(s.end(), dqt.begin(), dqt.end());
  auto no_end = s;
  CHECK_THROWS_AS(parse_jpeg_metadata(no_end), JpegParseError);
  s.push_back(0xFF);
  s.push_back(0xD9);
  CHECK_THROWS_WITH_AS(parse_jpeg_metadata(s), doctest::Contains("SOF"), JpegParseError);
}
