#include <cmath>
#include <random>

#include "doctest.h"
#include "qgcn/jpeg/quant_table.hpp"
#include "qgcn/metrics/metrics.hpp"
#include "qgcn/sim/color.hpp"
#include "qgcn/sim/compress.hpp"
#include "qgcn/sim/dct.hpp"
#include "test_support.hpp"

using namespace qgcn;
using namespace qgcn::sim;

TEST_CASE("YCbCr conversion white/black points and round trip") {
  Image8 px(1, 2, ColorSpace::Rgb);
  for (int c = 0; c < 3; ++c) px.at(0, 0, c) = 255, px.at(0, 1, c) = 0;
  auto ycc = rgb_to_ycbcr(px);
  CHECK(ycc.colorspace() == ColorSpace::YCbCr);
  CHECK(int(ycc.at(0, 0, 0)) == 255);
  CHECK(int(ycc.at(0, 0, 1)) == 128);
  CHECK(int(ycc.at(0, 0, 2)) == 128);
  CHECK(int(ycc.at(0, 1, 0)) == 0);
  CHECK(int(ycc.at(0, 1, 1)) == 128);
  CHECK(int(ycc.at(0, 1, 2)) == 128);
  CHECK_THROWS(ycbcr_to_rgb(px));
  CHECK_THROWS(rgb_to_ycbcr(ycc));

  const std::size_t steps = 256 / 17 + 1;
  Image8 all(steps * steps, steps, ColorSpace::Rgb);
  for (std::size_t r = 0; r < steps; ++r)
    for (std::size_t g = 0; g < steps; ++g)
      for (std::size_t b = 0; b < steps; ++b) {
        all.at(r * steps + g, b, 0) = std::uint8_t(std::min<std::size_t>(r * 17, 255));
        all.at(r * steps + g, b, 1) = std::uint8_t(std::min<std::size_t>(g * 17, 255));
        all.at(r * steps + g, b, 2) = std::uint8_t(std::min<std::size_t>(b * 17, 255));
      }
  auto back = ycbcr_to_rgb(rgb_to_ycbcr(all));
  int worst = 0;
  for (std::size_t i = 0; i < all.pixels().size(); ++i) worst = std::max(worst, std::abs(int(all.pixels()[i]) - int(back.pixels()[i])));
  CHECK(worst <= 1);
}

namespace {

// Textbook 2-D DCT-II with 1/4·C(u)C(v) scaling, evaluated term by term.
Block direct_dct(const Block& px) {
  Block out{};
  const double pi = std::acos(-1.0);
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) {
      double s = 0;
      for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y)
          s += (px[std::size_t(x * 8 + y)] - 128.0) * std::cos((2 * x + 1) * u * pi / 16) *
               std::cos((2 * y + 1) * v * pi / 16);
      const double cu = u == 0 ? 1 / std::sqrt(2.0) : 1, cv = v == 0 ? 1 / std::sqrt(2.0) : 1;
      out[std::size_t(u * 8 + v)] = 0.25 * cu * cv * s;
    }
  return out;
}

}  // namespace

TEST_CASE("8x8 DCT closed forms, reference agreement and round trip") {
  Block flat;
  flat.fill(128.0);
  for (double c : fdct8x8(flat)) CHECK(std::abs(c) < 1e-12);
  flat.fill(255.0);
  auto dc = fdct8x8(flat);
  CHECK(dc[0] == doctest::Approx(1016.0).epsilon(1e-12));
  for (std::size_t i = 1; i < 64; ++i) CHECK(std::abs(dc[i]) < 1e-9);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 255);
  for (int t = 0; t < 20; ++t) {
    Block b;
    for (auto& v : b) v = u(rng);
    const auto coeffs = fdct8x8(b);
    const auto ref = direct_dct(b);
    for (std::size_t i = 0; i < 64; ++i) CHECK(coeffs[i] == doctest::Approx(ref[i]).epsilon(1e-9));
    const auto back = idct8x8(coeffs);
    double err = 0;
    for (std::size_t i = 0; i < 64; ++i) err = std::max(err, std::abs(back[i] - b[i]));
    CHECK(err < 1e-10);
  }
}

TEST_CASE("quantize_dequantize rounding") {
  jpeg::QuantTable ones;
  ones.entries.fill(1);
  Block c{};
  c[0] = 2.5;
  c[1] = -2.5;
  c[2] = 2.49;
  auto q = quantize_dequantize(c, ones);
  CHECK(q[0] == 3.0);
  CHECK(q[1] == -3.0);
  CHECK(q[2] == 2.0);

  jpeg::QuantTable sixteen;
  sixteen.entries.fill(16);
  Block d{};
  d[0] = 37;
  d[1] = 8;
  d[2] = -8;
  auto r = quantize_dequantize(d, sixteen);
  CHECK(r[0] == 32.0);
  CHECK(r[1] == 16.0);
  CHECK(r[2] == -16.0);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1000, 1000);
  auto [luma, chroma] = jpeg::ijg_tables(20);
  Block e;
  for (auto& v : e) v = u(rng);
  auto f = quantize_dequantize(e, luma);
  for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(f[i] - e[i]) <= luma.entries[i] / 2.0 + 1e-12);
}

TEST_CASE("compression simulator behaviour on a natural image") {
  const auto img = testing::natural_rgb();
  const auto hi = compress_simulate(img, 100, Subsampling::k444);
  CHECK(metrics::psnr(img, hi.image) > 45.0);

  double prev = INFINITY;
  for (int qf : {90, 70, 50, 30, 10}) {
    const double p = metrics::psnr(img, compress_simulate(img, qf).image);
    CHECK(p < prev);
    prev = p;
  }

  auto once = compress_simulate(img, 30);
  auto [l, c] = jpeg::ijg_tables(30);
  CHECK(once.luma == l);
  CHECK(once.chroma == c);
  CHECK(compress_simulate(img, 30).image == once.image);
  CHECK(metrics::psnr(img, compress_simulate(once.image, 30).image) <= metrics::psnr(img, once.image));
  CHECK_THROWS_AS(compress_simulate(img, 0), std::out_of_range);
  CHECK_THROWS_AS(compress_simulate(img, 101), std::out_of_range);
}

TEST_CASE("constant mid-grey images pass through unchanged") {
  for (int qf : {1, 10, 50, 100}) {
    Image8 grey(24, 40, ColorSpace::Rgb, 128);
    CHECK(compress_simulate(grey, qf).image == grey);
    Image8 g1(17, 9, ColorSpace::Gray, 128);
    CHECK(compress_simulate(g1, qf).image == g1);
  }
}

TEST_CASE("odd sizes are preserved and gray/color paths agree on grey content") {
  auto img = testing::random_image(13, 27, ColorSpace::Rgb, 5);
  auto out = compress_simulate(img, 40);
  CHECK(out.image.height() == 13);
  CHECK(out.image.width() == 27);

  const auto gray = testing::natural_gray();
  const auto small = crop(gray, 100, 100, 64, 72);
  Image8 rgb(small.height(), small.width(), ColorSpace::Rgb);
  for (std::size_t y = 0; y < small.height(); ++y)
    for (std::size_t x = 0; x < small.width(); ++x)
      for (int c = 0; c < 3; ++c) rgb.at(y, x, c) = small.at(y, x);
  for (int qf : {10, 50, 90}) {
    const auto g = compress_simulate(small, qf).image;
    const auto c = compress_simulate(rgb, qf, Subsampling::k444).image;
    int worst = 0;
    for (std::size_t y = 0; y < small.height(); ++y)
      for (std::size_t x = 0; x < small.width(); ++x)
        for (int ch = 0; ch < 3; ++ch) worst = std::max(worst, std::abs(int(g.at(y, x)) - int(c.at(y, x, ch))));
    CHECK(worst <= 1);
  }
}
