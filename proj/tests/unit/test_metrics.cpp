#include <cmath>
#include <random>

#include "doctest.h"
#include "qgcn/metrics/metrics.hpp"
#include "qgcn/sim/compress.hpp"
#include "test_support.hpp"

using namespace qgcn;
using namespace qgcn::metrics;

namespace {

Image8 shifted(const Image8& img, int delta) {
  Image8 out = img;
  for (auto& p : out.pixels()) p = static_cast<std::uint8_t>(std::clamp(int(p) + delta, 0, 255));
  return out;
}

Image8 add_noise(const Image8& img, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, sigma);
  Image8 out = img;
  for (auto& p : out.pixels()) p = round_to_u8(p + n(rng));
  return out;
}

Image8 flip_h(const Image8& img) {
  Image8 out = img;
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x)
      for (std::size_t c = 0; c < img.channels(); ++c) out.at(y, img.width() - 1 - x, c) = img.at(y, x, c);
  return out;
}

// Blocking-effect factor written from the boundary/non-boundary pair counts
// N_HB = H(W/8 − 1), N_VB = W(H/8 − 1) for extents that are multiples of 8.
double bef_oracle(const std::vector<double>& y, std::size_t h, std::size_t w) {
  double db = 0, dbc = 0;
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t k = 1; k < w / 8; ++k) {
      const double d = y[r * w + 8 * k - 1] - y[r * w + 8 * k];
      db += d * d;
    }
  for (std::size_t c = 0; c < w; ++c)
    for (std::size_t k = 1; k < h / 8; ++k) {
      const double d = y[(8 * k - 1) * w + c] - y[8 * k * w + c];
      db += d * d;
    }
  double all = 0;
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c + 1 < w; ++c) all += std::pow(y[r * w + c] - y[r * w + c + 1], 2);
  for (std::size_t r = 0; r + 1 < h; ++r)
    for (std::size_t c = 0; c < w; ++c) all += std::pow(y[r * w + c] - y[(r + 1) * w + c], 2);
  dbc = all - db;
  const double nb = double(h * (w / 8 - 1) + w * (h / 8 - 1));
  const double nbc = double(h * (w - 1) + w * (h - 1)) - nb;
  const double mb = db / nb, mbc = dbc / nbc;
  return mb > mbc ? (3.0 / std::log2(double(std::min(h, w)))) * (mb - mbc) : 0.0;
}

}  // namespace

TEST_CASE("psnr closed forms") {
  const auto img = testing::random_image(20, 30, ColorSpace::Rgb, 1);
  Image8 mid(20, 30, ColorSpace::Rgb, 100);
  CHECK(std::isinf(psnr(img, img)));
  CHECK(psnr(mid, shifted(mid, 1)) == doctest::Approx(20 * std::log10(255.0)).epsilon(1e-12));
  CHECK(psnr(Image8(8, 8, ColorSpace::Gray, 0), Image8(8, 8, ColorSpace::Gray, 255)) == doctest::Approx(0.0));
  CHECK(psnr(img, shifted(img, 3)) == doctest::Approx(psnr(shifted(img, 3), img)));
  CHECK_THROWS_AS(psnr(img, Image8(20, 31, ColorSpace::Rgb)), MetricError);
  CHECK(format_db(INFINITY) == "99.9900");
}

TEST_CASE("ssim basics") {
  const auto img = testing::natural_gray();
  CHECK(ssim(img, img) == doctest::Approx(1.0).epsilon(1e-12));
  Image8 inv = img;
  for (auto& p : inv.pixels()) p = static_cast<std::uint8_t>(255 - p);
  CHECK(ssim(img, inv) < 0.0);
  const double s5 = ssim(img, add_noise(img, 5, 1));
  const double s10 = ssim(img, add_noise(img, 10, 2));
  CHECK(s10 > 0.0);
  CHECK(s10 < 1.0);
  CHECK(s10 < s5);
  const auto noisy = add_noise(img, 7, 3);
  CHECK(ssim(img, noisy) == doctest::Approx(ssim(noisy, img)).epsilon(1e-12));
  CHECK_THROWS_AS(ssim(Image8(10, 40, ColorSpace::Gray), Image8(10, 40, ColorSpace::Gray)), MetricError);
  const auto rgb = testing::natural_rgb();
  CHECK(ssim(rgb, rgb) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("blocking effect factor matches the pair-count formula") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto img = sim::compress_simulate(crop(testing::natural_gray(), 64 * s, 32, 48, 64), 10).image;
    const auto y = luma_plane(img);
    CHECK(blocking_effect_factor(img) == doctest::Approx(bef_oracle(y, 48, 64)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(blocking_effect_factor(Image8(15, 40, ColorSpace::Gray)), MetricError);
}

TEST_CASE("psnr_b properties") {
  Image8 flat(32, 32, ColorSpace::Rgb, 90);
  const auto ref = testing::random_image(32, 32, ColorSpace::Rgb, 4);
  CHECK(psnr_b(ref, flat) == doctest::Approx(psnr(ref, flat)).epsilon(1e-12));

  const auto natural = crop(testing::natural_rgb(), 40, 40, 128, 128);
  const auto jpeg10 = sim::compress_simulate(natural, 10).image;
  // Smooth the two pixels on each side of every block edge with a 3x3 box.
  Image8 deblocked = jpeg10;
  for (std::size_t y = 1; y + 1 < 128; ++y)
    for (std::size_t x = 1; x + 1 < 128; ++x) {
      const bool edge = (x % 8 == 7 || x % 8 == 0 || y % 8 == 7 || y % 8 == 0);
      if (!edge) continue;
      for (std::size_t c = 0; c < 3; ++c) {
        int s = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) s += jpeg10.at(y + dy, x + dx, c);
        deblocked.at(y, x, c) = round_to_u8(s / 9.0);
      }
    }
  CHECK(psnr_b(natural, jpeg10) < psnr_b(natural, deblocked));
  CHECK(psnr_b(natural, jpeg10) <= psnr(natural, jpeg10));
  // Only the test image's block edges count, so swapping arguments changes the score.
  CHECK(psnr_b(natural, jpeg10) != doctest::Approx(psnr_b(jpeg10, natural)));
  CHECK_THROWS_AS(psnr_b(Image8(12, 12, ColorSpace::Gray), Image8(12, 12, ColorSpace::Gray)), MetricError);
}

TEST_CASE("ipsnr closed forms") {
  Image8 ref(16, 16, ColorSpace::Gray, 100);
  const auto d2 = shifted(ref, 2), d1 = shifted(ref, 1);
  CHECK(ipsnr(ref, d2, d2) == 0.0);
  CHECK(std::isinf(ipsnr(ref, d2, ref)));
  CHECK(std::abs(ipsnr(ref, d2, d1) - 20 * std::log10(2.0)) < 1e-6);
  const auto r = evaluate(ref, d1, &d2);
  REQUIRE(r.ipsnr.has_value());
  CHECK(*r.ipsnr == doctest::Approx(20 * std::log10(2.0)));
}

TEST_CASE("metrics are invariant under a shared horizontal flip") {
  const auto ref = crop(testing::natural_rgb(), 0, 0, 48, 64);
  const auto test = sim::compress_simulate(ref, 20).image;
  const auto fr = flip_h(ref), ft = flip_h(test);
  CHECK(psnr(fr, ft) == doctest::Approx(psnr(ref, test)).epsilon(1e-12));
  CHECK(ssim(fr, ft) == doctest::Approx(ssim(ref, test)).epsilon(1e-9));
  CHECK(psnr_b(fr, ft) == doctest::Approx(psnr_b(ref, test)).epsilon(1e-12));
}

TEST_CASE("luma channel mode scores the Y plane only") {
  const auto ref = crop(testing::natural_rgb(), 0, 0, 32, 32);
  Image8 test = ref;
  // Swap red and blue: luma changes little, joint RGB error is large.
  for (std::size_t y = 0; y < 32; ++y)
    for (std::size_t x = 0; x < 32; ++x) std::swap(test.at(y, x, 0), test.at(y, x, 2));
  CHECK(psnr(ref, test, Channels::Luma) > psnr(ref, test, Channels::All));
}
