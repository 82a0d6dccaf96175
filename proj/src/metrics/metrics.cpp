#include "qgcn/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace qgcn::metrics {
namespace {

constexpr double kPeak = 255.0;

struct PlaneF {
  std::size_t h = 0, w = 0;
  std::vector<double> v;
  double at(std::size_t y, std::size_t x) const { return v[y * w + x]; }
};

void require_same(const Image8& a, const Image8& b, const char* what) {
  if (!a.same_geometry(b)) throw MetricError(std::string(what) + ": image shapes differ");
}

std::vector<PlaneF> planes_of(const Image8& img, Channels channels) {
  if (channels == Channels::Luma) return {PlaneF{img.height(), img.width(), luma_plane(img)}};
  std::vector<PlaneF> out;
  for (std::size_t c = 0; c < img.channels(); ++c) {
    PlaneF p{img.height(), img.width(), std::vector<double>(img.height() * img.width())};
    for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] = img.pixels()[i * img.channels() + c];
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<double> gaussian_taps() {
  std::vector<double> g(11);
  double sum = 0;
  for (int i = 0; i < 11; ++i) {
    const double d = i - 5;
    g[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    sum += g[static_cast<std::size_t>(i)];
  }
  for (auto& v : g) v /= sum;
  return g;
}

// 'valid' separable filtering of a plane with the 11-tap window.
PlaneF filter_valid(const PlaneF& p, const std::vector<double>& g) {
  const std::size_t k = g.size();
  PlaneF tmp{p.h, p.w - k + 1, std::vector<double>(p.h * (p.w - k + 1))};
  for (std::size_t y = 0; y < tmp.h; ++y) {
    for (std::size_t x = 0; x < tmp.w; ++x) {
      double s = 0;
      for (std::size_t i = 0; i < k; ++i) s += g[i] * p.at(y, x + i);
      tmp.v[y * tmp.w + x] = s;
    }
  }
  PlaneF out{p.h - k + 1, tmp.w, std::vector<double>((p.h - k + 1) * tmp.w)};
  for (std::size_t y = 0; y < out.h; ++y) {
    for (std::size_t x = 0; x < out.w; ++x) {
      double s = 0;
      for (std::size_t i = 0; i < k; ++i) s += g[i] * tmp.at(y + i, x);
      out.v[y * out.w + x] = s;
    }
  }
  return out;
}

double ssim_plane(const PlaneF& a, const PlaneF& b) {
  static const std::vector<double> g = gaussian_taps();
  const double c1 = (0.01 * kPeak) * (0.01 * kPeak);
  const double c2 = (0.03 * kPeak) * (0.03 * kPeak);
  PlaneF aa = a, bb = b, ab = a;
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    aa.v[i] = a.v[i] * a.v[i];
    bb.v[i] = b.v[i] * b.v[i];
    ab.v[i] = a.v[i] * b.v[i];
  }
  const PlaneF mu_a = filter_valid(a, g), mu_b = filter_valid(b, g);
  const PlaneF e_aa = filter_valid(aa, g), e_bb = filter_valid(bb, g), e_ab = filter_valid(ab, g);
  double sum = 0;
  for (std::size_t i = 0; i < mu_a.v.size(); ++i) {
    const double ma = mu_a.v[i], mb = mu_b.v[i];
    const double va = e_aa.v[i] - ma * ma, vb = e_bb.v[i] - mb * mb, cov = e_ab.v[i] - ma * mb;
    sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return sum / static_cast<double>(mu_a.v.size());
}

}  // namespace

double mse(const Image8& ref, const Image8& test, Channels channels) {
  require_same(ref, test, "mse");
  if (channels == Channels::All) {
    double s = 0;
    const auto a = ref.pixels(), b = test.pixels();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = double(a[i]) - double(b[i]);
      s += d * d;
    }
    return s / static_cast<double>(a.size());
  }
  const auto a = luma_plane(ref), b = luma_plane(test);
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double psnr(const Image8& ref, const Image8& test, Channels channels) {
  const double m = mse(ref, test, channels);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(kPeak * kPeak / m);
}

double ssim(const Image8& ref, const Image8& test, Channels channels) {
  require_same(ref, test, "ssim");
  if (ref.height() < 11 || ref.width() < 11) throw MetricError("ssim: image smaller than the 11x11 window");
  const auto pa = planes_of(ref, channels), pb = planes_of(test, channels);
  double s = 0;
  for (std::size_t c = 0; c < pa.size(); ++c) s += ssim_plane(pa[c], pb[c]);
  return s / static_cast<double>(pa.size());
}

double blocking_effect_factor(const Image8& test) {
  constexpr std::size_t B = 8;
  const std::size_t h = test.height(), w = test.width();
  if (h < 2 * B || w < 2 * B) throw MetricError("psnr_b: image extents must be at least 16");
  const auto y = luma_plane(test);
  auto px = [&](std::size_t r, std::size_t c) { return y[r * w + c]; };

  double sum_b = 0, sum_bc = 0;
  std::size_t n_b = 0, n_bc = 0;
  // Horizontal neighbours (c, c+1); a pair straddles a block edge when c+1 is a multiple of B.
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c + 1 < w; ++c) {
      const double d = px(r, c) - px(r, c + 1);
      if ((c + 1) % B == 0) {
        sum_b += d * d;
        ++n_b;
      } else {
        sum_bc += d * d;
        ++n_bc;
      }
    }
  }
  for (std::size_t r = 0; r + 1 < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double d = px(r, c) - px(r + 1, c);
      if ((r + 1) % B == 0) {
        sum_b += d * d;
        ++n_b;
      } else {
        sum_bc += d * d;
        ++n_bc;
      }
    }
  }
  const double d_b = sum_b / static_cast<double>(n_b);
  const double d_bc = sum_bc / static_cast<double>(n_bc);
  if (d_b <= d_bc) return 0.0;
  const double eta = std::log2(double(B)) / std::log2(double(std::min(h, w)));
  return eta * (d_b - d_bc);
}

double psnr_b(const Image8& ref, const Image8& test, Channels channels) {
  require_same(ref, test, "psnr_b");
  const double bef = blocking_effect_factor(test);
  const double m = mse(ref, test, channels) + bef;
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(kPeak * kPeak / m);
}

double ipsnr(const Image8& ref, const Image8& degraded, const Image8& restored, Channels channels) {
  require_same(ref, degraded, "ipsnr");
  require_same(ref, restored, "ipsnr");
  if (degraded == restored) return 0.0;
  return psnr(ref, restored, channels) - psnr(ref, degraded, channels);
}

QualityReport evaluate(const Image8& ref, const Image8& test, const Image8* degraded, Channels channels) {
  QualityReport r;
  r.psnr = psnr(ref, test, channels);
  r.ssim = ssim(ref, test, channels);
  r.psnr_b = psnr_b(ref, test, channels);
  if (degraded) r.ipsnr = ipsnr(ref, *degraded, test, channels);
  return r;
}

std::string format_db(double db) {
  if (std::isinf(db)) db = db > 0 ? kPsnrSentinel : -kPsnrSentinel;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", db);
  return buf;
}

}  // namespace qgcn::metrics
