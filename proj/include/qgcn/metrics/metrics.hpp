#pragma once

#include <optional>
#include <string>

#include "qgcn/image.hpp"

namespace qgcn::metrics {

// Stand-in for +∞ PSNR in tabular output.
inline constexpr double kPsnrSentinel = 99.99;

// Which samples a metric runs over: every channel jointly, or the
// BT.601 luminance plane only.
enum class Channels { All, Luma };

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double mse(const Image8& ref, const Image8& test, Channels channels = Channels::All);

// 10·log10(255² / MSE); +∞ for identical images.
double psnr(const Image8& ref, const Image8& test, Channels channels = Channels::All);

// Mean SSIM over the valid region, 11×11 Gaussian window σ = 1.5,
// K1 = 0.01, K2 = 0.03, L = 255. Color images average the per-channel means.
double ssim(const Image8& ref, const Image8& test, Channels channels = Channels::All);

// Blocking-effect factor of `test` on its luminance plane for block size 8.
// η·(D_B − D_Bᶜ) with η = log2(8)/log2(min(H,W)) when D_B > D_Bᶜ, else 0.
double blocking_effect_factor(const Image8& test);

// 10·log10(255² / (MSE + BEF(test))). Never exceeds psnr(ref, test).
double psnr_b(const Image8& ref, const Image8& test, Channels channels = Channels::All);

// psnr(ref, restored) − psnr(ref, degraded); exactly 0 when restored == degraded.
double ipsnr(const Image8& ref, const Image8& degraded, const Image8& restored,
             Channels channels = Channels::All);

struct QualityReport {
  double psnr = 0;
  double ssim = 0;
  double psnr_b = 0;
  std::optional<double> ipsnr;
};

// Scores `test` against `ref`; ipsnr is filled when the pre-restoration
// `degraded` image is supplied.
QualityReport evaluate(const Image8& ref, const Image8& test, const Image8* degraded = nullptr,
                       Channels channels = Channels::All);

// Fixed 4-decimal text; +∞ prints as the sentinel.
std::string format_db(double db);

}  // namespace qgcn::metrics
