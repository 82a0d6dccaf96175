#include "qgcn/sim/dct.hpp"

#include <cmath>
#include <numbers>

namespace qgcn::sim {
namespace {

// basis[u][x] = C(u)/2 · cos((2x+1)uπ/16); orthonormal rows.
struct Basis {
  double m[8][8];
  Basis() {
    for (int u = 0; u < 8; ++u) {
      const double cu = u == 0 ? std::numbers::sqrt2 / 2.0 : 1.0;
      for (int x = 0; x < 8; ++x) m[u][x] = 0.5 * cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
    }
  }
};

const Basis& basis() {
  static const Basis b;
  return b;
}

}  // namespace

Block fdct8x8(const Block& samples) {
  const auto& b = basis().m;
  Block tmp{};
  // rows: tmp[y][u] = Σx b[u][x]·(s[y][x] − 128)
  for (int y = 0; y < 8; ++y) {
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int x = 0; x < 8; ++x) s += b[u][x] * (samples[y * 8 + x] - 128.0);
      tmp[y * 8 + u] = s;
    }
  }
  Block out{};
  for (int v = 0; v < 8; ++v) {
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int y = 0; y < 8; ++y) s += b[v][y] * tmp[y * 8 + u];
      out[v * 8 + u] = s;
    }
  }
  return out;
}

Block idct8x8(const Block& coeffs) {
  const auto& b = basis().m;
  Block tmp{};
  for (int y = 0; y < 8; ++y) {
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int v = 0; v < 8; ++v) s += b[v][y] * coeffs[v * 8 + u];
      tmp[y * 8 + u] = s;
    }
  }
  Block out{};
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int u = 0; u < 8; ++u) s += b[u][x] * tmp[y * 8 + u];
      out[y * 8 + x] = s + 128.0;
    }
  }
  return out;
}

Block quantize_dequantize(const Block& coeffs, const jpeg::QuantTable& table) {
  Block out{};
  for (std::size_t i = 0; i < 64; ++i) {
    const double q = table.entries[i];
    out[i] = std::round(coeffs[i] / q) * q;
  }
  return out;
}

}  // namespace qgcn::sim
