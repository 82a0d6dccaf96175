#include "qgcn/train/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace qgcn::train {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Round step (1, 2 or 5 × 10^k) giving roughly `target` ticks over `span`.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return (r < 1.5 ? 1 : r < 3.5 ? 2 : r < 7.5 ? 5 : 10) * mag;
}

}  // namespace

std::string render_line_plot(const std::vector<PlotSeries>& series, const PlotOptions& opts) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument("plot: non-finite point in " + s.label);
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) throw std::invalid_argument("plot: no points");
  if (x1 == x0) x0 -= 1, x1 += 1;
  if (y1 == y0) y0 -= 1, y1 += 1;
  const double ypad = 0.08 * (y1 - y0);
  y0 -= ypad, y1 += ypad;

  const double left = 64, right = 150, top = 36, bottom = 48;
  const double pw = opts.width - left - right, ph = opts.height - top - bottom;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\"" << opts.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opts.title.empty()) {
    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(opts.title) << "</text>\n";
  }
  o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = nice_step(x1 - x0, 8), ys = nice_step(y1 - y0, 6);
  for (double x = std::ceil(x0 / xs) * xs; x <= x1 + 1e-9; x += xs) {
    o << "<line x1=\"" << num(sx(x)) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(sx(x)) << "\" y2=\""
      << num(top + ph + 5) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << num(sx(x)) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">" << x
      << "</text>\n";
  }
  for (double y = std::ceil(y0 / ys) * ys; y <= y1 + 1e-9; y += ys) {
    const double yy = std::abs(y) < 1e-12 ? 0.0 : y;
    o << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(sy(y)) << "\" x2=\"" << num(left) << "\" y2=\""
      << num(sy(y)) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << num(left - 8) << "\" y=\"" << num(sy(y) + 4) << "\" text-anchor=\"end\">" << yy
      << "</text>\n";
  }
  if (y0 < 0 && y1 > 0) {
    o << "<line x1=\"" << num(left) << "\" y1=\"" << num(sy(0)) << "\" x2=\"" << num(left + pw) << "\" y2=\""
      << num(sy(0)) << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  }
  o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << opts.height - 10 << "\" text-anchor=\"middle\">"
    << escape(opts.x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(opts.y_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (auto [x, y] : s.points) o << num(sx(x)) << ',' << num(sy(y)) << ' ';
    o << "\"/>\n";
    for (auto [x, y] : s.points) {
      o << "<circle cx=\"" << num(sx(x)) << "\" cy=\"" << num(sy(y)) << "\" r=\"3\" fill=\"" << color << "\"/>";
    }
    const double ly = top + 14 + 18 * double(i);
    o << "\n<line x1=\"" << num(left + pw + 12) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(left + pw + 32)
      << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>";
    o << "<text x=\"" << num(left + pw + 38) << "\" y=\"" << num(ly) << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace qgcn::train
