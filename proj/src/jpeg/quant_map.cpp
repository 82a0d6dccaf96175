#include "qgcn/jpeg/quant_map.hpp"

#include <stdexcept>

namespace qgcn::jpeg {

QuantMap::QuantMap(std::size_t height, std::size_t width, std::vector<QuantTable> sources)
    : height_(height), width_(width), sources_(std::move(sources)) {
  if (height == 0 || width == 0) throw std::invalid_argument("quantization map extents must be at least 1x1");
  if (sources_.empty() || sources_.size() > 2) throw std::invalid_argument("quantization map needs 1 or 2 tables");
  values_.resize(sources_.size() * height_ * width_);
  for (std::size_t k = 0; k < sources_.size(); ++k) {
    for (std::size_t y = 0; y < height_; ++y) {
      float* row = values_.data() + (k * height_ + y) * width_;
      for (std::size_t x = 0; x < width_; ++x) {
        row[x] = static_cast<float>(sources_[k].at(static_cast<int>(y % 8), static_cast<int>(x % 8)));
      }
    }
  }
}

std::vector<float> QuantMap::normalized() const {
  std::vector<float> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(values_[i] / kQuantMapScale);
  return out;
}

QuantMap build_qmap(std::size_t width, std::size_t height, const QuantTable& luma,
                    const std::optional<QuantTable>& chroma) {
  std::vector<QuantTable> sources{luma};
  if (chroma) sources.push_back(*chroma);
  return QuantMap(height, width, std::move(sources));
}

}  // namespace qgcn::jpeg
