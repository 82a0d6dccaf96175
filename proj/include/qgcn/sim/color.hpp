#pragma once

#include "qgcn/image.hpp"

namespace qgcn::sim {

// Full-range BT.601 as used by JFIF. Results are rounded half away from zero
// and clamped to [0,255]. Throw std::invalid_argument on a wrong input tag.
Image8 rgb_to_ycbcr(const Image8& rgb);
Image8 ycbcr_to_rgb(const Image8& ycc);

}  // namespace qgcn::sim
