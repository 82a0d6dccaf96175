#pragma once

#include <filesystem>
#include <stdexcept>

#include "qgcn/image.hpp"

namespace qgcn::sim {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// PNG (any bit depth/palette; alpha dropped) or binary PPM/PGM (P6/P5, maxval 255).
// Format is detected from the file signature.
Image8 read_image(const std::filesystem::path& path);

// Format chosen by extension: .png, .ppm, .pgm (.pnm picks by channel count).
void write_image(const std::filesystem::path& path, const Image8& img);

Image8 read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image8& img);
Image8 read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const Image8& img);

}  // namespace qgcn::sim
