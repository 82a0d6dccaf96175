#include "qgcn/sim/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace qgcn::sim {
namespace {

std::string lower_ext(const std::filesystem::path& p) {
  std::string e = p.extension().string();
  for (auto& ch : e) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return e;
}

// Next whitespace-separated token of a PNM header, skipping '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

}  // namespace

Image8 read_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    throw ImageIoError("cannot read PNG '" + path.string() + "': " + png.message);
  }
  const bool color = png.format & PNG_FORMAT_FLAG_COLOR;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Image8 img(png.height, png.width, color ? ColorSpace::Rgb : ColorSpace::Gray);
  // Alpha is composited onto black by the simplified API when the output format has none.
  if (!png_image_finish_read(&png, nullptr, img.pixels().data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw ImageIoError("cannot decode PNG '" + path.string() + "': " + msg);
  }
  return img;
}

void write_png(const std::filesystem::path& path, const Image8& img) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width());
  png.height = static_cast<png_uint_32>(img.height());
  png.format = img.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, img.pixels().data(), 0, nullptr)) {
    throw ImageIoError("cannot write PNG '" + path.string() + "': " + png.message);
  }
}

Image8 read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("cannot open '" + path.string() + "'");
  const std::string magic = pnm_token(in);
  if (magic != "P5" && magic != "P6") throw ImageIoError("'" + path.string() + "' is not a binary PGM/PPM");
  std::size_t w = 0, h = 0, maxval = 0;
  try {
    w = std::stoul(pnm_token(in));
    h = std::stoul(pnm_token(in));
    maxval = std::stoul(pnm_token(in));
  } catch (const std::exception&) {
    throw ImageIoError("malformed PNM header in '" + path.string() + "'");
  }
  if (maxval != 255) throw ImageIoError("only maxval 255 PNM files are supported");
  Image8 img(h, w, magic == "P5" ? ColorSpace::Gray : ColorSpace::Rgb);
  in.read(reinterpret_cast<char*>(img.pixels().data()), static_cast<std::streamsize>(img.pixels().size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels().size())) {
    throw ImageIoError("truncated PNM payload in '" + path.string() + "'");
  }
  return img;
}

void write_pnm(const std::filesystem::path& path, const Image8& img) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ImageIoError("cannot open '" + path.string() + "' for writing");
  out << (img.channels() == 1 ? "P5" : "P6") << '\n' << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels().data()), static_cast<std::streamsize>(img.pixels().size()));
  if (!out) throw ImageIoError("write failed for '" + path.string() + "'");
}

Image8 read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("cannot open '" + path.string() + "'");
  char sig[8] = {};
  in.read(sig, 8);
  in.close();
  static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (std::memcmp(sig, png_sig, 8) == 0) return read_png(path);
  if (sig[0] == 'P' && (sig[1] == '5' || sig[1] == '6')) return read_pnm(path);
  throw ImageIoError("unsupported image format for '" + path.string() + "' (PNG, PGM or PPM expected)");
}

void write_image(const std::filesystem::path& path, const Image8& img) {
  const auto ext = lower_ext(path);
  if (ext == ".png") return write_png(path, img);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") {
    if ((ext == ".ppm" && img.channels() != 3) || (ext == ".pgm" && img.channels() != 1)) {
      throw ImageIoError("channel count does not match extension of '" + path.string() + "'");
    }
    return write_pnm(path, img);
  }
  throw ImageIoError("unsupported output extension for '" + path.string() + "'");
}

}  // namespace qgcn::sim
