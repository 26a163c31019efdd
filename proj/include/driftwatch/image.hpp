#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace driftwatch {

/// 8-bit single-channel raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  bool empty() const { return width <= 0 || height <= 0; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

struct ImageSize {
  int width = 0;
  int height = 0;
};

// PNG codec. Color inputs are converted to gray on read; output is 8-bit gray.
GrayImage read_png(const std::filesystem::path& path);
GrayImage decode_png(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_png(const GrayImage& image);
void write_png(const std::filesystem::path& path, const GrayImage& image);

// Reads only the PNG header; throws InputError if the file is not a PNG.
ImageSize read_png_size(const std::filesystem::path& path);

}  // namespace driftwatch
