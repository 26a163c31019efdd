#include "driftwatch/image.hpp"

#include <png.h>

#include <array>
#include <cstring>
#include <fstream>

#include "driftwatch/atomic_file.hpp"
#include "driftwatch/errors.hpp"

namespace driftwatch {

namespace {

GrayImage finish_read(png_image& img, const std::string& what) {
  img.format = PNG_FORMAT_GRAY;
  GrayImage out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr) == 0) {
    std::string msg = img.message;
    png_image_free(&img);
    throw InputError("cannot decode PNG " + what + ": " + msg);
  }
  return out;
}

}  // namespace

GrayImage read_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&img, path.c_str()) == 0) {
    std::string msg = img.message;
    png_image_free(&img);
    throw InputError("cannot read PNG " + path.string() + ": " + msg);
  }
  return finish_read(img, path.string());
}

GrayImage decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()) == 0) {
    std::string msg = img.message;
    png_image_free(&img);
    throw InputError("cannot decode PNG buffer: " + msg);
  }
  return finish_read(img, "buffer");
}

std::vector<std::uint8_t> encode_png(const GrayImage& image) {
  if (image.empty()) {
    throw InputError("cannot encode an empty image");
  }
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_GRAY;

  png_alloc_size_t size = 0;
  if (png_image_write_get_memory_size(img, size, 0, image.pixels.data(), 0, nullptr) == 0) {
    throw InputError(std::string("cannot size PNG: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (png_image_write_to_memory(&img, out.data(), &size, 0, image.pixels.data(), 0, nullptr) == 0) {
    throw InputError(std::string("cannot encode PNG: ") + img.message);
  }
  out.resize(size);
  return out;
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  write_file_atomic(path, encode_png(image));
}

ImageSize read_png_size(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open image " + path.string());
  }
  // Signature (8) + IHDR length (4) + "IHDR" (4) + width (4) + height (4).
  std::array<unsigned char, 24> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (in.gcount() != static_cast<std::streamsize>(header.size()) || png_sig_cmp(header.data(), 0, 8) != 0 ||
      std::memcmp(header.data() + 12, "IHDR", 4) != 0) {
    throw InputError("not a PNG file: " + path.string());
  }
  auto be32 = [&](std::size_t off) {
    return static_cast<int>((header[off] << 24) | (header[off + 1] << 16) | (header[off + 2] << 8) | header[off + 3]);
  };
  ImageSize size{be32(16), be32(20)};
  if (size.width <= 0 || size.height <= 0) {
    throw InputError("PNG has zero size: " + path.string());
  }
  return size;
}

}  // namespace driftwatch
