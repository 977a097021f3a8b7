#pragma once

// 8-bit PNG through libpng. Link with PNG::PNG.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <vector>

#include <png.h>

#include "fsg/core.hpp"

namespace fsg::io {

namespace detail {
struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;
}  // namespace detail

/// Gray or RGB (alpha dropped, palettes expanded), scaled to [0, 1].
inline Image load_png(const std::filesystem::path& p) {
  detail::File f(std::fopen(p.c_str(), "rb"));
  if (!f) throw IoError("cannot open " + p.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialization failed");
  }
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 w = 0, h = 0;
  int channels = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(p.string() + ": not a readable PNG");
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int type = png_get_color_type(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png), png_set_strip_alpha(png);
  png_read_update_info(png, info);
  channels = png_get_channels(png, info);
  pixels.resize(static_cast<std::size_t>(w) * h * channels);
  rows.resize(h);
  for (png_uint_32 i = 0; i < h; ++i) rows[i] = pixels.data() + static_cast<std::size_t>(i) * w * channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  if (channels != 1 && channels != 3) throw IoError(p.string() + ": unsupported PNG layout");
  Image img(h, w, static_cast<std::size_t>(channels));
  for (std::size_t k = 0; k < pixels.size(); ++k) img.data()[k] = pixels[k] / 255.0;
  return img;
}

/// Raw 8-bit samples (no scaling), for label rasters.
inline std::vector<std::uint8_t> png_bytes(const Image& img) {
  std::vector<std::uint8_t> b(img.size());
  for (std::size_t k = 0; k < b.size(); ++k)
    b[k] = static_cast<std::uint8_t>(std::lround(std::clamp(img.data()[k], 0.0, 1.0) * 255.0));
  return b;
}

inline void write_png_raw(const std::filesystem::path& p, std::span<const std::uint8_t> b, std::size_t h,
                          std::size_t w, std::size_t channels) {
  detail::File f(std::fopen(p.c_str(), "wb"));
  if (!f) throw IoError("cannot write " + p.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialization failed");
  }
  std::vector<png_bytep> rows(h);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encoding failed for " + p.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t i = 0; i < h; ++i) rows[i] = const_cast<png_bytep>(b.data() + i * w * channels);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

inline void save_png(const std::filesystem::path& p, const Image& img) {
  write_png_raw(p, png_bytes(img), img.height(), img.width(), img.channels());
}

}  // namespace fsg::io
