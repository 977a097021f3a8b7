#pragma once

// Raw lossless raster: "FSIM" | u32 H | u32 W | u32 C | C planes of H*W f32,
// all little-endian.

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <vector>

#include "fsg/core.hpp"

namespace fsg::io {

inline std::vector<std::uint8_t> encode_fsim(const Image& img) {
  std::vector<std::uint8_t> b{'F', 'S', 'I', 'M'};
  auto u32 = [&](std::uint32_t v) {
    for (int k = 0; k < 4; ++k) b.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  };
  u32(static_cast<std::uint32_t>(img.height()));
  u32(static_cast<std::uint32_t>(img.width()));
  u32(static_cast<std::uint32_t>(img.channels()));
  for (std::size_t c = 0; c < img.channels(); ++c)
    for (std::size_t i = 0; i < img.height(); ++i)
      for (std::size_t j = 0; j < img.width(); ++j) {
        const float f = static_cast<float>(img.at(i, j, c));
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        u32(bits);
      }
  return b;
}

inline Image decode_fsim(std::span<const std::uint8_t> b, const std::string& what = "FSIM data") {
  auto u32 = [&](std::size_t off) {
    return std::uint32_t{b[off]} | std::uint32_t{b[off + 1]} << 8 | std::uint32_t{b[off + 2]} << 16 |
           std::uint32_t{b[off + 3]} << 24;
  };
  if (b.size() < 16 || std::memcmp(b.data(), "FSIM", 4) != 0) throw IoError(what + ": not an FSIM raster");
  const std::size_t h = u32(4), w = u32(8), c = u32(12);
  if (h == 0 || w == 0 || (c != 1 && c != 3) || h > 65536 || w > 65536) throw IoError(what + ": bad FSIM dimensions");
  if (b.size() != 16 + 4 * h * w * c) throw IoError(what + ": FSIM payload length mismatch");
  Image img(h, w, c);
  std::size_t off = 16;
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j, off += 4) {
        const std::uint32_t bits = u32(off);
        float f;
        std::memcpy(&f, &bits, 4);
        img.at(i, j, ch) = f;
      }
  return img;
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& p, std::span<const std::uint8_t> b) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) throw IoError("write failed for " + p.string());
}

inline Image load_fsim(const std::filesystem::path& p) { return decode_fsim(read_bytes(p), p.string()); }
inline void save_fsim(const std::filesystem::path& p, const Image& img) { write_bytes(p, encode_fsim(img)); }

}  // namespace fsg::io
