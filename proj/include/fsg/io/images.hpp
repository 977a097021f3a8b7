#pragma once

// Rasters on disk, chosen by extension: .png (8-bit) or .fsim (f32).
// Label masks store 0 / 1 / 2 (background / face / hair) as sample values.

#include <filesystem>

#include "fsg/io/fsim.hpp"
#include "fsg/io/png.hpp"

namespace fsg::io {

inline bool is_png(const std::filesystem::path& p) { return p.extension() == ".png" || p.extension() == ".PNG"; }

inline Image load_image(const std::filesystem::path& p) {
  Image img = is_png(p) ? load_png(p) : load_fsim(p);
  if (img.channels() == 1) {
    Image rgb(img.height(), img.width(), 3);
    for (std::size_t k = 0; k < img.pixels(); ++k)
      for (std::size_t c = 0; c < 3; ++c) rgb.data()[k * 3 + c] = img.data()[k];
    img = std::move(rgb);
  }
  require_valid(img, p.string());
  return img;
}

inline void save_image(const std::filesystem::path& p, const Image& img) {
  if (is_png(p))
    save_png(p, img);
  else
    save_fsim(p, img);
}

inline SegMask load_mask(const std::filesystem::path& p) {
  const Image raw = is_png(p) ? load_png(p) : load_fsim(p);
  if (raw.channels() != 1) throw IoError(p.string() + ": masks are single-channel");
  const double scale = is_png(p) ? 255.0 : 1.0;
  SegMask m(raw.height(), raw.width());
  for (std::size_t k = 0; k < raw.pixels(); ++k) {
    const double v = raw.data()[k] * scale;
    const long r = std::lround(v);
    if (std::fabs(v - static_cast<double>(r)) > 1e-6 || r < 0 || r > 2)
      throw IoError(p.string() + ": mask sample is not a label");
    m.labels()[k] = static_cast<Label>(r);
  }
  return m;
}

/// Any single-channel raster read as a blend region: nonzero samples are free.
inline std::vector<std::uint8_t> load_free_mask(const std::filesystem::path& p) {
  const Image raw = is_png(p) ? load_png(p) : load_fsim(p);
  if (raw.channels() != 1) throw IoError(p.string() + ": masks are single-channel");
  std::vector<std::uint8_t> free(raw.pixels());
  for (std::size_t k = 0; k < raw.pixels(); ++k) {
    const double v = raw.data()[k];
    if (!std::isfinite(v)) throw IoError(p.string() + ": mask sample is not finite");
    free[k] = v != 0.0;
  }
  return free;
}

inline void save_mask(const std::filesystem::path& p, const SegMask& m) {
  if (is_png(p)) {
    std::vector<std::uint8_t> b(m.size());
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = static_cast<std::uint8_t>(m.labels()[k]);
    write_png_raw(p, b, m.height(), m.width(), 1);
  } else {
    Image raw(m.height(), m.width(), 1);
    for (std::size_t k = 0; k < m.size(); ++k) raw.data()[k] = static_cast<double>(m.labels()[k]);
    save_fsim(p, raw);
  }
}

}  // namespace fsg::io
