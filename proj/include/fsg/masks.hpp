#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <set>
#include <vector>

#include "fsg/core.hpp"
#include "fsg/random.hpp"

namespace fsg {

/// Axis-aligned pixel rectangle: columns [x, x + width), rows [y, y + height).
struct BBox {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  bool operator==(const BBox&) const = default;
};

inline double coverage_ratio(const SegMask& mask, const BBox& box, Label cls = Label::face) {
  if (box.width == 0 || box.height == 0) throw InvalidArgument("coverage box is empty");
  if (box.x + box.width > mask.width() || box.y + box.height > mask.height())
    throw InvalidArgument("coverage box extends outside the mask");
  std::size_t hits = 0;
  for (std::size_t r = box.y; r < box.y + box.height; ++r)
    for (std::size_t c = box.x; c < box.x + box.width; ++c) hits += mask.at(r, c) == cls;
  return static_cast<double>(hits) / static_cast<double>(box.width * box.height);
}

/// Bounding box of all pixels of class `cls`; nullopt if there are none.
inline std::optional<BBox> class_bbox(const SegMask& mask, Label cls) {
  std::size_t r0 = mask.height(), r1 = 0, c0 = mask.width(), c1 = 0;
  bool any = false;
  for (std::size_t r = 0; r < mask.height(); ++r)
    for (std::size_t c = 0; c < mask.width(); ++c)
      if (mask.at(r, c) == cls) {
        any = true;
        r0 = std::min(r0, r);
        r1 = std::max(r1, r);
        c0 = std::min(c0, c);
        c1 = std::max(c1, c);
      }
  if (!any) return std::nullopt;
  return BBox{c0, r0, c1 - c0 + 1, r1 - r0 + 1};
}

/// Pixels whose label is not in `keep` are zeroed.
inline Image remove_background(const Image& img, const SegMask& mask,
                               const std::set<Label>& keep = {Label::face, Label::hair}) {
  if (img.height() != mask.height() || img.width() != mask.width())
    throw InvalidArgument("image and mask dimensions differ");
  Image out = img;
  for (std::size_t r = 0; r < img.height(); ++r)
    for (std::size_t c = 0; c < img.width(); ++c)
      if (!keep.contains(mask.at(r, c)))
        for (std::size_t k = 0; k < img.channels(); ++k) out.at(r, c, k) = 0.0;
  return out;
}

/// Random ellipse removal along the face border. Semi-axes are fractions of the
/// face bounding box's longer side; aspect is minor / major.
struct OcclusionSpec {
  std::size_t count_min = 1;
  std::size_t count_max = 3;
  double axis_min = 0.05;
  double axis_max = 0.25;
  double aspect_min = 0.3;
  double aspect_max = 1.0;
  std::uint64_t seed = 0;
};

inline void validate(const OcclusionSpec& s) {
  if (s.count_min > s.count_max) throw InvalidArgument("occlusion count range is empty");
  if (!(s.axis_min > 0.0) || s.axis_min > s.axis_max) throw InvalidArgument("occlusion axis range must be positive");
  if (!(s.aspect_min > 0.0) || s.aspect_min > s.aspect_max)
    throw InvalidArgument("occlusion aspect range must be positive");
}

struct Ellipse {
  double cx = 0.0;  // column
  double cy = 0.0;  // row
  double a = 1.0;   // semi-axis along `angle`
  double b = 1.0;
  double angle = 0.0;  // radians

  /// Pixel centers satisfying the ellipse inequality are inside; no antialiasing.
  bool contains(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    const double cs = std::cos(angle), sn = std::sin(angle);
    const double u = (dx * cs + dy * sn) / a;
    const double v = (-dx * sn + dy * cs) / b;
    return u * u + v * v <= 1.0;
  }
};

/// Face pixels with a 4-neighbour that is not face, or lying on the raster edge.
inline std::vector<std::size_t> face_boundary(const SegMask& mask) {
  std::vector<std::size_t> out;
  const std::size_t h = mask.height(), w = mask.width();
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      if (mask.at(r, c) != Label::face) continue;
      const bool edge = r == 0 || c == 0 || r + 1 == h || c + 1 == w;
      if (edge || mask.at(r - 1, c) != Label::face || mask.at(r + 1, c) != Label::face ||
          mask.at(r, c - 1) != Label::face || mask.at(r, c + 1) != Label::face)
        out.push_back(r * w + c);
    }
  return out;
}

/// Draws the ellipses occlude_border() will remove.
inline std::vector<Ellipse> sample_occlusions(const SegMask& mask, const OcclusionSpec& spec) {
  validate(spec);
  const auto box = class_bbox(mask, Label::face);
  if (!box) throw InvalidArgument("mask has no face pixels to occlude");
  const auto border = face_boundary(mask);
  const double side = static_cast<double>(std::max(box->width, box->height));

  Rng rng(spec.seed);
  const auto k = static_cast<std::size_t>(
      rng.integer(static_cast<std::int64_t>(spec.count_min), static_cast<std::int64_t>(spec.count_max)));
  std::vector<Ellipse> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t p = border[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(border.size()) - 1))];
    Ellipse e;
    e.cx = static_cast<double>(p % mask.width());
    e.cy = static_cast<double>(p / mask.width());
    e.a = rng.uniform(spec.axis_min, spec.axis_max) * side;
    e.b = e.a * rng.uniform(spec.aspect_min, spec.aspect_max);
    e.angle = rng.uniform(0.0, std::numbers::pi);
    out.push_back(e);
  }
  return out;
}

/// Sets every pixel inside any ellipse to background.
inline SegMask apply_occlusions(SegMask mask, std::span<const Ellipse> ellipses) {
  for (const auto& e : ellipses) {
    const double reach = std::max(e.a, e.b);
    const auto r0 = static_cast<std::size_t>(std::max(0.0, std::floor(e.cy - reach)));
    const auto c0 = static_cast<std::size_t>(std::max(0.0, std::floor(e.cx - reach)));
    const auto r1 = std::min<std::size_t>(mask.height(), static_cast<std::size_t>(std::max(0.0, std::ceil(e.cy + reach))) + 1);
    const auto c1 = std::min<std::size_t>(mask.width(), static_cast<std::size_t>(std::max(0.0, std::ceil(e.cx + reach))) + 1);
    for (std::size_t r = r0; r < r1; ++r)
      for (std::size_t c = c0; c < c1; ++c)
        if (e.contains(static_cast<double>(c), static_cast<double>(r))) mask.at(r, c) = Label::background;
  }
  return mask;
}

/// Simulated hair occlusion: removes ellipse-shaped bites centered on the face
/// border. Deterministic for a given spec.seed.
inline SegMask occlude_border(const SegMask& mask, const OcclusionSpec& spec) {
  const auto ellipses = sample_occlusions(mask, spec);
  return apply_occlusions(mask, ellipses);
}

}  // namespace fsg
