#pragma once

// Parametric test faces whose landmarks can be read back from the pixels.
//   channel 0: gaussian dots at the landmarks
//   channel 1: identity code (k + 1) / (N + 1) within a small disk around landmark k
//   channel 2: segmentation key (background / face / hair)

#include <algorithm>
#include <cmath>

#include "fsg/core.hpp"

namespace fsg::synthetic {

inline constexpr double kKeyBackground = 0.1;
inline constexpr double kKeyFace = 0.5;
inline constexpr double kKeyHair = 0.9;

struct FaceParams {
  double dot_sigma = 1.5;
  double dot_amp = 0.9;
  double code_radius = 3.0;
  double face_scale = 1.35;  // face ellipse semi-axes relative to the landmark extent
  double hair_scale = 1.7;
  double margin = 2.0;
};

inline Label key_label(double v) {
  if (v < 1.0 / 3.0) return Label::background;
  if (v < 2.0 / 3.0) return Label::face;
  return Label::hair;
}

inline double label_key(Label l) {
  switch (l) {
    case Label::face:
      return kKeyFace;
    case Label::hair:
      return kKeyHair;
    default:
      return kKeyBackground;
  }
}

/// Mask read from the key channel.
inline SegMask keyed_mask(const Image& img) {
  if (img.channels() != 3) throw InvalidArgument("keyed masks need a 3-channel image");
  SegMask m(img.height(), img.width());
  for (std::size_t i = 0; i < img.height(); ++i)
    for (std::size_t j = 0; j < img.width(); ++j) m.at(i, j) = key_label(img.at(i, j, 2));
  return m;
}

/// Ground-truth layout: a face ellipse around the landmarks with a hair cap above it.
inline SegMask face_layout(const LandmarkSet& p, std::size_t height, std::size_t width, const FaceParams& prm = {}) {
  validate(p);
  double cx = 0, cy = 0;
  for (const auto& q : p.points) {
    cx += q.x;
    cy += q.y;
  }
  cx /= static_cast<double>(p.size());
  cy /= static_cast<double>(p.size());
  double ex = 0, ey = 0;
  for (const auto& q : p.points) {
    ex = std::max(ex, std::fabs(q.x - cx));
    ey = std::max(ey, std::fabs(q.y - cy));
  }
  const double ax = prm.face_scale * ex + prm.margin, ay = prm.face_scale * ey + prm.margin;
  const double hx = prm.hair_scale * ex + prm.margin, hy = prm.hair_scale * ey + prm.margin;
  SegMask m(height, width);
  for (std::size_t i = 0; i < height; ++i)
    for (std::size_t j = 0; j < width; ++j) {
      const double dx = static_cast<double>(j) - cx, dy = static_cast<double>(i) - cy;
      if ((dx * dx) / (ax * ax) + (dy * dy) / (ay * ay) <= 1.0)
        m.at(i, j) = Label::face;
      else if (dy < 0.0 && (dx * dx) / (hx * hx) + (dy * dy) / (hy * hy) <= 1.0)
        m.at(i, j) = Label::hair;
    }
  return m;
}

inline Image render_face(const LandmarkSet& p, std::size_t height, std::size_t width, const FaceParams& prm = {}) {
  const SegMask layout = face_layout(p, height, width, prm);
  Image img(height, width, 3, 0.0);
  const double n1 = static_cast<double>(p.size() + 1);
  const double inv = 1.0 / (2.0 * prm.dot_sigma * prm.dot_sigma);
  for (std::size_t i = 0; i < height; ++i)
    for (std::size_t j = 0; j < width; ++j) {
      double dots = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double dx = static_cast<double>(j) - p.points[k].x, dy = static_cast<double>(i) - p.points[k].y;
        const double d2 = dx * dx + dy * dy;
        dots += prm.dot_amp * std::exp(-d2 * inv);
        if (d2 <= prm.code_radius * prm.code_radius) img.at(i, j, 1) = static_cast<double>(k + 1) / n1;
      }
      img.at(i, j, 0) = std::min(dots, 1.0);
      img.at(i, j, 2) = label_key(layout.at(i, j));
    }
  return img;
}

/// Inverse of render_face for `n` landmarks: the brightest dot pixel carrying
/// landmark k's code, refined by a log-parabola fit on channel 0.
inline LandmarkSet detect_landmarks(const Image& img, std::size_t n) {
  if (img.channels() != 3) throw InvalidArgument("synthetic detection needs a 3-channel image");
  const double n1 = static_cast<double>(n + 1);
  LandmarkSet out;
  out.points.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double code = static_cast<double>(k + 1) / n1;
    std::size_t bi = 0, bj = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < img.height(); ++i)
      for (std::size_t j = 0; j < img.width(); ++j)
        if (std::fabs(img.at(i, j, 1) - code) < 0.5 / n1 && img.at(i, j, 0) > best) {
          best = img.at(i, j, 0);
          bi = i;
          bj = j;
        }
    if (best <= 0.0) throw InvalidArgument("synthetic landmark " + std::to_string(k) + " not found");
    auto refine = [](double m, double c, double p) {
      if (!(m > 0.0 && c > 0.0 && p > 0.0)) return 0.0;
      const double lm = std::log(m), lc = std::log(c), lp = std::log(p);
      const double den = lm - 2.0 * lc + lp;
      return den < 0.0 ? std::clamp(0.5 * (lm - lp) / den, -0.5, 0.5) : 0.0;
    };
    Point2 q{static_cast<double>(bj), static_cast<double>(bi)};
    if (bj > 0 && bj + 1 < img.width()) q.x += refine(img.at(bi, bj - 1, 0), best, img.at(bi, bj + 1, 0));
    if (bi > 0 && bi + 1 < img.height()) q.y += refine(img.at(bi - 1, bj, 0), best, img.at(bi + 1, bj, 0));
    out.points.push_back(q);
  }
  return out;
}

}  // namespace fsg::synthetic
