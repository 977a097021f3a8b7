#pragma once

// Landmark heatmaps H(p): one channel per landmark, planar layout.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fsg/core.hpp"

namespace fsg {

/// Planar N x H x W tensor, index = (k * H + row) * W + col.
struct Heatmap {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;

  float at(std::size_t k, std::size_t row, std::size_t col) const {
    return data[(k * height + row) * width + col];
  }
  float& at(std::size_t k, std::size_t row, std::size_t col) { return data[(k * height + row) * width + col]; }
  std::span<const float> plane(std::size_t k) const {
    return std::span<const float>(data).subspan(k * height * width, height * width);
  }
};

enum class HeatmapKernel { gaussian, disk };

/// 4 px at 256.
inline double default_heatmap_sigma(std::size_t height, std::size_t width) {
  return static_cast<double>(std::max(height, width)) / 64.0;
}

/// Channel k is exp(-|x - p_k|^2 / (2 sigma^2)) at pixel centers (gaussian), or
/// 1 inside the radius-sigma disk around p_k (disk). Off-frame landmarks keep
/// their tail.
inline Heatmap encode_landmarks(const LandmarkSet& p, std::size_t height, std::size_t width, double sigma,
                                HeatmapKernel kernel = HeatmapKernel::gaussian) {
  if (height < 1 || width < 1) throw InvalidArgument("heatmap dimensions must be positive");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("heatmap sigma must be positive");
  for (const auto& q : p.points)
    if (!std::isfinite(q.x) || !std::isfinite(q.y)) throw InvalidArgument("landmark coordinate is not finite");

  Heatmap h{p.size(), height, width, std::vector<float>(p.size() * height * width, 0.0f)};
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> gx(width), gy(height);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Point2 c = p.points[k];
    if (kernel == HeatmapKernel::gaussian) {
      // separable: the 2D kernel is the product of two 1D ones
      for (std::size_t j = 0; j < width; ++j) {
        const double d = static_cast<double>(j) - c.x;
        gx[j] = std::exp(-d * d * inv_two_var);
      }
      for (std::size_t i = 0; i < height; ++i) {
        const double d = static_cast<double>(i) - c.y;
        gy[i] = std::exp(-d * d * inv_two_var);
      }
      for (std::size_t i = 0; i < height; ++i)
        for (std::size_t j = 0; j < width; ++j) h.at(k, i, j) = static_cast<float>(gy[i] * gx[j]);
    } else {
      const double r2 = sigma * sigma;
      for (std::size_t i = 0; i < height; ++i)
        for (std::size_t j = 0; j < width; ++j) {
          const double dx = static_cast<double>(j) - c.x;
          const double dy = static_cast<double>(i) - c.y;
          h.at(k, i, j) = (dx * dx + dy * dy <= r2) ? 1.0f : 0.0f;
        }
    }
  }
  return h;
}

/// Recovers a landmark from a gaussian channel: integer argmax refined by a
/// parabola fit of the log-values along each axis, which is exact for an
/// unclipped sampled gaussian.
inline Point2 decode_landmark(const Heatmap& h, std::size_t k) {
  if (k >= h.channels) throw InvalidArgument("heatmap channel out of range");
  std::size_t best_i = 0, best_j = 0;
  float best = -1.0f;
  for (std::size_t i = 0; i < h.height; ++i)
    for (std::size_t j = 0; j < h.width; ++j)
      if (h.at(k, i, j) > best) {
        best = h.at(k, i, j);
        best_i = i;
        best_j = j;
      }
  auto refine = [](double lm, double l0, double lp) {
    const double denom = lm - 2.0 * l0 + lp;
    if (!(denom < 0.0)) return 0.0;
    return std::clamp(0.5 * (lm - lp) / denom, -0.5, 0.5);
  };
  constexpr double tiny = 1e-30;
  auto lg = [&](std::size_t i, std::size_t j) { return std::log(std::max<double>(h.at(k, i, j), tiny)); };
  Point2 out{static_cast<double>(best_j), static_cast<double>(best_i)};
  if (best_j > 0 && best_j + 1 < h.width && h.at(k, best_i, best_j - 1) > 0.0f && h.at(k, best_i, best_j + 1) > 0.0f)
    out.x += refine(lg(best_i, best_j - 1), lg(best_i, best_j), lg(best_i, best_j + 1));
  if (best_i > 0 && best_i + 1 < h.height && h.at(k, best_i - 1, best_j) > 0.0f && h.at(k, best_i + 1, best_j) > 0.0f)
    out.y += refine(lg(best_i - 1, best_j), lg(best_i, best_j), lg(best_i + 1, best_j));
  return out;
}

inline LandmarkSet decode_landmarks(const Heatmap& h) {
  LandmarkSet p;
  p.points.reserve(h.channels);
  for (std::size_t k = 0; k < h.channels; ++k) p.points.push_back(decode_landmark(h, k));
  return p;
}

}  // namespace fsg
