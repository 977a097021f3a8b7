#pragma once

// Per-subject frame curation: coverage and blur filtering, angular thinning,
// and a capped subset with maximal landmark spread.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fsg/appearance.hpp"
#include "fsg/core.hpp"

namespace fsg {

inline constexpr double kDefaultCoverageMin = 0.15;
inline constexpr std::size_t kDefaultFrameCap = 100;

struct FrameRecord {
  std::string id;
  PlanePoint point;
  double roll = 0.0;
  std::optional<double> blur;  // higher is blurrier
  double coverage = 1.0;       // face fraction of the face box
  LandmarkSet landmarks;
};

/// Negated variance of the 4-neighbour Laplacian of the grayscale image
/// (sharp images score low).
inline double blur_score(const Image& img) {
  const Image g = to_gray(img);
  if (g.height() < 3 || g.width() < 3) throw InvalidArgument("blur score needs at least a 3x3 image");
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 1; i + 1 < g.height(); ++i)
    for (std::size_t j = 1; j + 1 < g.width(); ++j) {
      const double l = g.at(i - 1, j) + g.at(i + 1, j) + g.at(i, j - 1) + g.at(i, j + 1) - 4.0 * g.at(i, j);
      sum += l;
      sum2 += l * l;
      ++n;
    }
  const double mean = sum / static_cast<double>(n);
  return -(sum2 / static_cast<double>(n) - mean * mean);
}

struct CurationOptions {
  double coverage_min = kDefaultCoverageMin;
  double prune_radius = kDefaultPruneRadius;
  std::optional<double> blur_threshold;
};

/// Indices (ascending) of the frames that survive: coverage >= coverage_min
/// (frames strictly below are dropped), blur within threshold, then angular
/// pruning with roll priority.
inline std::vector<std::size_t> prune_frames(std::span<const FrameRecord> frames, const CurationOptions& opt = {}) {
  if (!(opt.coverage_min >= 0.0 && opt.coverage_min <= 1.0)) throw InvalidArgument("coverage threshold must be in [0, 1]");
  std::vector<std::size_t> kept;
  std::vector<ViewCandidate> cands;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (f.coverage < opt.coverage_min) continue;
    if (opt.blur_threshold && f.blur && *f.blur > *opt.blur_threshold) continue;
    kept.push_back(i);
    cands.push_back({f.point, f.roll, f.blur});
  }
  std::vector<std::size_t> out;
  for (std::size_t k : prune_views(cands, opt.prune_radius)) out.push_back(kept[k]);
  return out;
}

inline double landmark_vector_distance(const LandmarkSet& a, const LandmarkSet& b) {
  if (a.size() != b.size()) throw InvalidArgument("landmark counts differ");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double dx = a.points[k].x - b.points[k].x, dy = a.points[k].y - b.points[k].y;
    s += dx * dx + dy * dy;
  }
  return std::sqrt(s);
}

/// Greedy farthest-point subset of size min(cap, n) over flattened landmark
/// vectors, seeded with the farthest pair. This is a 2-approximation of the
/// max-min dispersion subset, not an exact solver. Ties go to the lowest index.
/// Returns indices in ascending order.
inline std::vector<std::size_t> select_max_variance(std::span<const FrameRecord> frames,
                                                    std::size_t cap = kDefaultFrameCap) {
  if (cap < 1) throw InvalidArgument("frame cap must be at least 1");
  const std::size_t n = frames.size();
  std::vector<std::size_t> out;
  if (n <= cap) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      d[i][j] = d[j][i] = landmark_vector_distance(frames[i].landmarks, frames[j].landmarks);

  std::size_t bi = 0, bj = 1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (d[i][j] > d[bi][bj]) {
        bi = i;
        bj = j;
      }
  std::vector<bool> chosen(n, false);
  std::vector<double> nearest(n);
  chosen[bi] = true;
  out.push_back(bi);
  if (cap >= 2) {
    chosen[bj] = true;
    out.push_back(bj);
  }
  for (std::size_t i = 0; i < n; ++i) nearest[i] = cap >= 2 ? std::min(d[i][bi], d[i][bj]) : d[i][bi];
  while (out.size() < cap) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!chosen[i] && (best == n || nearest[i] > nearest[best])) best = i;
    chosen[best] = true;
    out.push_back(best);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], d[i][best]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fsg
