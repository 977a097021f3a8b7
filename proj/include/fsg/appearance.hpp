#pragma once

// Appearance map: a subject's available head poses embedded in the (yaw, pitch)
// plane, triangulated so that any pose inside the box can be expressed as a
// convex blend of at most three stored views.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fsg/core.hpp"
#include "fsg/geometry/delaunay.hpp"
#include "fsg/geometry/kdtree.hpp"
#include "fsg/geometry/predicates.hpp"
#include "fsg/heatmaps.hpp"
#include "fsg/pipeline/generator.hpp"

namespace fsg {

inline constexpr double kMapBound = 75.0;
inline constexpr double kDefaultPruneRadius = 5.0;

struct ViewCandidate {
  PlanePoint point;
  double roll = 0.0;
  std::optional<double> blur;  // higher is blurrier
};

/// Greedy thinning in the angular domain. Blurred candidates (score above
/// `blur_threshold`) are dropped first; the rest are visited by ascending |roll|
/// (ties by index) and kept unless a kept point lies closer than `radius`.
/// Returns the kept indices in ascending order.
inline std::vector<std::size_t> prune_views(std::span<const ViewCandidate> candidates, double radius,
                                            std::optional<double> blur_threshold = std::nullopt) {
  if (!(radius >= 0.0)) throw InvalidArgument("prune radius must be non-negative");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (blur_threshold && c.blur && *c.blur > *blur_threshold) continue;
    order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(candidates[a].roll) < std::fabs(candidates[b].roll);
  });

  geometry::PlaneKdTree kept;
  std::vector<std::size_t> out;
  for (std::size_t i : order) {
    if (kept.any_within(candidates[i].point, radius)) continue;
    kept.insert(candidates[i].point, i);
    out.push_back(i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct ViewPoint {
  PlanePoint point;
  std::uint32_t id = 0;
  bool flipped = false;
  bool operator==(const ViewPoint&) const = default;
};

/// Vertices 0..views.size()-1 are views, the next four are the box corners.
struct AppearanceMap {
  std::vector<ViewPoint> views;
  std::array<PlanePoint, 4> boundary{};
  std::vector<geometry::Triangle> mesh;

  std::size_t vertex_count() const noexcept { return views.size() + boundary.size(); }
  bool is_boundary(std::size_t v) const noexcept { return v >= views.size(); }
  PlanePoint vertex(std::size_t v) const { return is_boundary(v) ? boundary[v - views.size()] : views[v].point; }

  bool operator==(const AppearanceMap&) const = default;
};

inline Point2 as_point(const PlanePoint& p) { return {p.yaw, p.pitch}; }

inline AppearanceMap build_map(std::span<const ViewPoint> views) {
  if (views.empty()) throw InvalidArgument("appearance map needs at least one view");
  std::vector<Point2> pts;
  pts.reserve(views.size());
  for (const auto& v : views) {
    if (!std::isfinite(v.point.yaw) || !std::isfinite(v.point.pitch))
      throw InvalidArgument("view pose is not finite");
    pts.push_back(as_point(v.point));
  }
  geometry::BoxDelaunay dt(pts, -kMapBound, kMapBound);
  AppearanceMap map;
  map.views.assign(views.begin(), views.end());
  map.boundary = {PlanePoint{-kMapBound, -kMapBound}, PlanePoint{kMapBound, -kMapBound},
                  PlanePoint{kMapBound, kMapBound}, PlanePoint{-kMapBound, kMapBound}};
  map.mesh = dt.triangles();
  return map;
}

/// Containing triangle and weights. Entries are ordered by descending weight
/// (ties keep the triangle's vertex order). `raw` holds the plain barycentric
/// coordinates; `weights` has boundary corners zeroed and the rest renormalized.
struct ViewQuery {
  std::size_t triangle_index = 0;
  std::array<std::uint32_t, 3> vertices{};
  std::array<double, 3> raw{};
  std::array<double, 3> weights{};
};

/// Barycentric coordinates of q in (a, b, c); the third is 1 minus the others.
inline std::array<double, 3> barycentric(Point2 a, Point2 b, Point2 c, Point2 q) {
  const double area = geometry::signed_area2(a, b, c);
  const double la = geometry::signed_area2(q, b, c) / area;
  const double lb = geometry::signed_area2(a, q, c) / area;
  return {la, lb, 1.0 - la - lb};
}

/// Drops the entries flagged in `excluded` and rescales the rest to sum to one.
/// Returns nullopt when nothing positive remains.
inline std::optional<std::array<double, 3>> exclude_and_renormalize(std::array<double, 3> w,
                                                                    std::array<bool, 3> excluded) {
  double mass = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (excluded[k] || w[k] < 0.0) w[k] = 0.0;
    mass += w[k];
  }
  if (!(mass > 0.0)) return std::nullopt;
  for (double& x : w) x /= mass;
  return w;
}

inline ViewQuery query(const AppearanceMap& map, const EulerPose& pose) {
  validate(pose);
  const PlanePoint x = pose_to_plane(pose);
  if (std::fabs(x.yaw) > kMapBound || std::fabs(x.pitch) > kMapBound)
    throw OutOfRange("query pose (" + std::to_string(x.yaw) + ", " + std::to_string(x.pitch) +
                     ") outside the appearance map bounds");
  const Point2 q = as_point(x);
  for (std::size_t t = 0; t < map.mesh.size(); ++t) {
    const auto& tri = map.mesh[t];
    const Point2 a = as_point(map.vertex(tri[0])), b = as_point(map.vertex(tri[1])), c = as_point(map.vertex(tri[2]));
    if (geometry::orient(a, b, q) < 0 || geometry::orient(b, c, q) < 0 || geometry::orient(c, a, q) < 0) continue;

    const auto raw = barycentric(a, b, c, q);
    const std::array<bool, 3> corner{map.is_boundary(tri[0]), map.is_boundary(tri[1]), map.is_boundary(tri[2])};
    const auto w = exclude_and_renormalize(raw, corner);
    if (!w) throw NoViewError("query pose falls in a region with no source view");

    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return (*w)[i] > (*w)[j]; });
    ViewQuery out;
    out.triangle_index = t;
    for (int k = 0; k < 3; ++k) {
      out.vertices[k] = tri[order[k]];
      out.raw[k] = raw[order[k]];
      out.weights[k] = (*w)[order[k]];
    }
    return out;
  }
  throw OutOfRange("query pose is not covered by the mesh");
}

/// Image plus segmentation produced for one map vertex.
using ViewReenactor = std::function<GeneratorResponse(std::size_t view_index, const Image& view_image)>;

struct Interpolation {
  Image image;
  SegMask mask;
  ViewQuery query;
};

/// Blends per-view reenactments with the query's weights:
/// I = sum_k w_k * R_k. The mask takes, per pixel, the label with the largest
/// accumulated weight (ties to the lower label).
inline Interpolation interpolate_views(const AppearanceMap& map, const EulerPose& pose,
                                       const std::unordered_map<std::uint32_t, Image>& images,
                                       const ViewReenactor& reenact) {
  Interpolation out;
  out.query = query(map, pose);
  std::vector<double> votes;
  for (int k = 0; k < 3; ++k) {
    const double w = out.query.weights[k];
    if (w <= 0.0) continue;
    const auto& view = map.views.at(out.query.vertices[k]);
    auto it = images.find(view.id);
    if (it == images.end()) throw InvalidArgument("missing image for view id " + std::to_string(view.id));
    const GeneratorResponse r = reenact(out.query.vertices[k], it->second);
    if (out.image.empty()) {
      out.image = Image(r.image.height(), r.image.width(), r.image.channels(), 0.0);
      votes.assign(r.image.pixels() * 3, 0.0);
    } else if (!r.image.same_shape(out.image)) {
      throw InvalidArgument("reenacted views differ in shape");
    }
    auto dst = out.image.data();
    auto src = r.image.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += w * src[i];
    auto labels = r.mask.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) votes[i * 3 + static_cast<std::size_t>(labels[i])] += w;
  }
  out.image = clamp01(std::move(out.image));
  out.mask = SegMask(out.image.height(), out.image.width());
  auto labels = out.mask.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double* v = &votes[i * 3];
    const int best = static_cast<int>(std::max_element(v, v + 3) - v);
    labels[i] = static_cast<Label>(best);
  }
  return out;
}

/// Form with a single target landmark set: every selected view is
/// reenacted directly to p_t through `gen`.
inline Interpolation interpolate_views(const AppearanceMap& map, const EulerPose& pose, const LandmarkSet& p_t,
                                       const std::unordered_map<std::uint32_t, Image>& images,
                                       const GeneratorHandle& gen, std::optional<double> sigma = std::nullopt) {
  std::optional<Heatmap> heat;
  return interpolate_views(map, pose, images, [&](std::size_t, const Image& img) {
    if (!heat) heat = encode_landmarks(p_t, img.height(), img.width(), sigma.value_or(default_heatmap_sigma(img.height(), img.width())));
    GeneratorRequest req;
    req.role = Role::reenact;
    req.image = img;
    req.heatmap = *heat;
    return gen.call(req);
  });
}

/// One source view with everything needed to mirror it.
struct ViewEntry {
  std::uint32_t id = 0;
  EulerPose pose;
  Image image;
  LandmarkSet landmarks;
  std::optional<SegMask> mask;
  bool flipped = false;
};

inline LandmarkSet mirror_landmarks(const LandmarkSet& p, std::size_t width, std::span<const std::size_t> symmetry) {
  if (symmetry.size() != p.size()) throw InvalidArgument("symmetry permutation size does not match landmark count");
  LandmarkSet out;
  out.points.resize(p.size());
  const double w1 = static_cast<double>(width) - 1.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Point2 src = p.points.at(symmetry[k]);
    out.points[k] = {w1 - src.x, src.y};
  }
  return out;
}

inline bool is_one_sided(std::span<const ViewEntry> views) {
  bool pos = false, neg = false;
  for (const auto& v : views) {
    pos = pos || v.pose.yaw > 0.0;
    neg = neg || v.pose.yaw < 0.0;
  }
  return pos != neg;
}

/// If every non-frontal view sits on the same side in yaw, appends mirrored
/// copies (yaw and roll negated, image flipped, landmarks mirrored and
/// re-indexed through `symmetry`). Frontal (yaw = 0) views are not mirrored.
inline std::vector<ViewEntry> flip_augment(std::vector<ViewEntry> views,
                                           std::optional<std::span<const std::size_t>> symmetry) {
  if (!is_one_sided(views)) return views;
  if (!symmetry) throw InvalidArgument("one-sided appearance map needs a landmark symmetry permutation to flip");
  std::vector<bool> seen(symmetry->size(), false);
  for (std::size_t s : *symmetry) {
    if (s >= seen.size() || seen[s]) throw InvalidArgument("landmark symmetry is not a permutation");
    seen[s] = true;
  }
  std::uint32_t next_id = 0;
  for (const auto& v : views) next_id = std::max(next_id, v.id + 1);
  const std::size_t n = views.size();
  views.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const ViewEntry& v = views[i];
    if (v.pose.yaw == 0.0) continue;
    ViewEntry m;
    m.id = next_id++;
    m.pose = {-v.pose.yaw, v.pose.pitch, -v.pose.roll};
    m.image = flip_horizontal(v.image);
    m.landmarks = mirror_landmarks(v.landmarks, v.image.width(), *symmetry);
    if (v.mask) m.mask = flip_horizontal(*v.mask);
    m.flipped = !v.flipped;
    views.push_back(std::move(m));
  }
  return views;
}

}  // namespace fsg
