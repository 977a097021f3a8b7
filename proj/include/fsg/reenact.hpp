#pragma once

// Stepwise reenactment planning and the recursive driver
//   I_{r_j}, S_{r_j} = G_r(I_{r_{j-1}}; H(p_j)),  I_{r_0} = I_s,
// plus mouth-landmark substitution for expression-only transfer.

#include <array>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "fsg/core.hpp"
#include "fsg/heatmaps.hpp"
#include "fsg/pipeline/generator.hpp"

namespace fsg {

inline constexpr double kDefaultStepBudget = 15.0;  // degrees per step

using Rotation = std::array<std::array<double, 3>, 3>;

/// R = R_yaw(about y) * R_pitch(about x) * R_roll(about z), angles in degrees,
/// acting on camera-frame points (x right, y down, z forward).
inline Rotation rotation_from_euler(const EulerPose& e) {
  constexpr double d2r = std::numbers::pi / 180.0;
  const double cy = std::cos(e.yaw * d2r), sy = std::sin(e.yaw * d2r);
  const double cp = std::cos(e.pitch * d2r), sp = std::sin(e.pitch * d2r);
  const double cr = std::cos(e.roll * d2r), sr = std::sin(e.roll * d2r);
  const Rotation ry{{{cy, 0, sy}, {0, 1, 0}, {-sy, 0, cy}}};
  const Rotation rx{{{1, 0, 0}, {0, cp, -sp}, {0, sp, cp}}};
  const Rotation rz{{{cr, -sr, 0}, {sr, cr, 0}, {0, 0, 1}}};
  auto mul = [](const Rotation& a, const Rotation& b) {
    Rotation c{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
  };
  return mul(mul(ry, rx), rz);
}

inline Point3 rotate(const Rotation& r, const Point3& p) {
  return {r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z, r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z,
          r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z};
}

inline Point3 rotate_transposed(const Rotation& r, const Point3& p) {
  return {r[0][0] * p.x + r[1][0] * p.y + r[2][0] * p.z, r[0][1] * p.x + r[1][1] * p.y + r[2][1] * p.z,
          r[0][2] * p.x + r[1][2] * p.y + r[2][2] * p.z};
}

inline Point3 centroid(const Landmark3DSet& v) {
  Point3 c;
  for (const auto& p : v.points) {
    c.x += p.x;
    c.y += p.y;
    c.z += p.z;
  }
  const double n = static_cast<double>(v.size());
  return {c.x / n, c.y / n, c.z / n};
}

/// Orthographic projection: drop z.
inline LandmarkSet project(const Landmark3DSet& v) {
  LandmarkSet p;
  p.points.reserve(v.size());
  for (const auto& q : v.points) p.points.push_back({q.x, q.y});
  return p;
}

/// Euclidean distance between Euler triples after wrapping each difference
/// into [-180, 180).
inline double euler_gap(const EulerPose& a, const EulerPose& b) {
  const double dy = wrap_degrees(b.yaw - a.yaw), dp = wrap_degrees(b.pitch - a.pitch), dr = wrap_degrees(b.roll - a.roll);
  return std::sqrt(dy * dy + dp * dp + dr * dr);
}

/// n = max(1, ceil(planar gap / budget)).
inline std::size_t auto_step_count(const EulerPose& from, const EulerPose& to, double budget = kDefaultStepBudget) {
  if (!(budget > 0.0)) throw InvalidArgument("step budget must be positive");
  const double dy = wrap_degrees(to.yaw - from.yaw), dp = wrap_degrees(to.pitch - from.pitch);
  const double gap = std::sqrt(dy * dy + dp * dp);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(gap / budget)));
}

struct PlanStep {
  double t = 0.0;  // j / n
  EulerPose pose;
  Point3 centroid;
  LandmarkSet landmarks;
};

struct ReenactPlan {
  std::vector<PlanStep> steps;  // p_1 .. p_n
  EulerPose source_pose;
  EulerPose target_pose;

  std::size_t n() const noexcept { return steps.size(); }
};

struct PlanOptions {
  std::optional<std::size_t> steps;  // nullopt: auto_step_count
  double step_budget = kDefaultStepBudget;
  std::optional<LandmarkSet> final_landmarks;  // replaces the projection at step n
};

inline Point3 lerp(const Point3& a, const Point3& b, double t) {
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)};
}

inline LandmarkSet repose(const std::vector<Point3>& shape, const EulerPose& pose, const Point3& c) {
  const Rotation r = rotation_from_euler(pose);
  LandmarkSet p;
  p.points.reserve(shape.size());
  for (const auto& q : shape) {
    const Point3 w = rotate(r, q);
    p.points.push_back({w.x + c.x, w.y + c.y});
  }
  return p;
}

/// Rigidly re-poses the source shape along a linear path in Euler angles and
/// centroid. The source shape is expressed in its own frame
/// (R(e_s)^T (v_s - c_s)) and re-posed as R(e_j) x + c_j at t_j = j / n.
/// Angle differences take the short way around.
inline ReenactPlan plan_steps(const Landmark3DSet& v_s, const EulerPose& e_s, const Landmark3DSet& v_t,
                              const EulerPose& e_t, const PlanOptions& opt = {}) {
  validate(v_s);
  validate(v_t);
  validate(e_s);
  validate(e_t);
  if (v_s.size() != v_t.size()) throw InvalidArgument("source and target landmark counts differ");
  if (opt.steps && *opt.steps == 0) throw InvalidArgument("step count must be at least 1");
  if (opt.final_landmarks && opt.final_landmarks->size() != v_s.size())
    throw InvalidArgument("final landmark count differs from the source");
  const std::size_t n = opt.steps ? *opt.steps : auto_step_count(e_s, e_t, opt.step_budget);

  const Point3 c_s = centroid(v_s), c_t = centroid(v_t);
  const Rotation r_s = rotation_from_euler(e_s);
  std::vector<Point3> shape;
  shape.reserve(v_s.size());
  for (const auto& p : v_s.points) shape.push_back(rotate_transposed(r_s, {p.x - c_s.x, p.y - c_s.y, p.z - c_s.z}));

  const EulerPose delta{wrap_degrees(e_t.yaw - e_s.yaw), wrap_degrees(e_t.pitch - e_s.pitch),
                        wrap_degrees(e_t.roll - e_s.roll)};
  ReenactPlan plan;
  plan.source_pose = e_s;
  plan.target_pose = e_t;
  plan.steps.reserve(n);
  for (std::size_t j = 1; j <= n; ++j) {
    PlanStep s;
    s.t = static_cast<double>(j) / static_cast<double>(n);
    if (j == n) {
      s.pose = e_t;
      s.centroid = c_t;
    } else {
      s.pose = {e_s.yaw + s.t * delta.yaw, e_s.pitch + s.t * delta.pitch, e_s.roll + s.t * delta.roll};
      s.centroid = lerp(c_s, c_t, s.t);
    }
    s.landmarks = (j == n && opt.final_landmarks) ? *opt.final_landmarks : repose(shape, s.pose, s.centroid);
    plan.steps.push_back(std::move(s));
  }
  return plan;
}

/// Runs the recursion through `gen`, one call per plan step, and returns the
/// last image and mask. With an empty plan the source comes back unchanged
/// with an empty mask.
inline GeneratorResponse reenact_sequence(const Image& source, const ReenactPlan& plan, const GeneratorHandle& gen,
                                          std::optional<double> sigma = std::nullopt) {
  GeneratorResponse cur{source, SegMask(source.height(), source.width())};
  const double s = sigma.value_or(default_heatmap_sigma(source.height(), source.width()));
  for (std::size_t j = 0; j < plan.n(); ++j) {
    GeneratorRequest req;
    req.role = Role::reenact;
    req.image = std::move(cur.image);
    req.heatmap = encode_landmarks(plan.steps[j].landmarks, source.height(), source.width(), s);
    try {
      cur = gen.call(req);
    } catch (const Error& e) {
      throw PipelineError("reenact step " + std::to_string(j + 1) + "/" + std::to_string(plan.n()), e);
    } catch (const std::exception& e) {
      throw PipelineError("reenact step " + std::to_string(j + 1) + "/" + std::to_string(plan.n()), e.what());
    }
  }
  return cur;
}

/// Index range of the mouth points plus the two corner anchors used to align
/// them. Defaults follow the 68-point convention.
struct MouthSpec {
  std::size_t first = 48;
  std::size_t last = 67;  // inclusive
  std::size_t left_corner = 48;
  std::size_t right_corner = 54;
};

/// p_t with its mouth points replaced by the source mouth, mapped into the
/// target mouth frame by the similarity that takes the source corners onto
/// the target corners.
inline LandmarkSet transfer_expression(const LandmarkSet& p_t, const LandmarkSet& p_s, const MouthSpec& mouth = {}) {
  if (p_t.size() != p_s.size()) throw InvalidArgument("landmark counts differ");
  if (mouth.first > mouth.last || mouth.last >= p_t.size())
    throw InvalidArgument("mouth index range is empty or out of bounds");
  if (mouth.left_corner < mouth.first || mouth.left_corner > mouth.last || mouth.right_corner < mouth.first ||
      mouth.right_corner > mouth.last || mouth.left_corner == mouth.right_corner)
    throw InvalidArgument("mouth anchors must be two distinct indices inside the mouth range");

  using C = std::complex<double>;
  auto z = [](Point2 p) { return C(p.x, p.y); };
  const C sa = z(p_s.points[mouth.left_corner]), sb = z(p_s.points[mouth.right_corner]);
  const C ta = z(p_t.points[mouth.left_corner]), tb = z(p_t.points[mouth.right_corner]);
  if (sa == sb) throw InvalidArgument("source mouth corners coincide");

  LandmarkSet out = p_t;
  if (std::equal(p_s.points.begin() + mouth.first, p_s.points.begin() + mouth.last + 1,
                 p_t.points.begin() + mouth.first))
    return out;

  // z -> ta + a (z - sa) maps sa -> ta and sb -> tb
  const C d = sb - sa;
  const C a = (tb - ta) * std::conj(d) / std::norm(d);
  for (std::size_t k = mouth.first; k <= mouth.last; ++k) {
    if (k == mouth.left_corner || k == mouth.right_corner) continue;  // already equal to the target
    const C w = ta + a * (z(p_s.points[k]) - sa);
    out.points[k] = {w.real(), w.imag()};
  }
  return out;
}

}  // namespace fsg
