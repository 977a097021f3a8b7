#pragma once

// Shared domain types: rasters, landmarks, poses and their basic arithmetic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fsg/error.hpp"

namespace fsg {

/// H x W x C raster, row-major and channel-interleaved: index = (row * W + col) * C + ch.
/// Samples of a valid image are finite and lie in [0, 1]; intermediate results
/// (e.g. an unclamped Poisson solution) may use the same container without that
/// guarantee, so validity is checked explicitly with require_valid().
class Image {
 public:
  Image() = default;
  Image(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0)
      : height_(height), width_(width), channels_(channels), data_(height * width * channels, fill) {
    if (channels != 1 && channels != 3) throw InvalidArgument("image channels must be 1 or 3");
  }
  Image(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data)
      : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    if (channels != 1 && channels != 3) throw InvalidArgument("image channels must be 1 or 3");
    if (data_.size() != height * width * channels)
      throw InvalidArgument("image data length does not match dimensions");
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t pixels() const noexcept { return height_ * width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(std::size_t row, std::size_t col, std::size_t ch = 0) {
    return data_[(row * width_ + col) * channels_ + ch];
  }
  double at(std::size_t row, std::size_t col, std::size_t ch = 0) const {
    return data_[(row * width_ + col) * channels_ + ch];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const Image& o) const noexcept {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }

  bool operator==(const Image&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 1;
  std::vector<double> data_;
};

inline bool is_valid(const Image& img) {
  return std::all_of(img.data().begin(), img.data().end(),
                     [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; });
}

inline void require_valid(const Image& img, const std::string& what = "image") {
  if (img.empty()) throw InvalidArgument(what + " is empty");
  if (!is_valid(img)) throw InvalidArgument(what + " has a sample that is non-finite or outside [0,1]");
}

inline Image clamp01(Image img) {
  for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
  return img;
}

/// Horizontal mirror (column j <-> W-1-j).
inline Image flip_horizontal(const Image& img) {
  Image out(img.height(), img.width(), img.channels());
  for (std::size_t r = 0; r < img.height(); ++r)
    for (std::size_t c = 0; c < img.width(); ++c)
      for (std::size_t k = 0; k < img.channels(); ++k)
        out.at(r, img.width() - 1 - c, k) = img.at(r, c, k);
  return out;
}

/// ITU-R BT.601 luma; single-channel input is returned unchanged.
inline Image to_gray(const Image& img) {
  if (img.channels() == 1) return img;
  Image out(img.height(), img.width(), 1);
  for (std::size_t r = 0; r < img.height(); ++r)
    for (std::size_t c = 0; c < img.width(); ++c)
      out.at(r, c) = 0.299 * img.at(r, c, 0) + 0.587 * img.at(r, c, 1) + 0.114 * img.at(r, c, 2);
  return out;
}

enum class Label : std::uint8_t { background = 0, face = 1, hair = 2 };

/// Per-pixel 3-class segmentation.
class SegMask {
 public:
  SegMask() = default;
  SegMask(std::size_t height, std::size_t width, Label fill = Label::background)
      : height_(height), width_(width), labels_(height * width, fill) {}

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return labels_.size(); }

  Label& at(std::size_t row, std::size_t col) { return labels_[row * width_ + col]; }
  Label at(std::size_t row, std::size_t col) const { return labels_[row * width_ + col]; }
  std::span<Label> labels() noexcept { return labels_; }
  std::span<const Label> labels() const noexcept { return labels_; }

  std::size_t count(Label l) const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), l));
  }

  bool operator==(const SegMask&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<Label> labels_;
};

inline Label label_from_int(int v) {
  if (v < 0 || v > 2) throw InvalidArgument("segmentation label must be 0, 1 or 2, got " + std::to_string(v));
  return static_cast<Label>(v);
}

inline SegMask flip_horizontal(const SegMask& m) {
  SegMask out(m.height(), m.width());
  for (std::size_t r = 0; r < m.height(); ++r)
    for (std::size_t c = 0; c < m.width(); ++c) out.at(r, m.width() - 1 - c) = m.at(r, c);
  return out;
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  bool operator==(const Point3&) const = default;
};

inline constexpr std::size_t kDefaultLandmarkCount = 70;

/// Ordered 2D landmarks in pixel coordinates. Pixel (row i, col j) has its
/// center at (x = j, y = i).
struct LandmarkSet {
  std::vector<Point2> points;

  std::size_t size() const noexcept { return points.size(); }
  bool operator==(const LandmarkSet&) const = default;
};

inline void validate(const LandmarkSet& p) {
  if (p.size() < 3) throw InvalidArgument("landmark set needs at least 3 points");
  for (const auto& q : p.points)
    if (!std::isfinite(q.x) || !std::isfinite(q.y)) throw InvalidArgument("landmark coordinate is not finite");
}

struct Landmark3DSet {
  std::vector<Point3> points;

  std::size_t size() const noexcept { return points.size(); }
  bool operator==(const Landmark3DSet&) const = default;
};

inline void validate(const Landmark3DSet& v) {
  if (v.size() < 3) throw InvalidArgument("3D landmark set needs at least 3 points");
  for (const auto& q : v.points)
    if (!std::isfinite(q.x) || !std::isfinite(q.y) || !std::isfinite(q.z))
      throw InvalidArgument("3D landmark coordinate is not finite");
}

/// Wraps degrees into [-180, 180).
inline double wrap_degrees(double deg) {
  double w = std::fmod(deg + 180.0, 360.0);
  if (w < 0.0) w += 360.0;
  return w - 180.0;
}

/// Head orientation in degrees (intrinsic yaw-pitch-roll).
struct EulerPose {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  bool operator==(const EulerPose&) const = default;

  EulerPose canonical() const { return {wrap_degrees(yaw), wrap_degrees(pitch), wrap_degrees(roll)}; }
};

inline void validate(const EulerPose& e) {
  if (!std::isfinite(e.yaw) || !std::isfinite(e.pitch) || !std::isfinite(e.roll))
    throw InvalidArgument("Euler angle is not finite");
}

/// A pose projected onto the (yaw, pitch) plane.
struct PlanePoint {
  double yaw = 0.0;
  double pitch = 0.0;
  bool operator==(const PlanePoint&) const = default;
};

inline PlanePoint pose_to_plane(const EulerPose& e) { return {e.yaw, e.pitch}; }

inline double angular_distance(const PlanePoint& a, const PlanePoint& b) {
  const double dy = a.yaw - b.yaw;
  const double dp = a.pitch - b.pitch;
  return std::sqrt(dy * dy + dp * dp);
}

}  // namespace fsg
