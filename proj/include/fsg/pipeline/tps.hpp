#pragma once

// 2D thin-plate spline interpolating a set of point correspondences.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fsg/core.hpp"

namespace fsg {

class ThinPlateSpline {
 public:
  ThinPlateSpline(std::span<const Point2> from, std::span<const Point2> to) : ctrl_(from.begin(), from.end()) {
    if (from.size() != to.size()) throw InvalidArgument("spline correspondences differ in count");
    if (from.size() < 3) throw InvalidArgument("spline needs at least three correspondences");
    const auto n = static_cast<Eigen::Index>(from.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 3, n + 3);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n + 3, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = kernel(from[i], from[j]);
      a(i, n) = a(n, i) = 1.0;
      a(i, n + 1) = a(n + 1, i) = from[i].x;
      a(i, n + 2) = a(n + 2, i) = from[i].y;
      b(i, 0) = to[i].x;
      b(i, 1) = to[i].y;
    }
    coef_ = a.fullPivLu().solve(b);
  }

  Point2 operator()(Point2 p) const {
    const auto n = static_cast<Eigen::Index>(ctrl_.size());
    double x = coef_(n, 0) + coef_(n + 1, 0) * p.x + coef_(n + 2, 0) * p.y;
    double y = coef_(n, 1) + coef_(n + 1, 1) * p.x + coef_(n + 2, 1) * p.y;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = kernel(p, ctrl_[i]);
      x += coef_(i, 0) * u;
      y += coef_(i, 1) * u;
    }
    return {x, y};
  }

 private:
  static double kernel(Point2 a, Point2 b) {
    const double r2 = (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
    return r2 > 0.0 ? 0.5 * r2 * std::log(r2) : 0.0;
  }

  std::vector<Point2> ctrl_;
  Eigen::MatrixXd coef_;
};

/// Bilinear sample with clamp-to-edge.
inline double sample_bilinear(const Image& img, double x, double y, std::size_t ch) {
  const double mx = static_cast<double>(img.width() - 1), my = static_cast<double>(img.height() - 1);
  x = std::clamp(x, 0.0, mx);
  y = std::clamp(y, 0.0, my);
  const auto j0 = static_cast<std::size_t>(std::floor(x)), i0 = static_cast<std::size_t>(std::floor(y));
  const std::size_t j1 = std::min(j0 + 1, img.width() - 1), i1 = std::min(i0 + 1, img.height() - 1);
  const double fx = x - static_cast<double>(j0), fy = y - static_cast<double>(i0);
  const double top = (1 - fx) * img.at(i0, j0, ch) + fx * img.at(i0, j1, ch);
  const double bot = (1 - fx) * img.at(i1, j0, ch) + fx * img.at(i1, j1, ch);
  return (1 - fy) * top + fy * bot;
}

}  // namespace fsg
