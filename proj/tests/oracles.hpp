#pragma once

// Reference implementations used only by tests. Each is written from the
// problem statement, not from the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "fsg/core.hpp"
#include "fsg/random.hpp"

namespace oracle {

using fsg::Image;
using fsg::Point2;

// Constrained least squares over every forward-difference edge:
//   min sum_edges ((f_q - f_p) - (s_q - s_p))^2,  f = t on fixed pixels.
// Fixed pixels are substituted; the dense system is solved by column-pivoted QR.
inline Image poisson_dense(const Image& t, const Image& s, const std::vector<std::uint8_t>& free) {
  const std::size_t H = t.height(), W = t.width(), C = t.channels();
  std::vector<int> col(H * W, -1);
  int n = 0;
  for (std::size_t p = 0; p < H * W; ++p)
    if (free[p]) col[p] = n++;
  Image out = t;
  if (n == 0) return out;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < H; ++i)
    for (std::size_t j = 0; j < W; ++j) {
      if (j + 1 < W) edges.push_back({i * W + j, i * W + j + 1});
      if (i + 1 < H) edges.push_back({i * W + j, (i + 1) * W + j});
    }
  for (std::size_t c = 0; c < C; ++c) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(edges.size()), n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(edges.size()));
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto [p, q] = edges[e];
      const auto row = static_cast<Eigen::Index>(e);
      double rhs = s.data()[q * C + c] - s.data()[p * C + c];
      if (col[q] >= 0) A(row, col[q]) += 1.0; else rhs -= t.data()[q * C + c];
      if (col[p] >= 0) A(row, col[p]) -= 1.0; else rhs += t.data()[p * C + c];
      b[row] = rhs;
    }
    const Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
    for (std::size_t p = 0; p < H * W; ++p)
      if (col[p] >= 0) out.data()[p * C + c] = x[col[p]];
  }
  return out;
}

using Rational = boost::multiprecision::cpp_rational;

inline Rational exact(double v) { return Rational(v); }

// Sign of the in-circle determinant for CCW (a, b, c): > 0 when d is strictly inside.
inline int incircle_sign(Point2 a, Point2 b, Point2 c, Point2 d) {
  const Rational adx = exact(a.x) - exact(d.x), ady = exact(a.y) - exact(d.y);
  const Rational bdx = exact(b.x) - exact(d.x), bdy = exact(b.y) - exact(d.y);
  const Rational cdx = exact(c.x) - exact(d.x), cdy = exact(c.y) - exact(d.y);
  const Rational det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) -
                       (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
                       (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
  return det > 0 ? 1 : (det < 0 ? -1 : 0);
}

inline int orient_sign(Point2 a, Point2 b, Point2 c) {
  const Rational det = (exact(b.x) - exact(a.x)) * (exact(c.y) - exact(a.y)) -
                       (exact(b.y) - exact(a.y)) * (exact(c.x) - exact(a.x));
  return det > 0 ? 1 : (det < 0 ? -1 : 0);
}

// Greedy retention in ascending |roll| (stable on ties); a point is dropped when
// some retained point lies strictly closer than `radius`.
inline std::vector<std::size_t> prune_greedy(const std::vector<Point2>& pts, const std::vector<double>& roll,
                                             double radius) {
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::fabs(roll[a]) < std::fabs(roll[b]); });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    bool close = false;
    for (std::size_t k : kept)
      if (std::sqrt((pts[i].x - pts[k].x) * (pts[i].x - pts[k].x) + (pts[i].y - pts[k].y) * (pts[i].y - pts[k].y)) < radius)
        close = true;
    if (!close) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

inline double vec_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

inline double min_pairwise(const std::vector<std::vector<double>>& v, const std::vector<std::size_t>& subset) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < subset.size(); ++i)
    for (std::size_t j = i + 1; j < subset.size(); ++j) m = std::min(m, vec_distance(v[subset[i]], v[subset[j]]));
  return m;
}

// Best achievable minimum pairwise distance over all k-subsets.
inline double max_dispersion(const std::vector<std::vector<double>>& v, std::size_t k) {
  const std::size_t n = v.size();
  double best = -1.0;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
  do {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < n; ++i)
      if (pick[i]) s.push_back(i);
    best = std::max(best, min_pairwise(v, s));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

inline double ssim_constant(double a, double b) {
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  return (2 * a * b + c1) * c2 / ((a * a + b * b + c1) * c2);
}

inline Image random_image(fsg::Rng& rng, std::size_t h, std::size_t w, std::size_t c = 3) {
  Image img(h, w, c);
  for (double& v : img.data()) v = rng.uniform();
  return img;
}

// Values exactly representable in f32, so generator round trips are lossless.
inline double f32(double v) { return static_cast<double>(static_cast<float>(v)); }

template <class F>
double central_difference(F f, std::vector<double>& x, std::size_t k, double h = 1e-6) {
  const double x0 = x[k];
  x[k] = x0 + h;
  const double fp = f();
  x[k] = x0 - h;
  const double fm = f();
  x[k] = x0;
  return (fp - fm) / (2 * h);
}

inline bool close_rel(double a, double b, double rel) {
  return std::fabs(a - b) <= rel * std::max({std::fabs(a), std::fabs(b), 1e-3});
}

}  // namespace oracle
