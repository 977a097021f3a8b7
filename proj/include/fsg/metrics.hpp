#pragma once

// Evaluation protocol: SSIM against the nearest-pose source view, Euler and
// landmark errors against the target, aggregated per video and then across videos.

#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fsg/core.hpp"

namespace fsg {

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double range = 1.0;
};

/// Mean SSIM over all fully-contained Gaussian windows of the grayscale images.
inline double ssim(const Image& x, const Image& y, const SsimParams& prm = {}) {
  if (x.height() != y.height() || x.width() != y.width()) throw InvalidArgument("SSIM inputs differ in size");
  if (x.height() < prm.window || x.width() < prm.window) throw InvalidArgument("image smaller than the SSIM window");
  const Image gx = to_gray(x), gy = to_gray(y);
  const std::size_t win = prm.window;

  std::vector<double> w1(win);
  double s = 0.0;
  const double half = static_cast<double>(win - 1) / 2.0;
  for (std::size_t i = 0; i < win; ++i) {
    const double d = static_cast<double>(i) - half;
    w1[i] = std::exp(-d * d / (2.0 * prm.sigma * prm.sigma));
    s += w1[i];
  }
  for (double& v : w1) v /= s;

  const double c1 = (prm.k1 * prm.range) * (prm.k1 * prm.range);
  const double c2 = (prm.k2 * prm.range) * (prm.k2 * prm.range);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + win <= gx.height(); ++i)
    for (std::size_t j = 0; j + win <= gx.width(); ++j) {
      double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
      for (std::size_t a = 0; a < win; ++a)
        for (std::size_t b = 0; b < win; ++b) {
          const double w = w1[a] * w1[b];
          const double u = gx.at(i + a, j + b), v = gy.at(i + a, j + b);
          mx += w * u;
          my += w * v;
          xx += w * u * u;
          yy += w * v * v;
          xy += w * u * v;
        }
      const double vx = xx - mx * mx, vy = yy - my * my, cxy = xy - mx * my;
      total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return total / static_cast<double>(count);
}

/// Euclidean distance between (yaw, pitch, roll) triples, degrees.
inline double pose_error(const EulerPose& a, const EulerPose& b) {
  const double dy = a.yaw - b.yaw, dp = a.pitch - b.pitch, dr = a.roll - b.roll;
  return std::sqrt(dy * dy + dp * dp + dr * dr);
}

enum class LandmarkReduction {
  flattened_norm,  // || vec(a) - vec(b) ||_2
  mean_per_point,  // mean_k || a_k - b_k ||_2
};

inline double landmark_error(const LandmarkSet& a, const LandmarkSet& b,
                             LandmarkReduction red = LandmarkReduction::flattened_norm) {
  if (a.size() != b.size()) throw InvalidArgument("landmark counts differ");
  if (a.size() == 0) throw InvalidArgument("landmark sets are empty");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double dx = a.points[k].x - b.points[k].x, dy = a.points[k].y - b.points[k].y;
    acc += red == LandmarkReduction::flattened_norm ? dx * dx + dy * dy : std::sqrt(dx * dx + dy * dy);
  }
  return red == LandmarkReduction::flattened_norm ? std::sqrt(acc) : acc / static_cast<double>(a.size());
}

/// Index of the pose closest to `query` in full 3-angle distance (first on ties).
inline std::size_t nearest_pose(std::span<const EulerPose> poses, const EulerPose& query) {
  if (poses.empty()) throw InvalidArgument("no poses to search");
  std::size_t best = 0;
  for (std::size_t i = 1; i < poses.size(); ++i)
    if (pose_error(poses[i], query) < pose_error(poses[best], query)) best = i;
  return best;
}

struct SwapEval {
  std::optional<double> verification;  // external identity distance, never computed here
  double ssim = 0.0;
  double euler_err = 0.0;
  double landmark_err = 0.0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population std across videos
};

/// "2.49 ± 0.04"
inline std::string format_mean_std(const MeanStd& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f", m.mean, m.std);
  return buf;
}

struct EvalSummary {
  std::optional<MeanStd> verification;
  MeanStd ssim;
  MeanStd euler;
  MeanStd landmarks;
  std::size_t videos = 0;
};

inline MeanStd mean_std(std::span<const double> v) {
  MeanStd m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(var / static_cast<double>(v.size()));
  return m;
}

/// Frame metrics are averaged within each video first; the summary is the mean
/// and std of those per-video means. Verification is summarized over the videos
/// that carry it.
inline EvalSummary aggregate(std::span<const std::vector<SwapEval>> videos) {
  if (videos.empty()) throw InvalidArgument("no videos to aggregate");
  std::vector<double> ver, ss, eu, lm;
  for (const auto& frames : videos) {
    if (frames.empty()) throw InvalidArgument("video without frames");
    double s = 0, e = 0, l = 0, v = 0;
    std::size_t nv = 0;
    for (const auto& f : frames) {
      s += f.ssim;
      e += f.euler_err;
      l += f.landmark_err;
      if (f.verification) {
        v += *f.verification;
        ++nv;
      }
    }
    const double n = static_cast<double>(frames.size());
    ss.push_back(s / n);
    eu.push_back(e / n);
    lm.push_back(l / n);
    if (nv > 0) ver.push_back(v / static_cast<double>(nv));
  }
  EvalSummary out;
  out.videos = videos.size();
  out.ssim = mean_std(ss);
  out.euler = mean_std(eu);
  out.landmarks = mean_std(lm);
  if (!ver.empty()) out.verification = mean_std(ver);
  return out;
}

/// Table-shaped CSV: header plus one row for `method`.
inline std::string summary_csv(const EvalSummary& s, const std::string& method) {
  std::string out = "method,verification,SSIM,euler,landmarks\n";
  out += method + "," + (s.verification ? format_mean_std(*s.verification) : std::string("n/a")) + "," +
         format_mean_std(s.ssim) + "," + format_mean_std(s.euler) + "," + format_mean_std(s.landmarks) + "\n";
  return out;
}

}  // namespace fsg
