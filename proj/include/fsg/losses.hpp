#pragma once

// Training objectives as plain functions over caller-supplied tensors.
// Feature maps come from whatever perceptual backbone the caller runs;
// score maps are discriminator outputs as probabilities.
//
// Each differentiable loss has a *_grad companion returning the (sub)gradient
// with respect to its first argument(s); sign(0) is taken as 0.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "fsg/core.hpp"

namespace fsg {

struct FeatureMap {
  std::size_t layer = 0;
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;

  std::size_t size() const noexcept { return channels * height * width; }
};

/// Discriminator output at one scale (any raster/batch shape, flattened).
struct ScoreMap {
  std::vector<double> data;
};

struct LossWeights {
  double perc = 1.0;
  double pixel = 0.1;
  double adv = 0.001;
  double seg = 0.1;
  double rec = 1.0;
  double stepwise = 1.0;
  double reenactment = 0.0;  // ramped 0 -> 1 over training, see reenactment_weight()
};

inline void validate(const LossWeights& w) {
  for (double v : {w.perc, w.pixel, w.adv, w.seg, w.rec, w.stepwise, w.reenactment})
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("loss weights must be finite and non-negative");
}

/// Linear ramp of the segmentation guidance weight with training progress in [0, 1].
inline double reenactment_weight(double progress) { return std::clamp(progress, 0.0, 1.0); }

enum class Reduction { sum, mean };

inline constexpr double kScoreEps = 1e-7;

namespace detail {
inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline void check_layers(std::span<const FeatureMap> fx, std::span<const FeatureMap> fy) {
  if (fx.size() != fy.size()) throw InvalidArgument("feature lists have different lengths");
  for (std::size_t i = 0; i < fx.size(); ++i) {
    const auto& a = fx[i];
    const auto& b = fy[i];
    if (a.channels != b.channels || a.height != b.height || a.width != b.width)
      throw InvalidArgument("feature maps of layer " + std::to_string(i) + " differ in shape");
    if (a.size() == 0 || a.data.size() != a.size() || b.data.size() != b.size())
      throw InvalidArgument("feature map of layer " + std::to_string(i) + " has inconsistent size");
  }
}

inline void check_same(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("loss inputs differ in size");
}
}  // namespace detail

/// sum_i ||F_i(x) - F_i(y)||_1 / (C_i H_i W_i)
inline double perceptual_loss(std::span<const FeatureMap> fx, std::span<const FeatureMap> fy) {
  detail::check_layers(fx, fy);
  double total = 0.0;
  for (std::size_t i = 0; i < fx.size(); ++i) {
    double l1 = 0.0;
    for (std::size_t k = 0; k < fx[i].data.size(); ++k) l1 += std::fabs(fx[i].data[k] - fy[i].data[k]);
    total += l1 / static_cast<double>(fx[i].size());
  }
  return total;
}

inline std::vector<std::vector<double>> perceptual_loss_grad(std::span<const FeatureMap> fx,
                                                             std::span<const FeatureMap> fy) {
  detail::check_layers(fx, fy);
  std::vector<std::vector<double>> g(fx.size());
  for (std::size_t i = 0; i < fx.size(); ++i) {
    const double s = 1.0 / static_cast<double>(fx[i].size());
    g[i].resize(fx[i].data.size());
    for (std::size_t k = 0; k < g[i].size(); ++k) g[i][k] = s * detail::sgn(fx[i].data[k] - fy[i].data[k]);
  }
  return g;
}

/// ||x - y||_1, summed by default.
inline double pixel_loss(std::span<const double> x, std::span<const double> y, Reduction red = Reduction::sum) {
  detail::check_same(x, y);
  double l1 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) l1 += std::fabs(x[i] - y[i]);
  if (red == Reduction::mean && !x.empty()) l1 /= static_cast<double>(x.size());
  return l1;
}

inline double pixel_loss(const Image& x, const Image& y, Reduction red = Reduction::sum) {
  if (!x.same_shape(y)) throw InvalidArgument("pixel loss inputs differ in shape");
  return pixel_loss(x.data(), y.data(), red);
}

inline std::vector<double> pixel_loss_grad(std::span<const double> x, std::span<const double> y,
                                           Reduction red = Reduction::sum) {
  detail::check_same(x, y);
  const double s = (red == Reduction::mean && !x.empty()) ? 1.0 / static_cast<double>(x.size()) : 1.0;
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = s * detail::sgn(x[i] - y[i]);
  return g;
}

/// lambda_perc * L_perc + lambda_pixel * L_pixel
inline double reconstruction_loss(const Image& x, const Image& y, std::span<const FeatureMap> fx,
                                  std::span<const FeatureMap> fy, const LossWeights& w = {},
                                  Reduction red = Reduction::sum) {
  validate(w);
  return w.perc * perceptual_loss(fx, fy) + w.pixel * pixel_loss(x, y, red);
}

struct ReconstructionGrad {
  std::vector<double> pixels;                 // d/dx
  std::vector<std::vector<double>> features;  // d/dF_i(x)
};

inline ReconstructionGrad reconstruction_loss_grad(const Image& x, const Image& y, std::span<const FeatureMap> fx,
                                                   std::span<const FeatureMap> fy, const LossWeights& w = {},
                                                   Reduction red = Reduction::sum) {
  validate(w);
  if (!x.same_shape(y)) throw InvalidArgument("reconstruction inputs differ in shape");
  ReconstructionGrad g{pixel_loss_grad(x.data(), y.data(), red), perceptual_loss_grad(fx, fy)};
  for (double& v : g.pixels) v *= w.pixel;
  for (auto& layer : g.features)
    for (double& v : layer) v *= w.perc;
  return g;
}

enum class GanSide { generator, discriminator };

/// Generator-side reading of the min-max objective.
enum class GanReading {
  non_saturating,  // G minimizes -E[log D(x, G(x))]
  minimax,         // G minimizes  E[log(1 - D(x, G(x)))]
};

namespace detail {
inline double clamp_score(double v) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw InvalidArgument("discriminator score outside [0, 1]");
  return std::clamp(v, kScoreEps, 1.0 - kScoreEps);
}

inline bool clamped(double v) { return v < kScoreEps || v > 1.0 - kScoreEps; }
}  // namespace detail

/// Multi-scale adversarial term; expectations are raster means per scale,
/// summed over scales.
///   discriminator: sum_i E[log D_i(real)] + E[log(1 - D_i(fake))]   (maximized by D)
///   generator:     sum_i -E[log D_i(fake)]  or  sum_i E[log(1 - D_i(fake))]
inline double gan_loss(std::span<const ScoreMap> real, std::span<const ScoreMap> fake, GanSide side,
                       GanReading reading = GanReading::non_saturating) {
  double total = 0.0;
  auto mean_of = [](const ScoreMap& m, auto f) {
    if (m.data.empty()) throw InvalidArgument("empty score map");
    double s = 0.0;
    for (double v : m.data) s += f(detail::clamp_score(v));
    return s / static_cast<double>(m.data.size());
  };
  if (side == GanSide::discriminator) {
    if (real.size() != fake.size()) throw InvalidArgument("real and fake score lists differ in scale count");
    for (std::size_t i = 0; i < real.size(); ++i) {
      total += mean_of(real[i], [](double d) { return std::log(d); });
      total += mean_of(fake[i], [](double d) { return std::log(1.0 - d); });
    }
  } else {
    for (const auto& m : fake) {
      if (reading == GanReading::non_saturating)
        total -= mean_of(m, [](double d) { return std::log(d); });
      else
        total += mean_of(m, [](double d) { return std::log(1.0 - d); });
    }
  }
  return total;
}

struct GanGrad {
  std::vector<std::vector<double>> real;  // per scale
  std::vector<std::vector<double>> fake;
};

/// Gradient of gan_loss w.r.t. the raw scores; zero where the clamp is active.
inline GanGrad gan_loss_grad(std::span<const ScoreMap> real, std::span<const ScoreMap> fake, GanSide side,
                             GanReading reading = GanReading::non_saturating) {
  GanGrad g;
  auto grad_of = [](const ScoreMap& m, auto df) {
    std::vector<double> out(m.data.size());
    const double n = static_cast<double>(m.data.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double d = detail::clamp_score(m.data[k]);
      out[k] = detail::clamped(m.data[k]) ? 0.0 : df(d) / n;
    }
    return out;
  };
  if (side == GanSide::discriminator) {
    if (real.size() != fake.size()) throw InvalidArgument("real and fake score lists differ in scale count");
    for (std::size_t i = 0; i < real.size(); ++i) {
      g.real.push_back(grad_of(real[i], [](double d) { return 1.0 / d; }));
      g.fake.push_back(grad_of(fake[i], [](double d) { return -1.0 / (1.0 - d); }));
    }
  } else {
    for (const auto& m : fake) {
      if (reading == GanReading::non_saturating)
        g.fake.push_back(grad_of(m, [](double d) { return -1.0 / d; }));
      else
        g.fake.push_back(grad_of(m, [](double d) { return -1.0 / (1.0 - d); }));
    }
  }
  return g;
}

/// 3-channel one-hot encoding of a segmentation (background, face, hair).
inline Image one_hot(const SegMask& m) {
  Image out(m.height(), m.width(), 3, 0.0);
  for (std::size_t r = 0; r < m.height(); ++r)
    for (std::size_t c = 0; c < m.width(); ++c) out.at(r, c, static_cast<std::size_t>(m.at(r, c))) = 1.0;
  return out;
}

/// L_pixel over one-hot encodings.
inline double segmentation_pixel_loss(const SegMask& a, const SegMask& b) {
  if (a.height() != b.height() || a.width() != b.width()) throw InvalidArgument("masks differ in shape");
  return pixel_loss(one_hot(a), one_hot(b));
}

/// Sub-losses of the reenactment generator's objective, already evaluated.
struct ReenactmentTerms {
  std::optional<double> stepwise;  // L_rec(~I_{r_n}, ~I_t)
  std::optional<double> rec;       // L_rec(~I_r, ~I_t)
  std::optional<double> adv;       // L_adv
  std::optional<double> seg;       // L_pixel(S_r, S_t)
};

inline double reenactment_objective(const ReenactmentTerms& t, const LossWeights& w = {}) {
  validate(w);
  if (!t.stepwise || !t.rec || !t.adv || !t.seg) throw InvalidArgument("reenactment objective is missing a term");
  return w.stepwise * *t.stepwise + w.rec * *t.rec + w.adv * *t.adv + w.seg * *t.seg;
}

/// L_ce + lambda_reenactment * L_pixel(S_t, S_r^t).
inline double segmentation_objective(double cross_entropy, const SegMask& s_t, const SegMask& s_rt,
                                     double lambda_reenactment) {
  if (!std::isfinite(lambda_reenactment) || lambda_reenactment < 0.0)
    throw InvalidArgument("lambda_reenactment must be finite and non-negative");
  const double seg = segmentation_pixel_loss(s_t, s_rt);
  return cross_entropy + lambda_reenactment * seg;
}

/// lambda_rec * L_rec(I_c, ~I_t) + lambda_adv * L_adv
inline double inpainting_objective(std::optional<double> rec, std::optional<double> adv, const LossWeights& w = {}) {
  validate(w);
  if (!rec || !adv) throw InvalidArgument("inpainting objective is missing a term");
  return w.rec * *rec + w.adv * *adv;
}

/// lambda_rec * L_rec(G_b(...), P(I_t; I_r^t; S_t)) + lambda_adv * L_adv, with the
/// Poisson solution P as the reconstruction target.
inline double blending_objective(const Image& blended, const std::optional<Image>& poisson_target,
                                 std::span<const FeatureMap> f_blended, std::span<const FeatureMap> f_target,
                                 double adv, const LossWeights& w = {}) {
  if (!poisson_target) throw InvalidArgument("blending objective needs the Poisson blending target");
  return w.rec * reconstruction_loss(blended, *poisson_target, f_blended, f_target, w) + w.adv * adv;
}

}  // namespace fsg
