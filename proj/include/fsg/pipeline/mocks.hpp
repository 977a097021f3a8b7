#pragma once

// Deterministic stand-ins for the trained generators.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "fsg/heatmaps.hpp"
#include "fsg/pipeline/generator.hpp"
#include "fsg/pipeline/synthetic.hpp"
#include "fsg/pipeline/tps.hpp"
#include "fsg/poisson.hpp"
#include "fsg/random.hpp"

namespace fsg::mock {

enum class MaskPolicy {
  full,   // every pixel is face
  keyed,  // read from the synthetic key channel
};

inline SegMask make_mask(const Image& img, MaskPolicy policy) {
  if (policy == MaskPolicy::keyed) return synthetic::keyed_mask(img);
  return SegMask(img.height(), img.width(), Label::face);
}

/// Returns its input image unchanged.
class Identity : public Generator {
 public:
  explicit Identity(MaskPolicy policy = MaskPolicy::full) : policy_(policy) {}
  GeneratorResponse run(const GeneratorRequest& req) override { return {req.image, make_mask(req.image, policy_)}; }
  std::string name() const override { return policy_ == MaskPolicy::keyed ? "identity-keyed" : "identity"; }

 private:
  MaskPolicy policy_;
};

/// Fills the whole raster with the per-channel mean of the input.
class MeanColor : public Generator {
 public:
  GeneratorResponse run(const GeneratorRequest& req) override {
    const Image& in = req.image;
    Image out(in.height(), in.width(), in.channels());
    for (std::size_t c = 0; c < in.channels(); ++c) {
      double s = 0.0;
      for (std::size_t p = 0; p < in.pixels(); ++p) s += in.data()[p * in.channels() + c];
      const double m = s / static_cast<double>(in.pixels());
      for (std::size_t p = 0; p < in.pixels(); ++p) out.data()[p * in.channels() + c] = m;
    }
    return {out, SegMask(in.height(), in.width(), Label::face)};
  }
  std::string name() const override { return "mean-color"; }
};

/// Adds `delta` to every pixel (clamped) and counts invocations.
class Counting : public Generator {
 public:
  explicit Counting(double delta = 0.1) : delta_(delta) {}
  GeneratorResponse run(const GeneratorRequest& req) override {
    ++calls_;
    Image out = req.image;
    for (double& v : out.data()) v += delta_;
    return {clamp01(std::move(out)), SegMask(req.image.height(), req.image.width(), Label::face)};
  }
  std::string name() const override { return "counting"; }
  std::size_t calls() const noexcept { return calls_; }

 private:
  double delta_;
  std::atomic<std::size_t> calls_{0};
};

/// Thin-plate warp of a synthetic face so that its landmarks land on the ones
/// encoded in the request heatmap.
class Warp : public Generator {
 public:
  explicit Warp(MaskPolicy policy = MaskPolicy::keyed) : policy_(policy) {}
  GeneratorResponse run(const GeneratorRequest& req) override {
    if (!req.heatmap) throw InvalidArgument("warp generator needs a heatmap");
    const LandmarkSet dst = decode_landmarks(*req.heatmap);
    const LandmarkSet src = synthetic::detect_landmarks(req.image, dst.size());
    const ThinPlateSpline back(dst.points, src.points);  // output pixel -> input position
    const Image& in = req.image;
    Image out(in.height(), in.width(), in.channels());
    for (std::size_t i = 0; i < in.height(); ++i)
      for (std::size_t j = 0; j < in.width(); ++j) {
        const Point2 s = back({static_cast<double>(j), static_cast<double>(i)});
        for (std::size_t c = 0; c < in.channels(); ++c) out.at(i, j, c) = sample_bilinear(in, s.x, s.y, c);
      }
    return {out, make_mask(out, policy_)};
  }
  std::string name() const override { return "warp"; }

 private:
  MaskPolicy policy_;
};

/// Inpainting stand-in: pixels of the requested face region that arrive empty
/// (all channels zero) get the mean known face color plus small seeded noise.
/// The noise stream is keyed on the request contents, so results do not depend
/// on call order.
class FillInpaint : public Generator {
 public:
  explicit FillInpaint(std::uint64_t seed = 0, double noise = 0.02) : seed_(seed), noise_(noise) {}
  GeneratorResponse run(const GeneratorRequest& req) override {
    if (!req.mask) throw InvalidArgument("inpainting needs a target mask");
    const Image& in = req.image;
    const SegMask& m = *req.mask;
    const std::size_t C = in.channels();
    auto empty = [&](std::size_t p) {
      for (std::size_t c = 0; c < C; ++c)
        if (in.data()[p * C + c] != 0.0) return false;
      return true;
    };
    std::vector<double> mean(C, 0.0);
    std::size_t known = 0;
    for (std::size_t p = 0; p < in.pixels(); ++p)
      if (m.labels()[p] == Label::face && !empty(p)) {
        for (std::size_t c = 0; c < C; ++c) mean[c] += in.data()[p * C + c];
        ++known;
      }
    for (double& v : mean) v = known ? v / static_cast<double>(known) : 0.5;

    Rng rng(seed_ ^ digest(in));
    Image out = in;
    for (std::size_t p = 0; p < in.pixels(); ++p) {
      if (m.labels()[p] != Label::face || !empty(p)) continue;
      for (std::size_t c = 0; c < C; ++c)
        out.data()[p * C + c] = std::clamp(mean[c] + rng.uniform(-noise_, noise_), 0.0, 1.0);
    }
    return {out, m};
  }
  std::string name() const override { return "fill-inpaint"; }

 private:
  // FNV-1a over the f32 rounding of the pixels
  static std::uint64_t digest(const Image& img) {
    std::uint64_t h = 1469598103934665603ull;
    for (double v : img.data()) {
      const float f = static_cast<float>(v);
      std::uint32_t bits;
      std::memcpy(&bits, &f, sizeof bits);
      for (int b = 0; b < 4; ++b) {
        h ^= (bits >> (8 * b)) & 0xffu;
        h *= 1099511628211ull;
      }
    }
    return h;
  }

  std::uint64_t seed_;
  double noise_;
};

/// Blending stand-in that runs the Poisson solve it is meant to imitate.
class PoissonBlend : public Generator {
 public:
  explicit PoissonBlend(BlendOptions opt = {}, bool hair_free = false) : opt_(opt), hair_free_(hair_free) {}
  GeneratorResponse run(const GeneratorRequest& req) override {
    if (!req.target || !req.mask) throw InvalidArgument("blending needs a target and a mask");
    BlendProblem prob{*req.target, req.image, free_mask(*req.mask, hair_free_)};
    return {blend(prob, opt_).image, *req.mask};
  }
  std::string name() const override { return "poisson-blend"; }

 private:
  BlendOptions opt_;
  bool hair_free_;
};

}  // namespace fsg::mock
