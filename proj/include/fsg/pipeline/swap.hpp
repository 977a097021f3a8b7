#pragma once

// Face swap orchestration:
//   (a) reenact the nearest source views to the target landmarks and blend them
//       with the appearance map weights -> I_r, S_r
//   (b) segment the target -> S_t
//   (c) strip what is not known face, inpaint the target face shape -> I_c
//   (d) paste into the target and blend over the face region

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fsg/appearance.hpp"
#include "fsg/masks.hpp"
#include "fsg/pipeline/generator.hpp"
#include "fsg/poisson.hpp"
#include "fsg/reenact.hpp"

namespace fsg {

struct SourceView {
  std::uint32_t id = 0;
  EulerPose pose;
  Image image;
  LandmarkSet landmarks;
  std::optional<Landmark3DSet> landmarks3d;
  std::optional<double> blur;
};

struct TargetFrame {
  Image image;
  LandmarkSet landmarks;
  EulerPose pose;
  std::optional<Landmark3DSet> landmarks3d;
};

struct SwapConfig {
  double step_budget = kDefaultStepBudget;
  std::optional<std::size_t> steps;        // fixed reenactment step count; auto when unset
  double prune_radius = kDefaultPruneRadius;
  std::optional<double> blur_threshold;
  std::optional<OcclusionSpec> occlusion;  // bites taken out of the known face before inpainting
  double tol = 1e-6;
  SolverMethod method = SolverMethod::automatic;
  bool hair_free = false;                  // hair joins the free region of the blend
  std::optional<double> heatmap_sigma;
  std::optional<std::vector<std::size_t>> symmetry;  // enables mirroring of one-sided view sets
};

inline void validate(const SwapConfig& c) {
  if (!(c.step_budget > 0.0)) throw InvalidArgument("step budget must be positive");
  if (c.steps && *c.steps == 0) throw InvalidArgument("step count must be at least 1");
  if (!(c.prune_radius >= 0.0)) throw InvalidArgument("prune radius must be non-negative");
  if (!(c.tol > 0.0)) throw InvalidArgument("Poisson tolerance must be positive");
  if (c.heatmap_sigma && !(*c.heatmap_sigma > 0.0)) throw InvalidArgument("heatmap sigma must be positive");
  if (c.occlusion) validate(*c.occlusion);
}

struct SwapGenerators {
  GeneratorHandle reenact;
  GeneratorHandle segment;
  GeneratorHandle inpaint;
  std::optional<GeneratorHandle> blend;  // Poisson solve when absent
};

/// Source views reduced to a map: pruned, optionally mirrored, out-of-bounds
/// poses dropped. `views[k]` backs map vertex k.
struct PreparedSource {
  std::vector<SourceView> views;
  AppearanceMap map;
};

inline PreparedSource prepare_source(std::span<const SourceView> views, const SwapConfig& cfg) {
  std::vector<SourceView> all(views.begin(), views.end());
  if (cfg.symmetry) {
    std::vector<ViewEntry> entries;
    for (const auto& v : all) entries.push_back({v.id, v.pose, v.image, v.landmarks, std::nullopt, false});
    if (is_one_sided(entries)) {
      const auto mirrored = flip_augment(entries, std::span<const std::size_t>(*cfg.symmetry));
      for (std::size_t i = all.size(); i < mirrored.size(); ++i) {
        SourceView m;
        m.id = mirrored[i].id;
        m.pose = mirrored[i].pose;
        m.image = mirrored[i].image;
        m.landmarks = mirrored[i].landmarks;
        all.push_back(std::move(m));
      }
    }
  }
  std::vector<ViewCandidate> cands;
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const PlanePoint p = pose_to_plane(all[i].pose.canonical());
    if (std::fabs(p.yaw) > kMapBound || std::fabs(p.pitch) > kMapBound) continue;
    inside.push_back(i);
    cands.push_back({p, all[i].pose.roll, all[i].blur});
  }
  PreparedSource out;
  std::vector<ViewPoint> pts;
  for (std::size_t k : prune_views(cands, cfg.prune_radius, cfg.blur_threshold)) {
    out.views.push_back(all[inside[k]]);
    pts.push_back({cands[k].point, out.views.back().id, false});
  }
  if (out.views.empty()) throw InvalidArgument("no usable source view inside the appearance map bounds");
  out.map = build_map(pts);
  return out;
}

struct SwapTrace {
  Interpolation reenacted;     // I_r, S_r
  SegMask target_mask;         // S_t
  Image inpaint_input;         // I_r restricted to the known face
  Image completed;             // I_c
  Image transfer;              // I_r^t
  std::vector<std::uint8_t> free;
  std::optional<SolverReport> solver;
  Image output;
};

namespace detail {
template <class F>
auto run_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const Error& e) {
    throw PipelineError(stage, e);
  } catch (const std::exception& e) {
    throw PipelineError(stage, e.what());
  }
}
}  // namespace detail

inline Image swap(const PreparedSource& src, const TargetFrame& tgt, const SwapConfig& cfg,
                  const SwapGenerators& gens, SwapTrace* trace = nullptr) {
  validate(cfg);
  require_valid(tgt.image, "target frame");
  validate(tgt.landmarks);
  const std::size_t H = tgt.image.height(), W = tgt.image.width();
  const double sigma = cfg.heatmap_sigma.value_or(default_heatmap_sigma(H, W));
  SwapTrace local;
  SwapTrace& tr = trace ? *trace : local;

  // (a) out-of-map poses surface as OutOfRange rather than a stage failure
  const ViewQuery located = query(src.map, tgt.pose);
  (void)located;
  std::unordered_map<std::uint32_t, Image> images;
  for (const auto& v : src.views) {
    if (v.image.height() != H || v.image.width() != W) throw InvalidArgument("source view size differs from the target");
    images.emplace(v.id, v.image);
  }
  tr.reenacted = detail::run_stage("reenact", [&] {
    return interpolate_views(src.map, tgt.pose, images, [&](std::size_t vertex, const Image& img) {
      const SourceView& v = src.views.at(vertex);
      if (v.landmarks3d && tgt.landmarks3d) {
        PlanOptions po;
        po.steps = cfg.steps;
        po.step_budget = cfg.step_budget;
        po.final_landmarks = tgt.landmarks;
        const ReenactPlan plan = plan_steps(*v.landmarks3d, v.pose, *tgt.landmarks3d, tgt.pose, po);
        return reenact_sequence(img, plan, gens.reenact, sigma);
      }
      GeneratorRequest req;
      req.role = Role::reenact;
      req.image = img;
      req.heatmap = encode_landmarks(tgt.landmarks, H, W, sigma);
      return gens.reenact.call(req);
    });
  });

  // (b)
  tr.target_mask = detail::run_stage("segment", [&] {
    GeneratorRequest req;
    req.role = Role::segment;
    req.image = tgt.image;
    return gens.segment.call(req).mask;
  });
  const SegMask& st = tr.target_mask;

  // (c) known = face(S_r) and face(S_t); the inpainting target shape is face(S_t)
  tr.completed = detail::run_stage("inpaint", [&] {
    SegMask known(H, W);
    for (std::size_t p = 0; p < known.size(); ++p)
      if (tr.reenacted.mask.labels()[p] == Label::face && st.labels()[p] == Label::face)
        known.labels()[p] = Label::face;
    if (cfg.occlusion && known.count(Label::face) > 0) known = occlude_border(known, *cfg.occlusion);
    tr.inpaint_input = remove_background(tr.reenacted.image, known, {Label::face});
    GeneratorRequest req;
    req.role = Role::inpaint;
    req.image = tr.inpaint_input;
    req.mask = st;
    return gens.inpaint.call(req).image;
  });

  // (d)
  tr.transfer = tgt.image;
  for (std::size_t p = 0; p < st.size(); ++p)
    if (st.labels()[p] == Label::face)
      for (std::size_t c = 0; c < 3; ++c) tr.transfer.data()[p * 3 + c] = tr.completed.data()[p * 3 + c];
  tr.free = free_mask(st, cfg.hair_free);

  tr.output = detail::run_stage("blend", [&] {
    if (gens.blend) {
      GeneratorRequest req;
      req.role = Role::blend;
      req.image = tr.transfer;
      req.target = tgt.image;
      req.mask = st;
      Image out = gens.blend->call(req).image;
      // the blend constraint holds whatever the generator did
      for (std::size_t p = 0; p < tr.free.size(); ++p)
        if (!tr.free[p])
          for (std::size_t c = 0; c < 3; ++c) out.data()[p * 3 + c] = tgt.image.data()[p * 3 + c];
      return out;
    }
    BlendOptions bo;
    bo.tol = cfg.tol;
    bo.method = cfg.method;
    BlendResult r = blend({tgt.image, tr.transfer, tr.free}, bo);
    tr.solver = r.report;
    return std::move(r.image);
  });
  return tr.output;
}

inline Image swap(std::span<const SourceView> views, const TargetFrame& tgt, const SwapConfig& cfg,
                  const SwapGenerators& gens, SwapTrace* trace = nullptr) {
  validate(cfg);
  return swap(prepare_source(views, cfg), tgt, cfg, gens, trace);
}

}  // namespace fsg
