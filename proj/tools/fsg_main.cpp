// fsg: batch front end for map building, view queries, swapping, blending,
// evaluation, curation and view densification.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "fsg/appearance.hpp"
#include "fsg/curation.hpp"
#include "fsg/io/images.hpp"
#include "fsg/io/map_file.hpp"
#include "fsg/io/text_formats.hpp"
#include "fsg/metrics.hpp"
#include "fsg/pipeline/endpoint.hpp"
#include "fsg/pipeline/swap.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace fsg;

namespace {

// Shared flags. Values left unset fall back to the config file, then to defaults.
struct Common {
  std::string config;
  std::string manifest;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> gen_r, gen_s, gen_c, gen_b;
  std::optional<std::size_t> steps;
  std::optional<double> prune_radius;
  std::optional<double> tol;
  std::optional<std::size_t> jobs;

  io::Config cfg;

  void load() {
    if (!config.empty()) cfg = io::Config::load(config);
  }
  double prune() const { return prune_radius.value_or(cfg.number("prune_radius").value_or(kDefaultPruneRadius)); }
  double tolerance() const { return tol.value_or(cfg.number("tol").value_or(1e-6)); }
  std::uint64_t rng_seed() const { return seed.value_or(cfg.count("seed").value_or(0)); }
  std::size_t workers() const { return std::max<std::size_t>(1, jobs.value_or(cfg.count("jobs").value_or(1))); }
};

void add_common(CLI::App* cmd, Common& c, bool generators) {
  cmd->add_option("--config", c.config, "key = value settings file");
  cmd->add_option("--manifest", c.manifest, "input manifest");
  cmd->add_option("--out", c.out, "output path");
  cmd->add_option("--seed", c.seed, "seed for stochastic stand-ins");
  cmd->add_option("--prune-radius", c.prune_radius, "angular pruning radius (degrees)");
  cmd->add_option("--tol", c.tol, "Poisson residual tolerance");
  cmd->add_option("--jobs", c.jobs, "frames processed concurrently");
  if (generators) {
    cmd->add_option("--gen-r", c.gen_r, "reenactment generator endpoint");
    cmd->add_option("--gen-s", c.gen_s, "segmentation generator endpoint");
    cmd->add_option("--gen-c", c.gen_c, "inpainting generator endpoint");
    cmd->add_option("--gen-b", c.gen_b, "blending generator endpoint (Poisson when omitted)");
    cmd->add_option("--steps", c.steps, "reenactment steps per view (auto when omitted)");
  }
}

SolverMethod parse_method(const std::string& s) {
  if (s == "auto" || s == "automatic") return SolverMethod::automatic;
  if (s == "direct") return SolverMethod::direct;
  if (s == "cg" || s == "conjugate-gradient") return SolverMethod::conjugate_gradient;
  throw InvalidArgument("unknown solver '" + s + "'");
}

json report_json(const SolverReport& r) {
  return {{"method", to_string(r.method)},           {"free_pixels", r.free_pixels},
          {"iterations", r.iterations},              {"residual", r.residual},
          {"channel_residuals", r.channel_residuals}, {"channel_iterations", r.channel_iterations}};
}

void write_json(const fs::path& p, const json& j) { io::write_text(p, j.dump(2) + "\n"); }

fs::path require_out(const Common& c) {
  if (c.out.empty()) throw InvalidArgument("--out is required");
  return c.out;
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create " + p.string() + ": " + ec.message());
}

std::vector<io::ManifestRow> require_manifest(const Common& c) {
  if (c.manifest.empty()) throw InvalidArgument("--manifest is required");
  return io::load_manifest(c.manifest);
}

// ---- build-map --------------------------------------------------------------

int cmd_build_map(Common& c) {
  c.load();
  const auto rows = require_manifest(c);
  const fs::path out = require_out(c);
  const double coverage_min = c.cfg.number("coverage_min").value_or(kDefaultCoverageMin);
  const auto blur = c.cfg.number("blur_threshold");

  std::vector<ViewCandidate> cands;
  std::vector<std::size_t> rows_in;
  json dropped = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    validate(r.pose);
    const PlanePoint p = pose_to_plane(r.pose.canonical());
    if (std::fabs(p.yaw) > kMapBound || std::fabs(p.pitch) > kMapBound) {
      spdlog::warn("view '{}' at ({}, {}) lies outside the map bounds; skipped", r.id, p.yaw, p.pitch);
      dropped.push_back({{"id", r.id}, {"reason", "out-of-bounds"}});
      continue;
    }
    if (r.coverage && *r.coverage < coverage_min) {
      dropped.push_back({{"id", r.id}, {"reason", "coverage"}});
      continue;
    }
    rows_in.push_back(i);
    cands.push_back({p, r.pose.roll, r.blur});
  }
  std::vector<ViewPoint> views;
  for (std::size_t k : prune_views(cands, c.prune(), blur))
    views.push_back({cands[k].point, static_cast<std::uint32_t>(rows_in[k]), false});
  if (views.empty()) throw InvalidArgument("no view survived filtering");
  io::StoredMap stored{build_map(views), c.prune()};

  ensure_dir(out);
  io::save_map(out / "map.fsam", stored);
  json j = io::map_to_json(stored);
  for (auto& v : j["views"]) v["name"] = rows[v["id"].get<std::size_t>()].id;
  j["dropped"] = dropped;
  write_json(out / "map.json", j);
  spdlog::info("map with {} views and {} triangles written to {}", views.size(), stored.map.mesh.size(), out.string());
  return 0;
}

// ---- query ------------------------------------------------------------------

json query_json(const AppearanceMap& map, const EulerPose& pose) {
  const ViewQuery q = query(map, pose);
  json verts = json::array();
  for (auto v : q.vertices)
    verts.push_back(map.is_boundary(v) ? json(nullptr) : json(map.views[v].id));
  return {{"pose", {pose.yaw, pose.pitch, pose.roll}},
          {"triangle", q.triangle_index},
          {"views", verts},
          {"weights", q.weights},
          {"barycentric", q.raw}};
}

int cmd_query(Common& c, const std::string& map_path, const std::vector<double>& pose) {
  c.load();
  if (pose.size() != 3) throw InvalidArgument("--pose takes yaw pitch roll");
  const io::StoredMap stored = io::load_map(map_path);
  const json j = query_json(stored.map, {pose[0], pose[1], pose[2]});
  if (c.out.empty())
    std::cout << j.dump() << "\n";
  else
    write_json(c.out, j);
  return 0;
}

// ---- swap -------------------------------------------------------------------

SwapConfig swap_config(const Common& c) {
  SwapConfig s;
  s.step_budget = c.cfg.number("step_budget").value_or(kDefaultStepBudget);
  s.steps = c.steps ? c.steps : c.cfg.count("steps");
  s.prune_radius = c.prune();
  s.blur_threshold = c.cfg.number("blur_threshold");
  s.tol = c.tolerance();
  s.method = parse_method(c.cfg.get("solver").value_or("auto"));
  s.hair_free = c.cfg.flag("hair_free").value_or(false);
  s.heatmap_sigma = c.cfg.number("heatmap_sigma");
  if (c.cfg.flag("occlusion").value_or(false)) {
    OcclusionSpec o;
    o.seed = c.rng_seed();
    s.occlusion = o;
  }
  validate(s);
  return s;
}

SwapGenerators open_generators(const Common& c, const SwapConfig& s) {
  EndpointOptions eo;
  eo.seed = c.rng_seed();
  eo.timeout = std::chrono::milliseconds(c.cfg.count("timeout_ms").value_or(30000));
  eo.blend.tol = s.tol;
  eo.hair_free = s.hair_free;
  auto pick = [&](const std::optional<std::string>& flag, const char* key, const char* dflt) {
    return flag ? *flag : c.cfg.get(key).value_or(dflt);
  };
  SwapGenerators g;
  g.reenact = open_endpoint(pick(c.gen_r, "gen_r", "builtin:identity-keyed"), eo);
  g.segment = open_endpoint(pick(c.gen_s, "gen_s", "builtin:identity-keyed"), eo);
  g.inpaint = open_endpoint(pick(c.gen_c, "gen_c", "builtin:fill"), eo);
  if (auto b = c.gen_b ? c.gen_b : c.cfg.get("gen_b")) g.blend = open_endpoint(*b, eo);
  return g;
}

std::vector<SourceView> load_views(const std::vector<io::ManifestRow>& rows) {
  std::vector<SourceView> views;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    SourceView v;
    v.id = static_cast<std::uint32_t>(i);
    v.pose = r.pose;
    v.image = io::load_image(r.image);
    v.landmarks = io::load_landmarks(r.landmarks);
    if (r.landmarks3d) v.landmarks3d = io::load_landmarks3d(*r.landmarks3d);
    v.blur = r.blur;
    views.push_back(std::move(v));
  }
  return views;
}

template <class F>
void for_each_job(std::size_t n, std::size_t workers, F&& f) {
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto work = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(workers, n); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

int cmd_swap(Common& c, const std::string& target_manifest, const std::string& format) {
  c.load();
  const auto src_rows = require_manifest(c);
  if (target_manifest.empty()) throw InvalidArgument("--target is required");
  const auto tgt_rows = io::load_manifest(target_manifest);
  const fs::path out = require_out(c);
  const SwapConfig cfg = swap_config(c);
  const SwapGenerators gens = open_generators(c, cfg);

  const PreparedSource src = prepare_source(load_views(src_rows), cfg);
  ensure_dir(out);
  std::vector<json> frames(tgt_rows.size());
  for_each_job(tgt_rows.size(), c.workers(), [&](std::size_t i) {
    const auto& r = tgt_rows[i];
    TargetFrame t;
    t.image = io::load_image(r.image);
    t.landmarks = io::load_landmarks(r.landmarks);
    t.pose = r.pose;
    if (r.landmarks3d) t.landmarks3d = io::load_landmarks3d(*r.landmarks3d);
    SwapTrace tr;
    const Image img = swap(src, t, cfg, gens, &tr);
    const fs::path file = out / (r.id + "." + format);
    io::save_image(file, img);
    json f{{"id", r.id}, {"output", file.filename().string()}};
    f["views"] = json::array();
    for (int k = 0; k < 3; ++k) {
      const auto v = tr.reenacted.query.vertices[k];
      if (tr.reenacted.query.weights[k] > 0.0)
        f["views"].push_back({{"id", src_rows[src.map.views[v].id].id}, {"weight", tr.reenacted.query.weights[k]}});
    }
    if (tr.solver) f["solver"] = report_json(*tr.solver);
    frames[i] = f;
    spdlog::info("swapped frame '{}'", r.id);
  });
  json j{{"frames", frames},
         {"generators", {{"r", gens.reenact.name()}, {"s", gens.segment.name()}, {"c", gens.inpaint.name()},
                         {"b", gens.blend ? gens.blend->name() : "poisson"}}}};
  write_json(out / "swap.json", j);
  return 0;
}

// ---- blend ------------------------------------------------------------------

int cmd_blend(Common& c, const std::string& target, const std::string& source, const std::string& mask,
              bool hair_free_flag, bool labels, const std::string& method) {
  c.load();
  const fs::path out = require_out(c);
  BlendProblem prob{io::load_image(target), io::load_image(source), {}};
  const bool hair_free = hair_free_flag || c.cfg.flag("hair_free").value_or(false);
  prob.free = labels ? free_mask(io::load_mask(mask), hair_free) : io::load_free_mask(mask);
  if (prob.free.size() != prob.target.pixels()) throw InvalidArgument("mask size does not match the target");
  BlendOptions opt;
  opt.tol = c.tolerance();
  opt.method = parse_method(method.empty() ? c.cfg.get("solver").value_or("auto") : method);
  if (auto m = c.cfg.count("max_iter")) opt.max_iter = *m;
  const BlendResult r = blend(prob, opt);
  io::save_image(out, r.image);
  write_json(fs::path(out.string() + ".json"), report_json(r.report));
  return 0;
}

// ---- eval -------------------------------------------------------------------

int cmd_eval(Common& c, const std::string& views_manifest, const std::string& method, bool mean_per_point) {
  c.load();
  if (c.manifest.empty()) throw InvalidArgument("--manifest is required");
  const auto rows = io::load_eval_manifest(c.manifest);
  if (rows.empty()) throw InvalidArgument("evaluation manifest has no rows");
  std::vector<io::ManifestRow> views;
  std::vector<EulerPose> view_poses;
  if (!views_manifest.empty()) {
    views = io::load_manifest(views_manifest);
    for (const auto& v : views) view_poses.push_back(v.pose);
  }
  const auto red = mean_per_point || c.cfg.flag("landmark_mean").value_or(false) ? LandmarkReduction::mean_per_point
                                                                                 : LandmarkReduction::flattened_norm;
  std::vector<SwapEval> per_row(rows.size());
  for_each_job(rows.size(), c.workers(), [&](std::size_t i) {
    const auto& r = rows[i];
    const EulerPose rp = io::load_pose(r.result_pose), tp = io::load_pose(r.target_pose);
    fs::path ref;
    if (r.reference) {
      ref = *r.reference;
    } else {
      if (views.empty()) throw InvalidArgument("row " + std::to_string(i + 1) + " needs --views to pick a reference");
      ref = views[nearest_pose(view_poses, rp)].image;
    }
    SwapEval e;
    e.verification = r.verification;
    e.ssim = ssim(io::load_image(r.result), io::load_image(ref));
    e.euler_err = pose_error(rp, tp);
    e.landmark_err = landmark_error(io::load_landmarks(r.result_landmarks), io::load_landmarks(r.target_landmarks), red);
    per_row[i] = e;
  });
  std::vector<std::string> order;
  std::map<std::string, std::vector<SwapEval>> groups;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!groups.contains(rows[i].video)) order.push_back(rows[i].video);
    groups[rows[i].video].push_back(per_row[i]);
  }
  std::vector<std::vector<SwapEval>> videos;
  for (const auto& v : order) videos.push_back(groups[v]);
  const EvalSummary s = aggregate(videos);
  const std::string csv = summary_csv(s, method);
  if (c.out.empty()) {
    std::cout << csv;
  } else {
    io::write_text(c.out, csv);
    auto ms = [](const MeanStd& m) { return json{{"mean", m.mean}, {"std", m.std}}; };
    json j{{"method", method},  {"videos", s.videos},          {"ssim", ms(s.ssim)},
           {"euler", ms(s.euler)}, {"landmarks", ms(s.landmarks)}, {"landmark_reduction",
                                                                    red == LandmarkReduction::flattened_norm
                                                                        ? "flattened-norm"
                                                                        : "mean-per-point"}};
    j["verification"] = s.verification ? ms(*s.verification) : json(nullptr);
    write_json(fs::path(c.out + ".json"), j);
  }
  return 0;
}

// ---- curate -----------------------------------------------------------------

int cmd_curate(Common& c, std::optional<std::size_t> cap_flag) {
  c.load();
  const auto rows = require_manifest(c);
  const fs::path out = require_out(c);
  std::vector<FrameRecord> frames;
  for (const auto& r : rows) {
    FrameRecord f;
    f.id = r.id;
    f.point = pose_to_plane(r.pose.canonical());
    f.roll = r.pose.roll;
    f.blur = r.blur;
    f.coverage = r.coverage.value_or(1.0);
    f.landmarks = io::load_landmarks(r.landmarks);
    frames.push_back(std::move(f));
  }
  CurationOptions opt;
  opt.coverage_min = c.cfg.number("coverage_min").value_or(kDefaultCoverageMin);
  opt.prune_radius = c.prune();
  opt.blur_threshold = c.cfg.number("blur_threshold");
  const auto kept = prune_frames(frames, opt);
  std::vector<FrameRecord> survivors;
  for (std::size_t k : kept) survivors.push_back(frames[k]);
  const std::size_t cap = cap_flag.value_or(c.cfg.count("frame_cap").value_or(kDefaultFrameCap));
  std::string ids;
  json sel = json::array();
  for (std::size_t k : select_max_variance(survivors, cap)) {
    ids += survivors[k].id + "\n";
    sel.push_back(survivors[k].id);
  }
  io::write_text(out, ids);
  write_json(fs::path(out.string() + ".json"),
             {{"input", rows.size()}, {"after_pruning", kept.size()}, {"cap", cap}, {"selected", sel}});
  return 0;
}

// ---- densify ----------------------------------------------------------------

// Requests: one per line, "id yaw pitch roll landmarks_path".
int cmd_densify(Common& c, const std::string& requests, const std::string& format) {
  c.load();
  const auto rows = require_manifest(c);
  const fs::path out = require_out(c);
  if (requests.empty()) throw InvalidArgument("--requests is required");
  const SwapConfig cfg = swap_config(c);
  const SwapGenerators gens = open_generators(c, cfg);
  const PreparedSource src = prepare_source(load_views(rows), cfg);
  std::unordered_map<std::uint32_t, Image> images;
  for (const auto& v : src.views) images.emplace(v.id, v.image);

  ensure_dir(out);
  std::ostringstream manifest;
  manifest << io::kManifestHeader << "\n";
  for (const auto& r : rows)
    manifest << r.id << ' ' << fs::absolute(r.image).string() << ' ' << fs::absolute(r.landmarks).string() << ' '
             << r.pose.yaw << ' ' << r.pose.pitch << ' ' << r.pose.roll << "\n";
  std::istringstream req(io::read_text(requests));
  const fs::path base = fs::path(requests).parent_path();
  for (std::string line; std::getline(req, line);) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string id, lm;
    EulerPose pose;
    if (!(ls >> id)) continue;
    if (!(ls >> pose.yaw >> pose.pitch >> pose.roll >> lm)) throw InvalidArgument("densify request '" + id + "' is malformed");
    const fs::path lm_path = fs::path(lm).is_absolute() ? fs::path(lm) : base / lm;
    const LandmarkSet p = io::load_landmarks(lm_path);
    const Interpolation it = interpolate_views(src.map, pose, p, images, gens.reenact, cfg.heatmap_sigma);
    const fs::path img = out / (id + "." + format), mask = out / (id + "_mask." + format);
    io::save_image(img, it.image);
    io::save_mask(mask, it.mask);
    manifest << id << ' ' << fs::absolute(img).string() << ' ' << fs::absolute(lm_path).string() << ' ' << pose.yaw
             << ' ' << pose.pitch << ' ' << pose.roll << " mask=" << fs::absolute(mask).string() << "\n";
  }
  io::write_text(out / "manifest.txt", manifest.str());
  return 0;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("fsg");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("fsg: %l: %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("FSG_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"fsg: subject-agnostic face swapping toolkit"};
  app.require_subcommand(1);

  Common common;
  std::string map_path, target, source, mask, method, format = "fsim", views, eval_method = "fsg", requests;
  std::vector<double> pose;
  bool hair_free = false, labels = false, mean_pp = false;
  std::optional<std::size_t> cap;

  auto* build = app.add_subcommand("build-map", "build an appearance map from a view manifest");
  add_common(build, common, false);

  auto* q = app.add_subcommand("query", "locate a pose in an appearance map");
  add_common(q, common, false);
  q->add_option("--map", map_path, "map file (map.fsam)")->required();
  q->add_option("--pose", pose, "yaw pitch roll")->expected(3)->required();

  auto* sw = app.add_subcommand("swap", "swap the source subject into target frames");
  add_common(sw, common, true);
  sw->add_option("--target", target, "target frame manifest");
  sw->add_option("--format", format, "output raster format")->check(CLI::IsMember({"fsim", "png"}));

  auto* bl = app.add_subcommand("blend", "Poisson-blend a source into a target under a mask");
  add_common(bl, common, false);
  bl->add_option("--target", target, "target image")->required();
  bl->add_option("--source", source, "source (guide) image")->required();
  bl->add_option("--mask", mask, "8-bit mask, nonzero = free")->required();
  bl->add_flag("--labels", labels, "read the mask as labels 0/1/2; face is free");
  bl->add_flag("--hair-free", hair_free, "with --labels: hair pixels are solved for too");
  bl->add_option("--solver", method, "auto, direct or cg");

  auto* ev = app.add_subcommand("eval", "score swap results and aggregate per video");
  add_common(ev, common, false);
  ev->add_option("--views", views, "source view manifest for nearest-pose references");
  ev->add_option("--method", eval_method, "method name for the table row");
  ev->add_flag("--landmark-mean", mean_pp, "mean per-point landmark distance instead of the flattened norm");

  auto* cu = app.add_subcommand("curate", "filter and subsample a subject's frames");
  add_common(cu, common, false);
  cu->add_option("--cap", cap, "maximum frames kept");

  auto* de = app.add_subcommand("densify", "synthesize extra views at requested poses");
  add_common(de, common, true);
  de->add_option("--requests", requests, "lines of: id yaw pitch roll landmarks");
  de->add_option("--format", format, "output raster format")->check(CLI::IsMember({"fsim", "png"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorKind::validation);
  }

  try {
    if (*build) return cmd_build_map(common);
    if (*q) return cmd_query(common, map_path, pose);
    if (*sw) return cmd_swap(common, target, format);
    if (*bl) return cmd_blend(common, target, source, mask, hair_free, labels, method);
    if (*ev) return cmd_eval(common, views, eval_method, mean_pp);
    if (*cu) return cmd_curate(common, cap);
    if (*de) return cmd_densify(common, requests, format);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(e.kind());
  } catch (const nlohmann::json::exception& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(ErrorKind::io);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
