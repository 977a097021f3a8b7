#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "fsg/io/fsim.hpp"
#include "fsg/io/text_formats.hpp"
#include "fsg/pipeline/swap.hpp"
#include "fsg/pipeline/synthetic.hpp"
#include "fsg/reenact.hpp"

namespace support {

using namespace fsg;
namespace fs = std::filesystem;

// Nine-point head in pixel units, camera frame, centroid at the origin.
inline std::vector<Point3> head_template() {
  std::vector<Point3> v{{-7, -6, 4}, {7, -6, 4}, {0, 1, 9}, {-6, 8, 4}, {6, 8, 4},
                        {0, 15, 3},  {0, -13, 5}, {-13, 2, 0}, {13, 2, 0}};
  Point3 c;
  for (const auto& p : v) {
    c.x += p.x / 9.0;
    c.y += p.y / 9.0;
    c.z += p.z / 9.0;
  }
  for (auto& p : v) p = {p.x - c.x, p.y - c.y, p.z - c.z};
  return v;
}

inline Landmark3DSet head_landmarks3d(const EulerPose& pose, Point3 center = {32, 32, 0}) {
  const Rotation r = rotation_from_euler(pose);
  Landmark3DSet v;
  for (const auto& p : head_template()) {
    const Point3 q = rotate(r, p);
    v.points.push_back({q.x + center.x, q.y + center.y, q.z + center.z});
  }
  return v;
}

inline LandmarkSet head_landmarks(const EulerPose& pose, Point3 center = {32, 32, 0}) {
  return project(head_landmarks3d(pose, center));
}

inline SourceView head_view(std::uint32_t id, const EulerPose& pose, std::size_t size = 64) {
  SourceView v;
  v.id = id;
  v.pose = pose;
  const Point3 c{size / 2.0, size / 2.0, 0};
  v.landmarks3d = head_landmarks3d(pose, c);
  v.landmarks = project(*v.landmarks3d);
  v.image = synthetic::render_face(v.landmarks, size, size);
  return v;
}

inline TargetFrame head_frame(const EulerPose& pose, std::size_t size = 64, bool with3d = true) {
  const SourceView v = head_view(0, pose, size);
  TargetFrame t;
  t.image = v.image;
  t.landmarks = v.landmarks;
  t.pose = pose;
  if (with3d) t.landmarks3d = v.landmarks3d;
  return t;
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "fsg-test-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw IoError("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

struct CommandResult {
  int status = -1;
  std::string output;
};

// Runs through /bin/sh; stdout is captured, stderr passes through.
inline CommandResult run(const std::string& cmd) {
  CommandResult r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), p)) > 0;) r.output.append(buf.data(), n);
  const int st = ::pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

inline std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

// Writes views as FSIM images plus landmark files and a manifest; returns the manifest path.
inline fs::path write_manifest(const fs::path& dir, const std::string& name, const std::vector<SourceView>& views) {
  fs::create_directories(dir / name);
  std::string text = std::string(io::kManifestHeader) + "\n";
  for (const auto& v : views) {
    const std::string id = "v" + std::to_string(v.id);
    io::save_fsim(dir / name / (id + ".fsim"), v.image);
    io::write_text(dir / name / (id + ".lm"), io::format_landmarks(v.landmarks));
    text += id + " " + name + "/" + id + ".fsim " + name + "/" + id + ".lm " + std::to_string(v.pose.yaw) + " " +
            std::to_string(v.pose.pitch) + " " + std::to_string(v.pose.roll);
    if (v.landmarks3d) {
      std::string t = std::to_string(v.landmarks3d->size());
      char buf[96];
      for (const auto& q : v.landmarks3d->points) {
        std::snprintf(buf, sizeof buf, " %.17g %.17g %.17g", q.x, q.y, q.z);
        t += buf;
      }
      io::write_text(dir / name / (id + ".lm3"), t + "\n");
      text += " lm3d=" + name + "/" + id + ".lm3";
    }
    text += "\n";
  }
  const fs::path m = dir / (name + ".txt");
  io::write_text(m, text);
  return m;
}

inline Image constant_image(double v, std::size_t size = 16) {
  Image img(size, size, 3);
  for (double& x : img.data()) x = v;
  return img;
}

struct EvalFixture {
  fs::path manifest;
  fs::path views;
  std::string expected_csv;
};

// Two videos of constant-colour results, so every frame metric has a closed form.
// The expected table is recomputed here by hand.
inline EvalFixture write_eval_fixture(const fs::path& dir) {
  struct Row {
    const char* video;
    double result, reference;  // reference < 0: picked from the view manifest
    EulerPose rp, tp;
    Point2 dl;  // offset applied to the second of three landmarks
    std::optional<double> ver;
  };
  const std::vector<Row> rows{
      {"a", 0.5, 0.25, {10, 0, 0}, {13, 4, 0}, {3, 4}, 0.4},
      {"a", 0.75, 0.75, {0, 0, 0}, {0, 0, 2}, {0, 1}, 0.6},
      {"b", 0.25, -1, {28, 1, 0}, {28, 1, 0}, {6, 8}, std::nullopt},
  };
  // Views for the "-" reference: the one nearest (28, 1, 0) is the 0.5 image.
  const std::vector<std::pair<EulerPose, double>> vs{{{-20, 0, 0}, 0.125}, {{30, 0, 0}, 0.5}};
  std::string vm = std::string(io::kManifestHeader) + "\n";
  for (std::size_t k = 0; k < vs.size(); ++k) {
    const std::string id = "w" + std::to_string(k);
    io::save_fsim(dir / (id + ".fsim"), constant_image(vs[k].second));
    io::write_text(dir / (id + ".lm"), "3 0 0 1 0 0 1\n");
    vm += id + " " + id + ".fsim " + id + ".lm " + io::format_pose(vs[k].first) + "\n";
  }
  io::write_text(dir / "views.txt", vm);

  auto ssim_c = [](double a, double b) {
    const double c1 = 1e-4, c2 = 9e-4;
    return (2 * a * b + c1) * c2 / ((a * a + b * b + c1) * c2);
  };
  std::string em = std::string(io::kEvalHeader) + "\n";
  std::map<std::string, std::vector<std::array<double, 4>>> per;
  std::vector<std::string> order;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Row& r = rows[k];
    const std::string n = "f" + std::to_string(k);
    io::save_fsim(dir / (n + ".fsim"), constant_image(r.result));
    std::string ref = "-";
    double refv = 0.5;
    if (r.reference >= 0) {
      ref = n + "_ref.fsim";
      refv = r.reference;
      io::save_fsim(dir / ref, constant_image(r.reference));
    }
    io::write_text(dir / (n + ".rp"), io::format_pose(r.rp));
    io::write_text(dir / (n + ".tp"), io::format_pose(r.tp));
    io::write_text(dir / (n + ".rl"), "3 1 1 5 5 9 1\n");
    char tl[96];
    std::snprintf(tl, sizeof tl, "3 1 1 %.17g %.17g 9 1\n", 5 + r.dl.x, 5 + r.dl.y);
    io::write_text(dir / (n + ".tl"), tl);
    em += std::string(r.video) + " " + n + ".fsim " + ref + " " + n + ".rp " + n + ".tp " + n + ".rl " + n + ".tl";
    if (r.ver) em += " verification=" + std::to_string(*r.ver);
    em += "\n";
    if (!per.count(r.video)) order.push_back(r.video);
    const double de = std::sqrt((r.rp.yaw - r.tp.yaw) * (r.rp.yaw - r.tp.yaw) +
                                (r.rp.pitch - r.tp.pitch) * (r.rp.pitch - r.tp.pitch) +
                                (r.rp.roll - r.tp.roll) * (r.rp.roll - r.tp.roll));
    per[r.video].push_back({ssim_c(r.result, refv), de, std::hypot(r.dl.x, r.dl.y), r.ver ? *r.ver : -1.0});
  }
  io::write_text(dir / "eval.txt", em);

  // Per-video means, then mean and population std over videos.
  std::array<std::vector<double>, 4> cols;
  for (const auto& v : order) {
    const auto& fr = per[v];
    std::array<double, 4> m{};
    int nv = 0;
    for (const auto& f : fr) {
      for (int c = 0; c < 3; ++c) m[c] += f[c] / static_cast<double>(fr.size());
      if (f[3] >= 0) {
        m[3] += f[3];
        ++nv;
      }
    }
    for (int c = 0; c < 3; ++c) cols[c].push_back(m[c]);
    if (nv) cols[3].push_back(m[3] / nv);
  }
  auto fmt = [](const std::vector<double>& v) {
    double mean = 0, var = 0;
    for (double x : v) mean += x / static_cast<double>(v.size());
    for (double x : v) var += (x - mean) * (x - mean) / static_cast<double>(v.size());
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f ± %.2f", mean, std::sqrt(var));
    return std::string(buf);
  };
  EvalFixture out;
  out.manifest = dir / "eval.txt";
  out.views = dir / "views.txt";
  out.expected_csv = "method,verification,SSIM,euler,landmarks\nfsg," + fmt(cols[3]) + "," + fmt(cols[0]) + "," +
                     fmt(cols[1]) + "," + fmt(cols[2]) + "\n";
  return out;
}

}  // namespace support
