#pragma once

// Plain-text inputs. Blank lines and '#' comments are ignored everywhere
// except the manifest's first line, which names the schema.
//
//   landmarks    N x_1 y_1 ... x_N y_N
//   landmarks3d  N x_1 y_1 z_1 ... x_N y_N z_N
//   pose         yaw pitch roll            (degrees)
//   config       key = value               (one per line)
//   manifest     # fsg-manifest v1
//                id image landmarks yaw pitch roll [mask=P] [blur=X] [coverage=X] [lm3d=P]
//   eval         # fsg-eval v1
//                video result reference result_pose target_pose result_lm target_lm [verification=X]
//
// Relative paths in manifests resolve against the manifest's directory.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fsg/core.hpp"

namespace fsg::io {

namespace fs = std::filesystem;

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed for " + p.string());
}

namespace detail {

inline std::string strip_comment(std::string line) {
  if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
  return line;
}

inline std::vector<std::string> tokens(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    std::istringstream ls(strip_comment(line));
    for (std::string t; ls >> t;) out.push_back(t);
  }
  return out;
}

inline double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument(what + ": '" + s + "' is not a number");
  }
  if (used != s.size() || !std::isfinite(v)) throw InvalidArgument(what + ": '" + s + "' is not a finite number");
  return v;
}

inline std::size_t to_count(const std::string& s, const std::string& what) {
  const double v = to_double(s, what);
  if (v < 0 || v != std::floor(v)) throw InvalidArgument(what + ": '" + s + "' is not a count");
  return static_cast<std::size_t>(v);
}

}  // namespace detail

inline LandmarkSet parse_landmarks(const std::string& text, const std::string& what = "landmarks") {
  const auto t = detail::tokens(text);
  if (t.empty()) throw InvalidArgument(what + ": empty");
  const std::size_t n = detail::to_count(t[0], what);
  if (t.size() != 1 + 2 * n) throw InvalidArgument(what + ": expected " + std::to_string(2 * n) + " coordinates");
  LandmarkSet p;
  for (std::size_t k = 0; k < n; ++k)
    p.points.push_back({detail::to_double(t[1 + 2 * k], what), detail::to_double(t[2 + 2 * k], what)});
  validate(p);
  return p;
}

inline Landmark3DSet parse_landmarks3d(const std::string& text, const std::string& what = "3D landmarks") {
  const auto t = detail::tokens(text);
  if (t.empty()) throw InvalidArgument(what + ": empty");
  const std::size_t n = detail::to_count(t[0], what);
  if (t.size() != 1 + 3 * n) throw InvalidArgument(what + ": expected " + std::to_string(3 * n) + " coordinates");
  Landmark3DSet v;
  for (std::size_t k = 0; k < n; ++k)
    v.points.push_back({detail::to_double(t[1 + 3 * k], what), detail::to_double(t[2 + 3 * k], what),
                        detail::to_double(t[3 + 3 * k], what)});
  validate(v);
  return v;
}

inline EulerPose parse_pose(const std::string& text, const std::string& what = "pose") {
  const auto t = detail::tokens(text);
  if (t.size() != 3) throw InvalidArgument(what + ": expected yaw pitch roll");
  EulerPose e{detail::to_double(t[0], what), detail::to_double(t[1], what), detail::to_double(t[2], what)};
  validate(e);
  return e;
}

inline std::string format_landmarks(const LandmarkSet& p) {
  std::ostringstream out;
  out.precision(17);
  out << p.size();
  for (const auto& q : p.points) out << ' ' << q.x << ' ' << q.y;
  out << '\n';
  return out.str();
}

inline std::string format_pose(const EulerPose& e) {
  std::ostringstream out;
  out.precision(17);
  out << e.yaw << ' ' << e.pitch << ' ' << e.roll << '\n';
  return out.str();
}

inline LandmarkSet load_landmarks(const fs::path& p) { return parse_landmarks(read_text(p), p.string()); }
inline Landmark3DSet load_landmarks3d(const fs::path& p) { return parse_landmarks3d(read_text(p), p.string()); }
inline EulerPose load_pose(const fs::path& p) { return parse_pose(read_text(p), p.string()); }

/// key = value settings. Unknown keys are the caller's business.
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text, const std::string& what = "config") {
    Config c;
    std::istringstream lines(text);
    std::size_t lineno = 0;
    for (std::string line; std::getline(lines, line);) {
      ++lineno;
      line = detail::strip_comment(line);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw InvalidArgument(what + ":" + std::to_string(lineno) + ": expected key = value");
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      if (key.empty()) throw InvalidArgument(what + ":" + std::to_string(lineno) + ": empty key");
      c.values_[key] = value;
    }
    return c;
  }

  static Config load(const fs::path& p) { return parse(read_text(p), p.string()); }

  bool has(const std::string& k) const { return values_.contains(k); }
  void set(const std::string& k, const std::string& v) { values_[k] = v; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  std::optional<std::string> get(const std::string& k) const {
    auto it = values_.find(k);
    return it == values_.end() ? std::nullopt : std::optional(it->second);
  }
  std::optional<double> number(const std::string& k) const {
    auto v = get(k);
    return v ? std::optional(detail::to_double(*v, "config key '" + k + "'")) : std::nullopt;
  }
  std::optional<std::size_t> count(const std::string& k) const {
    auto v = get(k);
    return v ? std::optional(detail::to_count(*v, "config key '" + k + "'")) : std::nullopt;
  }
  std::optional<bool> flag(const std::string& k) const {
    auto v = get(k);
    if (!v) return std::nullopt;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw InvalidArgument("config key '" + k + "': '" + *v + "' is not a boolean");
  }

 private:
  std::map<std::string, std::string> values_;
};

inline constexpr const char* kManifestHeader = "# fsg-manifest v1";
inline constexpr const char* kEvalHeader = "# fsg-eval v1";

struct ManifestRow {
  std::string id;
  fs::path image;
  fs::path landmarks;
  EulerPose pose;
  std::optional<fs::path> mask;
  std::optional<double> blur;
  std::optional<double> coverage;
  std::optional<fs::path> landmarks3d;
};

struct EvalRow {
  std::string video;
  fs::path result;
  std::optional<fs::path> reference;  // "-" picks the nearest view by pose
  fs::path result_pose;
  fs::path target_pose;
  fs::path result_landmarks;
  fs::path target_landmarks;
  std::optional<double> verification;
};

namespace detail {

// Rows after the schema line, split into fields, each with its line number.
inline std::vector<std::pair<std::size_t, std::vector<std::string>>> rows(const std::string& text,
                                                                          const std::string& header,
                                                                          const std::string& what) {
  std::istringstream lines(text);
  std::string first;
  std::getline(lines, first);
  if (!first.empty() && first.back() == '\r') first.pop_back();
  if (first != header) throw InvalidArgument(what + ": first line must be '" + header + "'");
  std::vector<std::pair<std::size_t, std::vector<std::string>>> out;
  std::size_t lineno = 1;
  for (std::string line; std::getline(lines, line);) {
    ++lineno;
    std::istringstream ls(strip_comment(line));
    std::vector<std::string> f;
    for (std::string t; ls >> t;) f.push_back(t);
    if (!f.empty()) out.emplace_back(lineno, std::move(f));
  }
  return out;
}

inline fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path q(p);
  return q.is_absolute() ? q : base / q;
}

}  // namespace detail

inline std::vector<ManifestRow> parse_manifest(const std::string& text, const fs::path& base,
                                               const std::string& what = "manifest") {
  std::vector<ManifestRow> out;
  for (auto& [lineno, f] : detail::rows(text, kManifestHeader, what)) {
    const std::string at = what + ":" + std::to_string(lineno);
    if (f.size() < 6) throw InvalidArgument(at + ": expected id image landmarks yaw pitch roll");
    ManifestRow r;
    r.id = f[0];
    r.image = detail::resolve(base, f[1]);
    r.landmarks = detail::resolve(base, f[2]);
    r.pose = {detail::to_double(f[3], at), detail::to_double(f[4], at), detail::to_double(f[5], at)};
    for (std::size_t k = 6; k < f.size(); ++k) {
      const auto eq = f[k].find('=');
      if (eq == std::string::npos) throw InvalidArgument(at + ": optional fields are key=value");
      const std::string key = f[k].substr(0, eq), val = f[k].substr(eq + 1);
      if (key == "mask")
        r.mask = detail::resolve(base, val);
      else if (key == "blur")
        r.blur = detail::to_double(val, at);
      else if (key == "coverage")
        r.coverage = detail::to_double(val, at);
      else if (key == "lm3d")
        r.landmarks3d = detail::resolve(base, val);
      else
        throw InvalidArgument(at + ": unknown field '" + key + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<ManifestRow> load_manifest(const fs::path& p) {
  return parse_manifest(read_text(p), p.parent_path(), p.string());
}

inline std::vector<EvalRow> parse_eval_manifest(const std::string& text, const fs::path& base,
                                                const std::string& what = "eval manifest") {
  std::vector<EvalRow> out;
  for (auto& [lineno, f] : detail::rows(text, kEvalHeader, what)) {
    const std::string at = what + ":" + std::to_string(lineno);
    if (f.size() < 7 || f.size() > 8)
      throw InvalidArgument(at + ": expected video result reference result_pose target_pose result_lm target_lm");
    EvalRow r;
    r.video = f[0];
    r.result = detail::resolve(base, f[1]);
    if (f[2] != "-") r.reference = detail::resolve(base, f[2]);
    r.result_pose = detail::resolve(base, f[3]);
    r.target_pose = detail::resolve(base, f[4]);
    r.result_landmarks = detail::resolve(base, f[5]);
    r.target_landmarks = detail::resolve(base, f[6]);
    if (f.size() == 8) {
      if (f[7].rfind("verification=", 0) != 0) throw InvalidArgument(at + ": unknown field '" + f[7] + "'");
      r.verification = detail::to_double(f[7].substr(13), at);
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<EvalRow> load_eval_manifest(const fs::path& p) {
  return parse_eval_manifest(read_text(p), p.parent_path(), p.string());
}

}  // namespace fsg::io
