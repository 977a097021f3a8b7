#pragma once

// Appearance map on disk (little-endian):
//   "FSAM" | u32 version = 1 | f64 prune radius
//   u32 views | u32 corners (4) | u32 triangles
//   views:     f64 yaw, f64 pitch, u32 id, u32 flags (bit 0: mirrored)
//   corners:   f64 yaw, f64 pitch
//   triangles: u32 a, u32 b, u32 c

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "json.hpp"

#include "fsg/appearance.hpp"
#include "fsg/io/fsim.hpp"

namespace fsg::io {

struct StoredMap {
  AppearanceMap map;
  double prune_radius = kDefaultPruneRadius;
};

inline std::vector<std::uint8_t> encode_map(const StoredMap& s) {
  std::vector<std::uint8_t> b{'F', 'S', 'A', 'M'};
  auto u32 = [&](std::uint32_t v) {
    for (int k = 0; k < 4; ++k) b.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  };
  auto f64 = [&](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int k = 0; k < 8; ++k) b.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
  };
  u32(1);
  f64(s.prune_radius);
  u32(static_cast<std::uint32_t>(s.map.views.size()));
  u32(4);
  u32(static_cast<std::uint32_t>(s.map.mesh.size()));
  for (const auto& v : s.map.views) {
    f64(v.point.yaw);
    f64(v.point.pitch);
    u32(v.id);
    u32(v.flipped ? 1u : 0u);
  }
  for (const auto& c : s.map.boundary) {
    f64(c.yaw);
    f64(c.pitch);
  }
  for (const auto& t : s.map.mesh)
    for (auto v : t) u32(v);
  return b;
}

inline StoredMap decode_map(std::span<const std::uint8_t> b, const std::string& what = "map data") {
  std::size_t off = 0;
  auto need = [&](std::size_t n) {
    if (b.size() - off < n) throw IoError(what + ": truncated appearance map");
  };
  auto u32 = [&] {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= std::uint32_t{b[off + k]} << (8 * k);
    off += 4;
    return v;
  };
  auto f64 = [&] {
    need(8);
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= std::uint64_t{b[off + k]} << (8 * k);
    off += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  };
  need(4);
  if (std::memcmp(b.data(), "FSAM", 4) != 0) throw IoError(what + ": not an appearance map");
  off = 4;
  if (u32() != 1) throw IoError(what + ": unsupported map version");
  StoredMap s;
  s.prune_radius = f64();
  const std::uint32_t nv = u32(), nc = u32(), nt = u32();
  if (nc != 4) throw IoError(what + ": expected four boundary corners");
  if (nv > (1u << 20) || nt > (1u << 22)) throw IoError(what + ": implausible map size");
  for (std::uint32_t i = 0; i < nv; ++i) {
    ViewPoint v;
    v.point.yaw = f64();
    v.point.pitch = f64();
    v.id = u32();
    v.flipped = (u32() & 1u) != 0;
    s.map.views.push_back(v);
  }
  for (auto& c : s.map.boundary) {
    c.yaw = f64();
    c.pitch = f64();
  }
  for (std::uint32_t i = 0; i < nt; ++i) {
    geometry::Triangle t{u32(), u32(), u32()};
    for (auto v : t)
      if (v >= nv + 4) throw IoError(what + ": triangle references a missing vertex");
    s.map.mesh.push_back(t);
  }
  if (off != b.size()) throw IoError(what + ": trailing bytes");
  return s;
}

inline nlohmann::json map_to_json(const StoredMap& s) {
  nlohmann::json j;
  j["prune_radius"] = s.prune_radius;
  j["views"] = nlohmann::json::array();
  for (const auto& v : s.map.views)
    j["views"].push_back({{"id", v.id}, {"yaw", v.point.yaw}, {"pitch", v.point.pitch}, {"mirrored", v.flipped}});
  j["corners"] = nlohmann::json::array();
  for (const auto& c : s.map.boundary) j["corners"].push_back({c.yaw, c.pitch});
  j["triangles"] = s.map.mesh;
  return j;
}

inline StoredMap load_map(const std::filesystem::path& p) { return decode_map(read_bytes(p), p.string()); }
inline void save_map(const std::filesystem::path& p, const StoredMap& s) { write_bytes(p, encode_map(s)); }

}  // namespace fsg::io
