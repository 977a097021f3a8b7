#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "fsg/core.hpp"
#include "fsg/geometry/predicates.hpp"

namespace fsg::geometry {

using Triangle = std::array<std::uint32_t, 3>;

/// Delaunay triangulation of points inside the square [lo, hi]^2 together with
/// the square's four corners.
///
/// Incremental insertion with Lawson flips, all decisions made by exact
/// predicates. Vertex i < points.size() refers to points[i]; the corners get
/// indices n..n+3 in the order (lo,lo), (hi,lo), (hi,hi), (lo,hi). Triangles
/// are counter-clockwise, rotated to start at their smallest index and sorted.
class BoxDelaunay {
 public:
  BoxDelaunay(std::span<const Point2> points, double lo, double hi) {
    if (!(lo < hi)) throw InvalidArgument("triangulation box is empty");
    const auto n = static_cast<std::uint32_t>(points.size());
    vertices_.assign(points.begin(), points.end());
    for (const auto& p : vertices_)
      if (!(p.x >= lo && p.x <= hi && p.y >= lo && p.y <= hi))
        throw OutOfRange("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") outside the triangulation box");
    vertices_.push_back({lo, lo});
    vertices_.push_back({hi, lo});
    vertices_.push_back({hi, hi});
    vertices_.push_back({lo, hi});

    add({n, n + 1, n + 2});
    add({n, n + 2, n + 3});
    for (std::uint32_t i = 0; i < n; ++i) insert(i);

    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!alive_[t]) continue;
      Triangle tri = tris_[t];
      std::rotate(tri.begin(), std::min_element(tri.begin(), tri.end()), tri.end());
      result_.push_back(tri);
    }
    std::sort(result_.begin(), result_.end());
  }

  const std::vector<Triangle>& triangles() const noexcept { return result_; }
  const std::vector<Point2>& vertices() const noexcept { return vertices_; }

 private:
  static std::uint64_t key(std::uint32_t a, std::uint32_t b) { return (std::uint64_t{a} << 32) | b; }

  int add(Triangle t) {
    const int id = static_cast<int>(tris_.size());
    tris_.push_back(t);
    alive_.push_back(true);
    for (int e = 0; e < 3; ++e) edges_[key(t[e], t[(e + 1) % 3])] = id;
    return id;
  }

  void remove(int id) {
    alive_[id] = false;
    const Triangle& t = tris_[id];
    for (int e = 0; e < 3; ++e) edges_.erase(key(t[e], t[(e + 1) % 3]));
  }

  int owner(std::uint32_t a, std::uint32_t b) const {
    auto it = edges_.find(key(a, b));
    return it == edges_.end() ? -1 : it->second;
  }

  // apex of the triangle that owns directed edge (a, b)
  std::uint32_t apex(int id, std::uint32_t a, std::uint32_t b) const {
    for (std::uint32_t v : tris_[id])
      if (v != a && v != b) return v;
    return a;
  }

  void insert(std::uint32_t pi) {
    const Point2 p = vertices_[pi];
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!alive_[t]) continue;
      const Triangle tri = tris_[t];
      std::array<int, 3> s{};
      bool outside = false;
      int zeros = 0;
      for (int e = 0; e < 3; ++e) {
        s[e] = orient(vertices_[tri[e]], vertices_[tri[(e + 1) % 3]], p);
        if (s[e] < 0) outside = true;
        if (s[e] == 0) ++zeros;
      }
      if (outside) continue;
      if (zeros >= 2)
        throw InvalidArgument("duplicate point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") in triangulation");

      std::vector<std::pair<std::uint32_t, std::uint32_t>> pending;
      if (zeros == 0) {
        const auto [a, b, c] = tri;
        remove(static_cast<int>(t));
        add({a, b, pi});
        add({b, c, pi});
        add({c, a, pi});
        pending = {{a, b}, {b, c}, {c, a}};
      } else {
        int e = 0;
        while (s[e] != 0) ++e;
        const std::uint32_t a = tri[e], b = tri[(e + 1) % 3], c = tri[(e + 2) % 3];
        const int u = owner(b, a);
        remove(static_cast<int>(t));
        add({b, c, pi});
        add({c, a, pi});
        pending = {{b, c}, {c, a}};
        if (u >= 0) {
          const std::uint32_t d = apex(u, b, a);
          remove(u);
          add({a, d, pi});
          add({d, b, pi});
          pending.push_back({a, d});
          pending.push_back({d, b});
        }
      }
      legalize(pi, std::move(pending));
      return;
    }
    throw OutOfRange("point not covered by the triangulation");
  }

  // Restores the empty-circumcircle property around the new vertex pi. Each
  // pending edge (a, b) belongs to triangle (a, b, pi).
  void legalize(std::uint32_t pi, std::vector<std::pair<std::uint32_t, std::uint32_t>> stack) {
    while (!stack.empty()) {
      const auto [a, b] = stack.back();
      stack.pop_back();
      const int t = owner(a, b);
      const int u = owner(b, a);
      if (t < 0 || u < 0) continue;
      const std::uint32_t d = apex(u, b, a);
      if (incircle(vertices_[a], vertices_[b], vertices_[pi], vertices_[d]) <= 0) continue;
      remove(t);
      remove(u);
      add({a, d, pi});
      add({d, b, pi});
      stack.push_back({a, d});
      stack.push_back({d, b});
    }
  }

  std::vector<Point2> vertices_;
  std::vector<Triangle> tris_;
  std::vector<bool> alive_;
  std::unordered_map<std::uint64_t, int> edges_;
  std::vector<Triangle> result_;
};

}  // namespace fsg::geometry
