#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fsg/core.hpp"

namespace fsg::geometry {

/// Incrementally built 2-d tree over the (yaw, pitch) plane, used for the
/// greedy "is anything already kept within r" test during view pruning.
/// Nodes split alternately on yaw and pitch; no rebalancing.
class PlaneKdTree {
 public:
  void insert(const PlanePoint& p, std::size_t payload) {
    nodes_.push_back({p, payload, -1, -1});
    const int id = static_cast<int>(nodes_.size()) - 1;
    if (id == 0) return;
    int cur = 0;
    int depth = 0;
    for (;;) {
      Node& n = nodes_[cur];
      const bool left = coord(p, depth) < coord(n.point, depth);
      int& child = left ? n.left : n.right;
      if (child < 0) {
        child = id;
        return;
      }
      cur = child;
      ++depth;
    }
  }

  /// True if some stored point q has angular_distance(p, q) < radius.
  bool any_within(const PlanePoint& p, double radius) const {
    return !nodes_.empty() && search(0, 0, p, radius);
  }

  /// Payloads of all stored points with distance < radius.
  std::vector<std::size_t> within(const PlanePoint& p, double radius) const {
    std::vector<std::size_t> out;
    if (!nodes_.empty()) collect(0, 0, p, radius, out);
    return out;
  }

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    PlanePoint point;
    std::size_t payload;
    int left;
    int right;
  };

  static double coord(const PlanePoint& p, int depth) { return depth % 2 == 0 ? p.yaw : p.pitch; }

  bool search(int id, int depth, const PlanePoint& p, double radius) const {
    const Node& n = nodes_[id];
    if (angular_distance(p, n.point) < radius) return true;
    const double diff = coord(p, depth) - coord(n.point, depth);
    const int near = diff < 0 ? n.left : n.right;
    const int far = diff < 0 ? n.right : n.left;
    if (near >= 0 && search(near, depth + 1, p, radius)) return true;
    // the slab test is non-strict so no candidate at distance < radius is skipped
    return far >= 0 && std::fabs(diff) <= radius && search(far, depth + 1, p, radius);
  }

  void collect(int id, int depth, const PlanePoint& p, double radius, std::vector<std::size_t>& out) const {
    const Node& n = nodes_[id];
    if (angular_distance(p, n.point) < radius) out.push_back(n.payload);
    const double diff = coord(p, depth) - coord(n.point, depth);
    const int near = diff < 0 ? n.left : n.right;
    const int far = diff < 0 ? n.right : n.left;
    if (near >= 0) collect(near, depth + 1, p, radius, out);
    if (far >= 0 && std::fabs(diff) <= radius) collect(far, depth + 1, p, radius, out);
  }

  std::vector<Node> nodes_;
};

}  // namespace fsg::geometry
