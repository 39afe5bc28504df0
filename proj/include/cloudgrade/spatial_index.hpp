#pragma once

#include <utility>
#include <vector>

#include "cloudgrade/point_cloud.hpp"

namespace cloudgrade {

/// Neighborhood metric: full 3D euclidean ball, or a vertical cylinder
/// (distance measured in the xy-plane only, any z).
enum class QueryMode { Ball3D, Disc2D };

/// Immutable kd-tree over a point cloud. Queries return exactly what a
/// brute-force scan returns: radius queries use an inclusive boundary
/// (d <= r) and nearest-neighbor ties are broken by the lowest point index.
/// Safe for concurrent read queries once built.
class SpatialIndex {
 public:
  /// Throws EmptyCloud for an empty input. The index keeps its own copy of
  /// the coordinates.
  explicit SpatialIndex(const PointCloud& cloud);
  explicit SpatialIndex(const std::vector<Vec3>& points);

  std::size_t size() const { return pts_.size(); }

  /// Indices (ascending) of all points within distance r of q under `mode`.
  /// Throws InvalidRadius for r < 0.
  std::vector<int> radius_query(const Vec3& q, double r, QueryMode mode) const;

  /// Visits every point within distance r of q; fn(original_index, d2).
  /// Visit order is unspecified. Avoids building a result vector.
  template <typename Fn>
  void for_each_in_radius(const Vec3& q, double r, QueryMode mode, Fn&& fn) const;

  /// (index, distance) of the closest point to q under `mode`; ties by
  /// lowest index.
  std::pair<int, double> nearest_neighbor(const Vec3& q, QueryMode mode) const;

  const Vec3& point(int original_index) const;

 private:
  struct Node {
    Vec3 bb_min, bb_max;
    int begin = 0, end = 0;    // leaf range into pts_/orig_
    int left = -1, right = -1; // children; leaf iff left < 0
  };

  void build(const std::vector<Vec3>& src, int node, int begin, int end);
  double node_dist2(const Node& n, const Vec3& q, QueryMode mode) const;
  void nn_recurse(int node, const Vec3& q, QueryMode mode, double& best_d2, int& best_idx) const;

  static double point_dist2(const Vec3& a, const Vec3& b, QueryMode mode) {
    const double dx = a.x() - b.x();
    const double dy = a.y() - b.y();
    if (mode == QueryMode::Disc2D) return dx * dx + dy * dy;
    const double dz = a.z() - b.z();
    return dx * dx + dy * dy + dz * dz;
  }

  std::vector<Vec3> pts_;   // reordered coordinates
  std::vector<int> orig_;   // pts_[i] corresponds to input point orig_[i]
  std::vector<int> lookup_; // original index -> slot in pts_
  std::vector<Node> nodes_;

  static constexpr int kLeafSize = 16;
};

template <typename Fn>
void SpatialIndex::for_each_in_radius(const Vec3& q, double r, QueryMode mode, Fn&& fn) const {
  if (r < 0.0) throw InvalidRadius("radius must be >= 0");
  const double r2 = r * r;
  // Iterative traversal; explicit stack keeps queries allocation-light.
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[stack[--top]];
    if (node_dist2(n, q, mode) > r2) continue;
    if (n.left < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        const double d2 = point_dist2(pts_[i], q, mode);
        if (d2 <= r2) fn(orig_[i], d2);
      }
    } else {
      stack[top++] = n.left;
      stack[top++] = n.right;
    }
  }
}

/// Convenience: build an index and run pointcloud-level queries. Most call
/// sites keep a SpatialIndex; these exist for one-shot use.
SpatialIndex build_index(const PointCloud& cloud);

}  // namespace cloudgrade
