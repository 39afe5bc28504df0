#include "cloudgrade/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cloudgrade {

SpatialIndex::SpatialIndex(const PointCloud& cloud) : SpatialIndex(cloud.points) {}

SpatialIndex::SpatialIndex(const std::vector<Vec3>& points) {
  if (points.empty()) throw EmptyCloud("cannot build a spatial index over an empty cloud");
  orig_.resize(points.size());
  std::iota(orig_.begin(), orig_.end(), 0);
  nodes_.reserve(2 * points.size() / kLeafSize + 2);
  nodes_.emplace_back();
  build(points, 0, 0, static_cast<int>(points.size()));
  pts_.resize(points.size());
  lookup_.resize(points.size());
  for (std::size_t i = 0; i < orig_.size(); ++i) {
    pts_[i] = points[orig_[i]];
    lookup_[orig_[i]] = static_cast<int>(i);
  }
}

const Vec3& SpatialIndex::point(int original_index) const {
  return pts_[lookup_[original_index]];
}

void SpatialIndex::build(const std::vector<Vec3>& src, int node, int begin, int end) {
  Node& n0 = nodes_[node];
  n0.begin = begin;
  n0.end = end;
  Aabb box;
  for (int i = begin; i < end; ++i) box.expand(src[orig_[i]]);
  n0.bb_min = box.min;
  n0.bb_max = box.max;
  if (end - begin <= kLeafSize) return;

  const Vec3 ext = box.extent();
  int axis = 0;
  if (ext.y() > ext.x()) axis = 1;
  if (ext.z() > ext[axis]) axis = 2;
  const int mid = begin + (end - begin) / 2;

  // Tie-break on the original index so duplicate coordinates build
  // deterministically.
  std::nth_element(orig_.begin() + begin, orig_.begin() + mid, orig_.begin() + end,
                   [&src, axis](int a, int b) {
                     if (src[a][axis] != src[b][axis]) return src[a][axis] < src[b][axis];
                     return a < b;
                   });

  const int left = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  nodes_.emplace_back();
  nodes_[node].left = left;
  nodes_[node].right = left + 1;
  build(src, left, begin, mid);
  build(src, left + 1, mid, end);
}

double SpatialIndex::node_dist2(const Node& n, const Vec3& q, QueryMode mode) const {
  double d2 = 0.0;
  const int dims = (mode == QueryMode::Disc2D) ? 2 : 3;
  for (int a = 0; a < dims; ++a) {
    double d = 0.0;
    if (q[a] < n.bb_min[a]) d = n.bb_min[a] - q[a];
    else if (q[a] > n.bb_max[a]) d = q[a] - n.bb_max[a];
    d2 += d * d;
  }
  return d2;
}

std::vector<int> SpatialIndex::radius_query(const Vec3& q, double r, QueryMode mode) const {
  std::vector<int> out;
  for_each_in_radius(q, r, mode, [&out](int idx, double) { out.push_back(idx); });
  std::sort(out.begin(), out.end());
  return out;
}

void SpatialIndex::nn_recurse(int node, const Vec3& q, QueryMode mode, double& best_d2,
                              int& best_idx) const {
  const Node& n = nodes_[node];
  if (n.left < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const double d2 = point_dist2(pts_[i], q, mode);
      if (d2 < best_d2 || (d2 == best_d2 && orig_[i] < best_idx)) {
        best_d2 = d2;
        best_idx = orig_[i];
      }
    }
    return;
  }
  const double dl = node_dist2(nodes_[n.left], q, mode);
  const double dr = node_dist2(nodes_[n.right], q, mode);
  const int first = dl <= dr ? n.left : n.right;
  const int second = dl <= dr ? n.right : n.left;
  // A subtree at distance == best can still hold an equal-distance point with
  // a lower index, so only prune on strict inequality.
  if (std::min(dl, dr) <= best_d2) nn_recurse(first, q, mode, best_d2, best_idx);
  if (std::max(dl, dr) <= best_d2) nn_recurse(second, q, mode, best_d2, best_idx);
}

std::pair<int, double> SpatialIndex::nearest_neighbor(const Vec3& q, QueryMode mode) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_idx = std::numeric_limits<int>::max();
  nn_recurse(0, q, mode, best_d2, best_idx);
  return {best_idx, std::sqrt(best_d2)};
}

SpatialIndex build_index(const PointCloud& cloud) { return SpatialIndex(cloud); }

}  // namespace cloudgrade
