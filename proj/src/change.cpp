#include "cloudgrade/change.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "cloudgrade/parallel.hpp"

namespace cloudgrade {

const std::vector<double>& ChangeTable::column(FeatureId id) const {
  auto it = delta.find(id);
  if (it == delta.end())
    throw UnknownFeature("change table has no column '" + feature_name(id) + "'");
  return it->second;
}

ChangeTable compute_change(const PointCloud& pre, const FeatureTable& pre_features,
                           const PointCloud& post, const FeatureTable& post_features,
                           const SpatialIndex& post_index, int jobs) {
  if (pre_features.ids != post_features.ids)
    throw FeatureMismatch("pre and post feature sets differ");
  if (pre_features.radius != post_features.radius)
    throw FeatureMismatch("pre and post feature radii differ");
  if (pre_features.rows() != pre.size() || post_features.rows() != post.size())
    throw FeatureMismatch("feature table row count does not match its cloud");
  if (post_index.size() != post.size())
    throw FeatureMismatch("post index does not match post cloud");

  const std::size_t n = pre.size();
  ChangeTable table;
  table.ids = pre_features.ids;
  for (FeatureId id : table.ids) table.delta[id].assign(n, kMissingValue);
  table.delta_z.assign(n, kMissingValue);
  table.nn_distance.assign(n, kMissingValue);

  const bool want_normal = table.delta.count(FeatureId::NormalVector) > 0;

  // Scalar columns, paired (pre, post, out); NormalVector handled separately.
  struct Col {
    const double* pre;
    const double* post;
    double* out;
  };
  std::vector<Col> cols;
  for (FeatureId id : table.ids) {
    if (id == FeatureId::NormalVector) continue;
    cols.push_back({pre_features.column(id).data(), post_features.column(id).data(),
                    table.delta[id].data()});
  }
  double* normal_out = want_normal ? table.delta[FeatureId::NormalVector].data() : nullptr;

  parallel_for(n, jobs, [&](std::size_t i) {
    const auto [j3, dist3] = post_index.nearest_neighbor(pre.points[i], QueryMode::Ball3D);
    table.nn_distance[i] = dist3;
    for (const Col& c : cols) c.out[i] = c.post[j3] - c.pre[i];
    if (want_normal) {
      const Vec3& a = pre_features.normals[i];
      const Vec3& b = post_features.normals[j3];
      if (a.allFinite() && b.allFinite()) {
        const double c = std::clamp(std::abs(a.dot(b)), 0.0, 1.0);
        normal_out[i] = std::acos(c) * 180.0 / M_PI;
      }
    }
    const auto [j2, dist2] = post_index.nearest_neighbor(pre.points[i], QueryMode::Disc2D);
    table.delta_z[i] = post.points[j2].z() - pre.points[i].z();
    (void)dist2;
  });

  return table;
}

}  // namespace cloudgrade
