#pragma once

#include <map>
#include <vector>

#include "cloudgrade/features.hpp"
#include "cloudgrade/point_cloud.hpp"
#include "cloudgrade/spatial_index.hpp"

namespace cloudgrade {

/// Per-point feature change between epochs, anchored on pre-event points.
/// Scalar features carry the signed delta post(nn3D) - pre; the NormalVector
/// entry holds the normal change angle arccos(|n_pre . n_post|) in degrees
/// (0..90). delta_z is the signed vertical displacement to the planimetric
/// (Disc2D) nearest neighbor; nn_distance is the 3D nearest-neighbor
/// distance, kept for diagnostics.
struct ChangeTable {
  std::vector<FeatureId> ids;
  std::map<FeatureId, std::vector<double>> delta;
  std::vector<double> delta_z;
  std::vector<double> nn_distance;

  std::size_t rows() const { return delta_z.size(); }
  bool has(FeatureId id) const { return delta.count(id) > 0; }
  const std::vector<double>& column(FeatureId id) const;
};

/// Computes the change table for every pre-event point. Both feature tables
/// must come from the same radius and the same feature set, else
/// FeatureMismatch. Missing feature values propagate as the missing
/// sentinel.
ChangeTable compute_change(const PointCloud& pre, const FeatureTable& pre_features,
                           const PointCloud& post, const FeatureTable& post_features,
                           const SpatialIndex& post_index, int jobs = 0);

}  // namespace cloudgrade
