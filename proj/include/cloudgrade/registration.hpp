#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "cloudgrade/point_cloud.hpp"

namespace cloudgrade {

/// Proper rigid motion: x -> R x + t, det(R) = +1.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  PointCloud apply(const PointCloud& cloud) const;
  RigidTransform inverse() const;
  /// this ∘ other (other applied first).
  RigidTransform compose(const RigidTransform& other) const;
};

/// Point-to-point ICP over the stable subsets of both clouds. Correspondences
/// are nearest neighbors in the fixed stable subset, the rigid fit is the
/// SVD (Kabsch) solution, and iteration stops when the mean residual changes
/// by less than tol or max_iter is reached. Returns the transform mapping
/// moving -> fixed. Throws DegenerateGeometry when a stable subset has fewer
/// than 3 points or is collinear.
RigidTransform align_icp(const PointCloud& moving, const PointCloud& fixed,
                         const std::vector<bool>& moving_stable,
                         const std::vector<bool>& fixed_stable, int max_iter = 50,
                         double tol = 1e-6);

struct AlignmentQuality {
  double mean = 0.0;    // signed, meters
  double stddev = 0.0;  // population STD, meters
  std::size_t n = 0;    // points with a usable local normal
};

/// Alignment quality proxy: for each stable pre-event point, the signed
/// distance along its local pre-cloud normal to the nearest stable post-event
/// point. Normals come from a PCA over the pre stable subset within
/// normal_radius. Throws EmptyStableArea when either stable subset is empty.
AlignmentQuality alignment_quality(const PointCloud& pre, const PointCloud& post,
                                   const std::vector<bool>& pre_stable,
                                   const std::vector<bool>& post_stable,
                                   double normal_radius = 1.0);

}  // namespace cloudgrade
