#include "cloudgrade/registration.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

#include "cloudgrade/spatial_index.hpp"

namespace cloudgrade {

PointCloud RigidTransform::apply(const PointCloud& cloud) const {
  PointCloud out = cloud;
  for (auto& p : out.points) p = rotation * p + translation;
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
  RigidTransform out;
  out.rotation = rotation * other.rotation;
  out.translation = rotation * other.translation + translation;
  return out;
}

namespace {

std::vector<Vec3> masked_points(const PointCloud& cloud, const std::vector<bool>& mask,
                                const char* which) {
  if (mask.size() != cloud.size())
    throw Error(std::string("stable mask length mismatch for ") + which);
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(cloud.points[i]);
  return out;
}

void check_non_collinear(const std::vector<Vec3>& pts, const char* which) {
  if (pts.size() < 3)
    throw DegenerateGeometry(std::string(which) + " stable set has fewer than 3 points");
  Vec3 mean = Vec3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const Vec3 d = p - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(pts.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const double l_max = es.eigenvalues()(2);
  const double l_mid = es.eigenvalues()(1);
  if (l_mid <= 1e-12 * std::max(l_max, 1e-12))
    throw DegenerateGeometry(std::string(which) + " stable set is collinear");
}

/// Best-fit rigid transform mapping src -> dst (paired), Kabsch/SVD.
RigidTransform fit_rigid(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
  Vec3 src_mean = Vec3::Zero(), dst_mean = Vec3::Zero();
  const double n = static_cast<double>(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    src_mean += src[i];
    dst_mean += dst[i];
  }
  src_mean /= n;
  dst_mean /= n;
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i)
    h += (src[i] - src_mean) * (dst[i] - dst_mean).transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  RigidTransform t;
  t.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  t.translation = dst_mean - t.rotation * src_mean;
  return t;
}

}  // namespace

RigidTransform align_icp(const PointCloud& moving, const PointCloud& fixed,
                         const std::vector<bool>& moving_stable,
                         const std::vector<bool>& fixed_stable, int max_iter, double tol) {
  const std::vector<Vec3> src = masked_points(moving, moving_stable, "moving");
  const std::vector<Vec3> dst = masked_points(fixed, fixed_stable, "fixed");
  check_non_collinear(src, "moving");
  check_non_collinear(dst, "fixed");

  const SpatialIndex dst_index(dst);
  RigidTransform transform;
  double prev_residual = std::numeric_limits<double>::infinity();

  std::vector<Vec3> corr(src.size());
  for (int iter = 0; iter < max_iter; ++iter) {
    double residual = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
      const Vec3 moved = transform.apply(src[i]);
      const auto [j, dist] = dst_index.nearest_neighbor(moved, QueryMode::Ball3D);
      corr[i] = dst[j];
      residual += dist;
    }
    residual /= static_cast<double>(src.size());
    transform = fit_rigid(src, corr);
    if (std::abs(prev_residual - residual) < tol) break;
    prev_residual = residual;
  }
  return transform;
}

AlignmentQuality alignment_quality(const PointCloud& pre, const PointCloud& post,
                                   const std::vector<bool>& pre_stable,
                                   const std::vector<bool>& post_stable, double normal_radius) {
  const std::vector<Vec3> pre_pts = masked_points(pre, pre_stable, "pre");
  const std::vector<Vec3> post_pts = masked_points(post, post_stable, "post");
  if (pre_pts.empty() || post_pts.empty())
    throw EmptyStableArea("alignment_quality requires non-empty stable subsets");

  const SpatialIndex pre_index(pre_pts);
  const SpatialIndex post_index(post_pts);

  std::vector<double> dists;
  dists.reserve(pre_pts.size());
  for (std::size_t i = 0; i < pre_pts.size(); ++i) {
    // Local normal from PCA over the pre stable subset.
    Vec3 mean = Vec3::Zero();
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    int n = 0;
    pre_index.for_each_in_radius(pre_pts[i], normal_radius, QueryMode::Ball3D,
                                 [&](int j, double) {
                                   mean += pre_pts[j];
                                   ++n;
                                 });
    if (n < 3) continue;
    mean /= static_cast<double>(n);
    pre_index.for_each_in_radius(pre_pts[i], normal_radius, QueryMode::Ball3D,
                                 [&](int j, double) {
                                   const Vec3 d = pre_pts[j] - mean;
                                   cov += d * d.transpose();
                                 });
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    Vec3 normal = es.eigenvectors().col(0);
    if (normal.z() < 0) normal = -normal;

    const auto [j, dist] = post_index.nearest_neighbor(pre_pts[i], QueryMode::Ball3D);
    dists.push_back(normal.dot(post_pts[j] - pre_pts[i]));
    (void)dist;
  }
  if (dists.empty()) throw EmptyStableArea("no stable point had enough neighbors for a normal");

  AlignmentQuality q;
  q.n = dists.size();
  for (double d : dists) q.mean += d;
  q.mean /= static_cast<double>(q.n);
  double var = 0.0;
  for (double d : dists) var += (d - q.mean) * (d - q.mean);
  q.stddev = std::sqrt(var / static_cast<double>(q.n));
  return q;
}

}  // namespace cloudgrade
