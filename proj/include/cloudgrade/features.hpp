#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cloudgrade/point_cloud.hpp"
#include "cloudgrade/spatial_index.hpp"

namespace cloudgrade {

enum class FeatureId {
  Linearity,
  Planarity,
  Sphericity,
  Omnivariance,
  Anisotropy,
  Eigenentropy,
  SurfaceVariation,
  Curvature,
  Verticality,
  Roughness,
  NumNeighbors,
  PointDensity2D,
  SurfaceDensity,
  VolumeDensity,
  ZRank,
  ZRange,
  Lambda1,
  Lambda2,
  Lambda3,
  SumLambda,
  NormalVector,
};

std::string feature_name(FeatureId id);
/// Throws UnknownFeature for an unrecognized name.
FeatureId feature_from_name(const std::string& name);
/// All 21 feature ids in canonical (enum) order.
const std::vector<FeatureId>& all_features();
/// The default robust change-feature set used for classification.
const std::vector<FeatureId>& default_robust_features();

/// Covariance eigenstructure of a local neighborhood: eigenvalues sorted
/// descending and the surface normal (eigenvector of the smallest
/// eigenvalue) oriented upward (n_z >= 0, ties toward n_x >= 0).
struct EigenStructure {
  double l1 = 0, l2 = 0, l3 = 0;
  Vec3 normal = Vec3::UnitZ();
};

/// Eigenstructure of the Ball3D(r) neighborhood of point index p (the point
/// itself included). Returns nullopt when the neighborhood has fewer than 3
/// points.
std::optional<EigenStructure> local_eigenstructure(const SpatialIndex& index,
                                                   const PointCloud& cloud, int p, double r);

/// Per-point feature values at one neighborhood radius. Scalar features live
/// in `columns`; NormalVector, when requested, fills `normals` (missing
/// normals are NaN vectors). Missing values use the NaN sentinel.
struct FeatureTable {
  double radius = 0.0;
  std::vector<FeatureId> ids;  // requested set, canonical order
  std::map<FeatureId, std::vector<double>> columns;
  std::vector<Vec3> normals;

  std::size_t rows() const;
  bool has(FeatureId id) const { return columns.count(id) > 0; }
  const std::vector<double>& column(FeatureId id) const;
};

/// Computes the requested features for every point. Features that need the
/// covariance eigenstructure or a surface fit get the missing sentinel where
/// the neighborhood has < 3 points; neighbor counts, densities and z
/// statistics are always defined. Throws UnknownFeature only via
/// feature_from_name (ids here are already typed) and InvalidRadius for
/// r <= 0.
FeatureTable compute_features(const PointCloud& cloud, const SpatialIndex& index, double r,
                              const std::vector<FeatureId>& ids, int jobs = 0);

}  // namespace cloudgrade
