#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "cloudgrade/errors.hpp"

namespace cloudgrade {

using Vec3 = Eigen::Vector3d;

/// Value that marks a per-point attribute as missing; excluded from all
/// downstream aggregation.
inline constexpr double kMissingValue = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

enum class Epoch { PreEvent, PostEvent };

std::string epoch_name(Epoch e);
Epoch epoch_from_name(const std::string& name);

/// Sentinel used in the building_id column for points that belong to no
/// building (ground, unassigned).
inline constexpr std::int32_t kNoBuilding = -1;

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void expand(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  bool valid() const { return (min.array() <= max.array()).all(); }
  Vec3 extent() const { return max - min; }
};

/// Epoch-tagged 3D points with optional named scalar attribute columns and an
/// optional per-point building id. Attribute columns always have exactly one
/// value per point; building_id is either empty or full length, with
/// kNoBuilding marking points outside any building.
struct PointCloud {
  std::vector<Vec3> points;
  std::map<std::string, std::vector<double>> attributes;
  std::vector<std::int32_t> building_id;
  Epoch epoch = Epoch::PreEvent;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_building_ids() const { return !building_id.empty(); }

  std::vector<double>& attribute(const std::string& name);
  const std::vector<double>& attribute(const std::string& name) const;
  bool has_attribute(const std::string& name) const { return attributes.count(name) > 0; }

  /// Throws Error if any column length disagrees with the point count or a
  /// coordinate is non-finite.
  void validate() const;

  Aabb bounds() const;

  /// New cloud containing the selected point rows (attributes and ids carried).
  PointCloud select(const std::vector<int>& indices) const;

  /// Appends all rows of other; attribute columns are unioned, absent values
  /// filled with the missing sentinel.
  void append(const PointCloud& other);
};

/// Voxel-grid subsampling with voxel edge = spacing, anchored at the cloud's
/// min corner. Each occupied voxel keeps the point nearest its center (ties
/// by lowest index); attributes and ids are carried over. The selection rule
/// is fully deterministic, `seed` is accepted for interface stability only.
PointCloud subsample_to_spacing(const PointCloud& cloud, double spacing, std::uint64_t seed = 0);

}  // namespace cloudgrade
