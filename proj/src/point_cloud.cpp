#include "cloudgrade/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace cloudgrade {

std::string epoch_name(Epoch e) { return e == Epoch::PreEvent ? "pre" : "post"; }

Epoch epoch_from_name(const std::string& name) {
  if (name == "pre") return Epoch::PreEvent;
  if (name == "post") return Epoch::PostEvent;
  throw ParseError("unknown epoch name: " + name);
}

std::vector<double>& PointCloud::attribute(const std::string& name) {
  auto it = attributes.find(name);
  if (it == attributes.end()) throw Error("no attribute column named '" + name + "'");
  return it->second;
}

const std::vector<double>& PointCloud::attribute(const std::string& name) const {
  auto it = attributes.find(name);
  if (it == attributes.end()) throw Error("no attribute column named '" + name + "'");
  return it->second;
}

void PointCloud::validate() const {
  for (const auto& [name, col] : attributes) {
    if (col.size() != points.size())
      throw Error("attribute '" + name + "' has " + std::to_string(col.size()) +
                  " values for " + std::to_string(points.size()) + " points");
  }
  if (!building_id.empty() && building_id.size() != points.size())
    throw Error("building_id column length mismatch");
  for (const auto& p : points) {
    if (!p.allFinite()) throw Error("non-finite point coordinate");
  }
}

Aabb PointCloud::bounds() const {
  Aabb box;
  for (const auto& p : points) box.expand(p);
  return box;
}

PointCloud PointCloud::select(const std::vector<int>& indices) const {
  PointCloud out;
  out.epoch = epoch;
  out.points.reserve(indices.size());
  for (int i : indices) out.points.push_back(points[static_cast<std::size_t>(i)]);
  for (const auto& [name, col] : attributes) {
    auto& dst = out.attributes[name];
    dst.reserve(indices.size());
    for (int i : indices) dst.push_back(col[static_cast<std::size_t>(i)]);
  }
  if (!building_id.empty()) {
    out.building_id.reserve(indices.size());
    for (int i : indices) out.building_id.push_back(building_id[static_cast<std::size_t>(i)]);
  }
  return out;
}

void PointCloud::append(const PointCloud& other) {
  const std::size_t old_n = points.size();
  points.insert(points.end(), other.points.begin(), other.points.end());
  // Union of attribute columns; missing sides padded with the sentinel.
  for (auto& [name, col] : attributes) {
    auto it = other.attributes.find(name);
    if (it != other.attributes.end())
      col.insert(col.end(), it->second.begin(), it->second.end());
    else
      col.resize(points.size(), kMissingValue);
  }
  for (const auto& [name, col] : other.attributes) {
    if (attributes.count(name)) continue;
    auto& dst = attributes[name];
    dst.assign(old_n, kMissingValue);
    dst.insert(dst.end(), col.begin(), col.end());
  }
  if (!building_id.empty() || other.has_building_ids()) {
    if (building_id.empty()) building_id.assign(old_n, kNoBuilding);
    if (other.has_building_ids())
      building_id.insert(building_id.end(), other.building_id.begin(), other.building_id.end());
    else
      building_id.resize(points.size(), kNoBuilding);
  }
}

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

PointCloud subsample_to_spacing(const PointCloud& cloud, double spacing, std::uint64_t /*seed*/) {
  if (!(spacing > 0.0)) throw InvalidSpacing("subsample spacing must be > 0");
  if (cloud.empty()) return cloud;

  const Vec3 origin = cloud.bounds().min;
  struct Best {
    double d2;
    int idx;
  };
  std::unordered_map<VoxelKey, Best, VoxelKeyHash> best;
  best.reserve(cloud.size());

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 rel = (cloud.points[i] - origin) / spacing;
    VoxelKey key{static_cast<std::int64_t>(std::floor(rel.x())),
                 static_cast<std::int64_t>(std::floor(rel.y())),
                 static_cast<std::int64_t>(std::floor(rel.z()))};
    const Vec3 center = origin + spacing * Vec3(key.x + 0.5, key.y + 0.5, key.z + 0.5);
    const double d2 = (cloud.points[i] - center).squaredNorm();
    auto [it, inserted] = best.try_emplace(key, Best{d2, static_cast<int>(i)});
    if (!inserted && d2 < it->second.d2) it->second = Best{d2, static_cast<int>(i)};
  }

  std::vector<int> keep;
  keep.reserve(best.size());
  for (const auto& [key, b] : best) keep.push_back(b.idx);
  std::sort(keep.begin(), keep.end());
  return cloud.select(keep);
}

}  // namespace cloudgrade
