#pragma once

#include <filesystem>

#include "cloudgrade/point_cloud.hpp"

namespace cloudgrade {

/// ASCII PLY dialect used across the pipeline:
///   element vertex N with float64 properties x y z, an optional int32
///   building_id, and one float64 property per attribute column; the header
///   carries `comment epoch=pre|post`.
/// Values are written with shortest-round-trip formatting, so write/read is
/// lossless.
void write_ply(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_ply(const std::filesystem::path& path);

}  // namespace cloudgrade
