#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "cloudgrade/change.hpp"
#include "cloudgrade/point_cloud.hpp"

namespace cloudgrade {

struct KMeansResult {
  std::vector<int> labels;  // 0 or 1 per sample
  std::array<Eigen::Vector2d, 2> centroids;
  int iterations = 0;
};

/// Lloyd's algorithm with k = 2 and seeded k-means++ initialization.
/// Converges when assignments stabilize or after max_iter passes. Throws
/// DegenerateClusters when fewer than two distinct samples exist.
KMeansResult kmeans2(const std::vector<Eigen::Vector2d>& samples, std::uint64_t seed,
                     int max_iter = 100);

enum class ChangeLabel : std::uint8_t { Unchanged = 0, Changed = 1 };

struct ClusterResult {
  std::vector<ChangeLabel> labels;            // one per building point
  std::array<Eigen::Vector2d, 2> centroids;   // standardized space; zeros when bypassed
  double damaged_share = 0.0;                 // changed / total
  bool bypassed = false;                      // noise gate or degenerate input
};

/// Noise gate: clustering is skipped (all points Unchanged) when the
/// building-level pre-standardization STDs of both deltas fall below these
/// thresholds.
struct NoiseGate {
  double eps_curvature = 0.05;  // curvature units
  double eps_z = 0.05;          // meters
};

/// Splits one building's points into Changed/Unchanged with a 2-means over
/// z-score standardized (delta curvature, delta z). The Changed cluster is
/// the one with the larger mean standardized norm. Rows where either delta
/// is missing stay Unchanged. Throws EmptyBuilding for an empty building and
/// FeatureMismatch when the change table lacks a curvature column or sizes
/// disagree.
ClusterResult extract_changed_points(const PointCloud& building, const ChangeTable& changes,
                                     std::uint64_t seed, const NoiseGate& gate = {});

}  // namespace cloudgrade
