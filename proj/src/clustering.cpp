#include "cloudgrade/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cloudgrade/random.hpp"

namespace cloudgrade {

KMeansResult kmeans2(const std::vector<Eigen::Vector2d>& samples, std::uint64_t seed,
                     int max_iter) {
  bool distinct = false;
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i] != samples[0]) {
      distinct = true;
      break;
    }
  if (samples.size() < 2 || !distinct)
    throw DegenerateClusters("2-means needs at least two distinct samples");

  auto rng = make_rng(seed);
  const std::size_t n = samples.size();

  // k-means++: first center uniform, second weighted by squared distance.
  std::array<Eigen::Vector2d, 2> centers;
  centers[0] = samples[uniform_index(rng, n)];
  std::vector<double> weight(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weight[i] = (samples[i] - centers[0]).squaredNorm();
    total += weight[i];
  }
  double pick = uniform01(rng) * total;
  std::size_t second = n - 1;
  for (std::size_t i = 0; i < n; ++i) {
    pick -= weight[i];
    if (pick <= 0.0) {
      second = i;
      break;
    }
  }
  // total > 0 because the samples are not all identical; if the draw landed
  // on a zero-weight sample anyway, take the first distinct one.
  if (weight[second] == 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      if (weight[i] > 0.0) {
        second = i;
        break;
      }
  }
  centers[1] = samples[second];

  KMeansResult result;
  result.labels.assign(n, 0);
  for (int iter = 0; iter < max_iter; ++iter) {
    ++result.iterations;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const double d0 = (samples[i] - centers[0]).squaredNorm();
      const double d1 = (samples[i] - centers[1]).squaredNorm();
      const int label = d1 < d0 ? 1 : 0;
      if (label != result.labels[i]) {
        result.labels[i] = label;
        changed = true;
      }
    }
    std::array<Eigen::Vector2d, 2> sum = {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
    std::array<std::size_t, 2> count = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      sum[result.labels[i]] += samples[i];
      ++count[result.labels[i]];
    }
    for (int k = 0; k < 2; ++k) {
      if (count[k] == 0) {
        // Re-seed an emptied cluster with the point farthest from the other
        // center (ties by lowest index).
        const int other = 1 - k;
        double best = -1.0;
        std::size_t far = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = (samples[i] - centers[other]).squaredNorm();
          if (d > best) {
            best = d;
            far = i;
          }
        }
        centers[k] = samples[far];
        result.labels[far] = k;
        changed = true;
      } else {
        centers[k] = sum[k] / static_cast<double>(count[k]);
      }
    }
    if (!changed && iter > 0) break;
  }
  result.centroids = centers;
  return result;
}

ClusterResult extract_changed_points(const PointCloud& building, const ChangeTable& changes,
                                     std::uint64_t seed, const NoiseGate& gate) {
  if (building.empty()) throw EmptyBuilding("building has no points");
  if (changes.rows() != building.size())
    throw FeatureMismatch("change table rows do not match building point count");
  if (!changes.has(FeatureId::Curvature))
    throw FeatureMismatch("change table lacks a curvature column");

  const std::vector<double>& d_curv = changes.column(FeatureId::Curvature);
  const std::vector<double>& d_z = changes.delta_z;
  const std::size_t n = building.size();

  ClusterResult result;
  result.labels.assign(n, ChangeLabel::Unchanged);
  result.centroids = {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};

  std::vector<int> valid;
  valid.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!is_missing(d_curv[i]) && !is_missing(d_z[i])) valid.push_back(static_cast<int>(i));
  if (valid.size() < 2) {
    result.bypassed = true;
    return result;
  }

  auto moments = [&valid](const std::vector<double>& col) {
    double mean = 0.0;
    for (int i : valid) mean += col[i];
    mean /= static_cast<double>(valid.size());
    double var = 0.0;
    for (int i : valid) var += (col[i] - mean) * (col[i] - mean);
    return std::pair<double, double>(mean, std::sqrt(var / static_cast<double>(valid.size())));
  };
  const auto [curv_mean, curv_std] = moments(d_curv);
  const auto [z_mean, z_std] = moments(d_z);

  // Noise gate: nothing but sensor noise moved, so the building is unchanged.
  if (curv_std < gate.eps_curvature && z_std < gate.eps_z) {
    result.bypassed = true;
    return result;
  }

  std::vector<Eigen::Vector2d> samples;
  samples.reserve(valid.size());
  for (int i : valid)
    samples.emplace_back(curv_std > 0 ? (d_curv[i] - curv_mean) / curv_std : 0.0,
                         z_std > 0 ? (d_z[i] - z_mean) / z_std : 0.0);

  KMeansResult km;
  try {
    km = kmeans2(samples, seed);
  } catch (const DegenerateClusters&) {
    result.bypassed = true;
    return result;
  }

  std::array<double, 2> norm_sum = {0.0, 0.0};
  std::array<std::size_t, 2> count = {0, 0};
  for (std::size_t s = 0; s < samples.size(); ++s) {
    norm_sum[km.labels[s]] += samples[s].norm();
    ++count[km.labels[s]];
  }
  const double mean0 = count[0] ? norm_sum[0] / count[0] : 0.0;
  const double mean1 = count[1] ? norm_sum[1] / count[1] : 0.0;
  const int changed_cluster = mean0 > mean1 ? 0 : 1;

  std::size_t n_changed = 0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (km.labels[s] == changed_cluster) {
      result.labels[valid[s]] = ChangeLabel::Changed;
      ++n_changed;
    }
  }
  result.centroids = km.centroids;
  result.damaged_share = static_cast<double>(n_changed) / static_cast<double>(n);
  return result;
}

}  // namespace cloudgrade
