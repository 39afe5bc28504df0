#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cloudgrade/change.hpp"
#include "cloudgrade/clustering.hpp"

namespace cloudgrade {

/// EMS-98-derived damage grades; slight and moderate damage are out of scope.
/// Order encodes severity (used for conservative tie-breaking).
enum class DamageGrade : std::uint8_t { NoDamage = 0, Heavy = 1, Extreme = 2, Destruction = 3 };
inline constexpr int kNumGrades = 4;

std::string grade_name(DamageGrade g);
DamageGrade grade_from_name(const std::string& name);

/// Per-building classifier input: {mean, median, STD, p10, p90} of each
/// selected change feature over the Changed points, plus the damaged share.
struct BuildingFeatureVector {
  std::int32_t building_id = 0;
  std::vector<double> values;
};

/// Column names for the vector layout: 5 stats per selected feature (canonical
/// feature order) followed by "damaged_share".
std::vector<std::string> vector_feature_names(const std::vector<FeatureId>& selected);

/// Aggregates one building. Missing-value rows are excluded per feature;
/// percentiles use linear interpolation and STD is the population STD. When
/// the building has zero Changed points the classifier is bypassed
/// (grade = NoDamage) and nullopt is returned.
std::optional<BuildingFeatureVector> aggregate_building_vector(
    const ClusterResult& cluster, const ChangeTable& changes,
    const std::vector<FeatureId>& selected, std::int32_t building_id);

/// Linear-interpolation percentile of an unsorted sample (p in [0, 100]).
double percentile(std::vector<double> values, double p);

struct SplitIndices {
  std::vector<int> train, test;
};

/// Stratified-by-class random split, deterministic per seed. Requires at
/// least one building per grade present in `labels` (EmptyClass otherwise).
SplitIndices split_train_test(const std::vector<DamageGrade>& labels, double ratio,
                              std::uint64_t seed);

struct ForestParams {
  int n_trees = 100;
  int max_depth = 5;
};

/// Axis-aligned threshold split; leaves carry class-count histograms.
struct TreeNode {
  int feature_idx = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<std::int64_t, kNumGrades> leaf_counts{};
  bool is_leaf() const { return left < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  int depth() const;
};

struct ForestModel {
  int format_version = 1;
  ForestParams params;
  std::vector<std::string> feature_names;
  std::string training_config;  // vls-generic | vls-region-specific | ...
  std::uint64_t seed = 0;
  std::vector<DecisionTree> trees;

  int max_tree_depth() const;
};

/// Trains a random forest: per-tree bootstrap of size n, Gini-impurity splits
/// over ceil(sqrt(d)) randomly drawn candidate features, depth capped at
/// max_depth, per-tree RNG streams derived from (seed, tree index).
/// Single-class input is accepted (the model then always predicts it).
ForestModel train_forest(const std::vector<BuildingFeatureVector>& x,
                         const std::vector<DamageGrade>& y, const ForestParams& params,
                         std::uint64_t seed, const std::string& training_config = "",
                         int jobs = 0);

struct Prediction {
  DamageGrade grade = DamageGrade::NoDamage;
  std::array<double, kNumGrades> probabilities{};
};

/// Mean of per-tree leaf distributions; argmax with ties resolved toward the
/// more severe grade. Throws FeatureMismatch on dimension mismatch.
Prediction predict(const ForestModel& model, const BuildingFeatureVector& x);

/// Versioned JSON persistence; loading a model predicts identically.
void save_model(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_model(const std::filesystem::path& path);

}  // namespace cloudgrade
