#include "cloudgrade/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "cloudgrade/parallel.hpp"
#include "cloudgrade/random.hpp"

namespace cloudgrade {

using nlohmann::json;

std::string grade_name(DamageGrade g) {
  switch (g) {
    case DamageGrade::NoDamage: return "no_damage";
    case DamageGrade::Heavy: return "heavy";
    case DamageGrade::Extreme: return "extreme";
    case DamageGrade::Destruction: return "destruction";
  }
  throw Error("invalid damage grade");
}

DamageGrade grade_from_name(const std::string& name) {
  if (name == "no_damage") return DamageGrade::NoDamage;
  if (name == "heavy") return DamageGrade::Heavy;
  if (name == "extreme") return DamageGrade::Extreme;
  if (name == "destruction") return DamageGrade::Destruction;
  throw ParseError("unknown damage grade: '" + name + "'");
}

std::vector<std::string> vector_feature_names(const std::vector<FeatureId>& selected) {
  static const char* kStats[] = {"mean", "median", "std", "p10", "p90"};
  std::vector<std::string> names;
  for (FeatureId id : selected)
    for (const char* stat : kStats) names.push_back(feature_name(id) + "_" + stat);
  names.push_back("damaged_share");
  return names;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw EmptyInput("percentile of empty sample");
  std::sort(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::optional<BuildingFeatureVector> aggregate_building_vector(
    const ClusterResult& cluster, const ChangeTable& changes,
    const std::vector<FeatureId>& selected, std::int32_t building_id) {
  if (cluster.labels.size() != changes.rows())
    throw FeatureMismatch("cluster labels do not match change table rows");

  std::vector<int> changed;
  for (std::size_t i = 0; i < cluster.labels.size(); ++i)
    if (cluster.labels[i] == ChangeLabel::Changed) changed.push_back(static_cast<int>(i));
  if (changed.empty()) return std::nullopt;  // bypass: graded NoDamage upstream

  BuildingFeatureVector out;
  out.building_id = building_id;
  out.values.reserve(5 * selected.size() + 1);

  for (FeatureId id : selected) {
    const std::vector<double>& col = changes.column(id);
    std::vector<double> vals;
    vals.reserve(changed.size());
    for (int i : changed)
      if (!is_missing(col[i])) vals.push_back(col[i]);
    if (vals.empty()) {
      // Every changed row was missing for this feature; keep the vector
      // finite with neutral zeros.
      out.values.insert(out.values.end(), {0.0, 0.0, 0.0, 0.0, 0.0});
      continue;
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    const double stddev = std::sqrt(var / static_cast<double>(vals.size()));
    out.values.push_back(mean);
    out.values.push_back(percentile(vals, 50.0));
    out.values.push_back(stddev);
    out.values.push_back(percentile(vals, 10.0));
    out.values.push_back(percentile(vals, 90.0));
  }
  out.values.push_back(cluster.damaged_share);
  return out;
}

SplitIndices split_train_test(const std::vector<DamageGrade>& labels, double ratio,
                              std::uint64_t seed) {
  std::array<std::vector<int>, kNumGrades> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[static_cast<int>(labels[i])].push_back(static_cast<int>(i));
  for (int g = 0; g < kNumGrades; ++g)
    if (by_class[g].empty())
      throw EmptyClass("no buildings labeled '" + grade_name(static_cast<DamageGrade>(g)) + "'");

  SplitIndices split;
  auto rng = make_rng(seed);
  for (int g = 0; g < kNumGrades; ++g) {
    auto& ids = by_class[g];
    // Fisher-Yates with the portable uniform_index helper.
    for (std::size_t i = ids.size(); i > 1; --i)
      std::swap(ids[i - 1], ids[uniform_index(rng, i)]);
    const std::size_t n_train = static_cast<std::size_t>(
        std::floor(ratio * static_cast<double>(ids.size())));
    for (std::size_t i = 0; i < ids.size(); ++i)
      (i < n_train ? split.train : split.test).push_back(ids[i]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

int DecisionTree::depth() const {
  // Depth = number of splits along the deepest path.
  std::function<int(int)> walk = [&](int node) -> int {
    const TreeNode& n = nodes[node];
    if (n.is_leaf()) return 0;
    return 1 + std::max(walk(n.left), walk(n.right));
  };
  return nodes.empty() ? 0 : walk(0);
}

int ForestModel::max_tree_depth() const {
  int d = 0;
  for (const auto& t : trees) d = std::max(d, t.depth());
  return d;
}

namespace {

double gini(const std::array<std::int64_t, kNumGrades>& counts, std::int64_t total) {
  if (total == 0) return 0.0;
  double g = 1.0;
  for (std::int64_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    g -= p * p;
  }
  return g;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double decrease = 0.0;
};

void build_node(DecisionTree& tree, int node_idx, std::vector<int>& samples,
                const std::vector<BuildingFeatureVector>& x, const std::vector<DamageGrade>& y,
                int depth, int max_depth, int mtry, std::mt19937_64& rng) {
  std::array<std::int64_t, kNumGrades> counts{};
  for (int s : samples) ++counts[static_cast<int>(y[s])];
  const std::int64_t total = static_cast<std::int64_t>(samples.size());

  auto make_leaf = [&]() { tree.nodes[node_idx].leaf_counts = counts; };

  const double node_gini = gini(counts, total);
  if (depth >= max_depth || total < 2 || node_gini == 0.0) {
    make_leaf();
    return;
  }

  // Draw mtry distinct candidate features (partial Fisher-Yates).
  const int d = static_cast<int>(x[0].values.size());
  std::vector<int> pool(d);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> candidates;
  for (int k = 0; k < mtry && k < d; ++k) {
    const std::size_t j = k + uniform_index(rng, d - k);
    std::swap(pool[k], pool[j]);
    candidates.push_back(pool[k]);
  }

  SplitChoice best;
  std::vector<std::pair<double, int>> order(samples.size());
  for (int f : candidates) {
    for (std::size_t i = 0; i < samples.size(); ++i)
      order[i] = {x[samples[i]].values[f], samples[i]};
    std::sort(order.begin(), order.end());

    std::array<std::int64_t, kNumGrades> left{};
    std::int64_t n_left = 0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      ++left[static_cast<int>(y[order[i].second])];
      ++n_left;
      if (order[i].first == order[i + 1].first) continue;  // no split between equal values
      std::array<std::int64_t, kNumGrades> right{};
      for (int g = 0; g < kNumGrades; ++g) right[g] = counts[g] - left[g];
      const std::int64_t n_right = total - n_left;
      const double dec = node_gini -
                         (static_cast<double>(n_left) / total) * gini(left, n_left) -
                         (static_cast<double>(n_right) / total) * gini(right, n_right);
      if (dec > best.decrease) {
        best.decrease = dec;
        best.feature = f;
        best.threshold = 0.5 * (order[i].first + order[i + 1].first);
      }
    }
  }

  if (best.feature < 0 || best.decrease <= 1e-15) {
    make_leaf();
    return;
  }

  std::vector<int> left_samples, right_samples;
  for (int s : samples)
    (x[s].values[best.feature] <= best.threshold ? left_samples : right_samples).push_back(s);
  if (left_samples.empty() || right_samples.empty()) {
    make_leaf();
    return;
  }

  const int left_idx = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  tree.nodes.emplace_back();
  tree.nodes[node_idx].feature_idx = best.feature;
  tree.nodes[node_idx].threshold = best.threshold;
  tree.nodes[node_idx].left = left_idx;
  tree.nodes[node_idx].right = left_idx + 1;
  samples.clear();
  samples.shrink_to_fit();
  build_node(tree, left_idx, left_samples, x, y, depth + 1, max_depth, mtry, rng);
  build_node(tree, left_idx + 1, right_samples, x, y, depth + 1, max_depth, mtry, rng);
}

}  // namespace

ForestModel train_forest(const std::vector<BuildingFeatureVector>& x,
                         const std::vector<DamageGrade>& y, const ForestParams& params,
                         std::uint64_t seed, const std::string& training_config, int jobs) {
  if (x.empty() || x.size() != y.size())
    throw Error("train_forest needs equally sized, non-empty x and y");
  const std::size_t d = x[0].values.size();
  for (const auto& v : x) {
    if (v.values.size() != d) throw FeatureMismatch("inconsistent feature vector dimensions");
    for (double val : v.values)
      if (!std::isfinite(val)) throw Error("feature vectors must be finite (sentinel-free)");
  }
  if (params.n_trees <= 0 || params.max_depth < 0)
    throw Error("forest params out of range");

  ForestModel model;
  model.params = params;
  model.seed = seed;
  model.training_config = training_config;
  model.trees.resize(params.n_trees);

  const int mtry = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
  const std::size_t n = x.size();

  parallel_for(params.n_trees, jobs, [&](std::size_t t) {
    auto rng = make_rng(seed, t);
    std::vector<int> sample(n);
    for (std::size_t i = 0; i < n; ++i) sample[i] = static_cast<int>(uniform_index(rng, n));
    DecisionTree& tree = model.trees[t];
    tree.nodes.emplace_back();
    build_node(tree, 0, sample, x, y, 0, params.max_depth, mtry, rng);
  });

  return model;
}

Prediction predict(const ForestModel& model, const BuildingFeatureVector& x) {
  if (!model.feature_names.empty() && x.values.size() != model.feature_names.size())
    throw FeatureMismatch("feature vector has " + std::to_string(x.values.size()) +
                          " values, model expects " + std::to_string(model.feature_names.size()));

  Prediction out;
  for (const auto& tree : model.trees) {
    int node = 0;
    while (!tree.nodes[node].is_leaf()) {
      const TreeNode& n = tree.nodes[node];
      if (n.feature_idx >= static_cast<int>(x.values.size()))
        throw FeatureMismatch("feature vector too short for model");
      node = x.values[n.feature_idx] <= n.threshold ? n.left : n.right;
    }
    const auto& counts = tree.nodes[node].leaf_counts;
    std::int64_t total = 0;
    for (std::int64_t c : counts) total += c;
    if (total == 0) continue;
    for (int g = 0; g < kNumGrades; ++g)
      out.probabilities[g] += static_cast<double>(counts[g]) / static_cast<double>(total);
  }
  double sum = 0.0;
  for (double p : out.probabilities) sum += p;
  if (sum > 0)
    for (double& p : out.probabilities) p /= sum;

  // Argmax with ties resolved toward the more severe grade.
  int best = 0;
  for (int g = 1; g < kNumGrades; ++g)
    if (out.probabilities[g] >= out.probabilities[best]) best = g;
  out.grade = static_cast<DamageGrade>(best);
  return out;
}

void save_model(const ForestModel& model, const std::filesystem::path& path) {
  json j;
  j["format_version"] = model.format_version;
  j["params"] = {{"n_trees", model.params.n_trees}, {"max_depth", model.params.max_depth}};
  j["feature_names"] = model.feature_names;
  j["training_config"] = model.training_config;
  j["seed"] = model.seed;
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"leaf_counts", n.leaf_counts}});
      } else {
        nodes.push_back({{"feature_idx", n.feature_idx},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees);

  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

ForestModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("model file " + path.string() + ": " + e.what());
  }

  ForestModel model;
  try {
    const int version = j.at("format_version").get<int>();
    if (version != 1)
      throw UnsupportedVersion("model format_version " + std::to_string(version) +
                               " not supported (expected 1)");
    model.format_version = version;
    model.params.n_trees = j.at("params").at("n_trees").get<int>();
    model.params.max_depth = j.at("params").at("max_depth").get<int>();
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.training_config = j.at("training_config").get<std::string>();
    model.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& jt : j.at("trees")) {
      DecisionTree tree;
      for (const auto& jn : jt.at("nodes")) {
        TreeNode n;
        if (jn.contains("leaf_counts")) {
          const auto counts = jn.at("leaf_counts").get<std::vector<std::int64_t>>();
          if (counts.size() != kNumGrades) throw ParseError("bad leaf_counts length");
          std::copy(counts.begin(), counts.end(), n.leaf_counts.begin());
        } else {
          n.feature_idx = jn.at("feature_idx").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
          if (n.left < 0 || n.right < 0) throw ParseError("bad child index");
        }
        tree.nodes.push_back(n);
      }
      if (tree.nodes.empty()) throw ParseError("tree without nodes");
      model.trees.push_back(std::move(tree));
    }
  } catch (const UnsupportedVersion&) {
    throw;
  } catch (const ParseError&) {
    throw;
  } catch (const json::exception& e) {
    throw ParseError("model file " + path.string() + ": " + e.what());
  }
  return model;
}

}  // namespace cloudgrade
