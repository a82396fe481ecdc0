#pragma once

// From-scratch random forest: Gini CART trees on bootstrap resamples.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dronelight/label.hpp"
#include "dronelight/rng.hpp"
#include "dronelight/synth.hpp"

namespace dronelight {

/// Row-major feature table with one label per row.
struct FeatureMatrix {
  std::size_t n_features = 0;
  std::vector<double> values;
  std::vector<Label> labels;

  static FeatureMatrix from_dataset(const Dataset& ds);

  std::size_t rows() const noexcept { return labels.size(); }
  double at(std::size_t row, std::size_t feature) const { return values[row * n_features + feature]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * n_features, n_features}; }
  void add_row(std::span<const double> features, Label label);
};

/// 1 - sum (c_i/N)^2. Throws Error(kEmptyCounts) if all counts are zero.
double gini(const ClassCounts& counts);

ClassCounts count_labels(const FeatureMatrix& data, std::span<const std::size_t> rows);

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
};

/// Splits below this are treated as zero gain, and decreases closer than
/// this as ties (floating-point noise).
inline constexpr double kMinImpurityDecrease = 1e-12;

/// Best Gini split over the candidate features with thresholds at midpoints
/// between consecutive distinct values; rows with value <= threshold go
/// left. Ties prefer the lower feature index, then the lower threshold.
/// Returns nullopt if no split with at least min_leaf rows per side has a
/// positive decrease.
std::optional<Split> best_split(const FeatureMatrix& data, std::span<const std::size_t> rows,
                                std::span<const std::size_t> candidate_features,
                                std::size_t min_leaf = 1);

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 3;
  std::size_t min_leaf = 1;
  std::size_t features_per_split = 6;
  std::uint64_t seed = 42;

  void validate(std::size_t n_features) const;
  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// Pre-order node list: a split's left child is the next node, its right
/// child is at index `right`.
struct TreeNode {
  static constexpr std::uint32_t kLeaf = 0xFFFFFFFFu;

  std::uint32_t feature = kLeaf;
  double threshold = 0.0;
  std::uint32_t right = 0;
  ClassCounts counts{};

  bool is_leaf() const noexcept { return feature == kLeaf; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Majority class of a leaf; ties go to the lower label index.
Label majority(const ClassCounts& counts) noexcept;

class DecisionTree {
 public:
  DecisionTree() = default;
  /// Checks the pre-order layout and leaf counts; throws Error(kFormat).
  explicit DecisionTree(std::vector<TreeNode> nodes);

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& leaf_for(std::span<const double> features) const;
  Label predict(std::span<const double> features) const { return majority(leaf_for(features).counts); }
  /// Number of edges on the longest root-to-leaf path.
  std::size_t depth() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

/// Recursive CART. Each node draws features_per_split distinct features from
/// rng and stops at max_depth, purity, fewer than 2*min_leaf rows or no
/// positive-gain split.
DecisionTree grow_tree(const FeatureMatrix& data, std::span<const std::size_t> rows,
                       const ForestParams& params, Rng& rng);

struct Prediction {
  Label label = Label::S;
  std::array<double, kLabelCount> posteriors{};
};

class RandomForestModel {
 public:
  static constexpr int kVersion = 1;

  RandomForestModel() = default;
  RandomForestModel(ForestParams params, std::size_t n_features, std::vector<DecisionTree> trees);

  const ForestParams& params() const noexcept { return params_; }
  std::size_t n_features() const noexcept { return n_features_; }
  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

  /// Each tree votes its leaf majority; posteriors are vote fractions and
  /// the prediction is their argmax (ties to the lower label index).
  Prediction predict(std::span<const double> features) const;
  Prediction predict(const FeatureVector& features) const { return predict(features.values); }

  friend bool operator==(const RandomForestModel&, const RandomForestModel&) = default;

 private:
  ForestParams params_;
  std::size_t n_features_ = 0;
  std::vector<DecisionTree> trees_;
};

/// Tree i is grown on a bootstrap resample drawn from Rng(mix_seed(seed, i)).
/// Throws Error(kMissingClass) unless all five labels are present.
RandomForestModel forest_fit(const FeatureMatrix& data, const ForestParams& params);
RandomForestModel forest_fit(const Dataset& ds, const ForestParams& params);

std::string model_to_json(const RandomForestModel& model);
RandomForestModel model_from_json(const std::string& text);
void save_model(const RandomForestModel& model, const std::string& path);
RandomForestModel load_model(const std::string& path);

using Fold = std::vector<std::size_t>;

/// Each class's indices are shuffled with Rng(seed) and dealt round-robin;
/// dealing continues across classes so fold totals also stay balanced.
/// Throws Error(kTooFewPerClass) if any class has fewer than k samples.
std::vector<Fold> stratified_kfold(const Dataset& ds, std::size_t k, std::uint64_t seed);

struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per-class shuffled split with per-class train quotas by largest remainder.
/// train_count + test_count must equal ds.size().
TrainTestSplit stratified_split(const Dataset& ds, std::size_t train_count, std::size_t test_count,
                                std::uint64_t seed);

struct GridScore {
  std::size_t n_trees = 0;
  std::size_t max_depth = 0;
  double mean_accuracy = 0.0;
  std::vector<double> fold_accuracies;
};

struct GridSearchResult {
  std::vector<GridScore> scores;  // trees-major, in grid order
  std::size_t best_index = 0;

  const GridScore& best() const { return scores.at(best_index); }
};

/// k-fold CV accuracy for every (n_trees, max_depth) pair. Best is the
/// highest mean; ties prefer fewer trees, then shallower trees. Other
/// ForestParams fields come from `base`; the forest seed is `seed`.
GridSearchResult grid_search(const Dataset& ds, std::span<const std::size_t> trees_grid,
                             std::span<const std::size_t> depth_grid, std::size_t k,
                             std::uint64_t seed, const ForestParams& base = {});

struct ConfusionMatrix {
  std::array<std::array<std::uint32_t, kLabelCount>, kLabelCount> counts{};  // [true][predicted]

  std::uint64_t total() const noexcept;
  std::uint64_t trace() const noexcept;
};

struct Metrics {
  double accuracy = 0.0;
  double precision_macro = 0.0;
  double recall_macro = 0.0;
  std::array<double, kLabelCount> precision{};
  std::array<double, kLabelCount> recall{};
  ConfusionMatrix confusion;
};

/// Macro averages over all five classes; a class never predicted (never
/// present) contributes precision (recall) 0.
Metrics metrics_from_confusion(const ConfusionMatrix& confusion);
Metrics evaluate(const RandomForestModel& model, const Dataset& test);

}  // namespace dronelight
