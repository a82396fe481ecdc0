#include "dronelight/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dronelight/error.hpp"

namespace dronelight {

namespace {

std::uint64_t sum_counts(const ClassCounts& counts) {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

bool is_pure(const ClassCounts& counts) {
  return std::count_if(counts.begin(), counts.end(), [](std::uint32_t c) { return c > 0; }) <= 1;
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& data, const ForestParams& params, Rng& rng)
      : data_(data), params_(params), rng_(rng), feature_pool_(data.n_features) {
    std::iota(feature_pool_.begin(), feature_pool_.end(), std::size_t{0});
  }

  void build(std::vector<std::size_t> rows, std::size_t depth) {
    const std::size_t self = nodes_.size();
    nodes_.push_back({});
    nodes_[self].counts = count_labels(data_, rows);

    const ClassCounts counts = nodes_[self].counts;
    if (depth >= params_.max_depth || is_pure(counts) || rows.size() < 2 * params_.min_leaf) return;

    const auto features = draw_features();
    const auto split = best_split(data_, rows, features, params_.min_leaf);
    if (!split) return;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) {
      (data_.at(r, split->feature) <= split->threshold ? left : right).push_back(r);
    }
    nodes_[self].feature = static_cast<std::uint32_t>(split->feature);
    nodes_[self].threshold = split->threshold;
    rows = {};
    build(std::move(left), depth + 1);
    nodes_[self].right = static_cast<std::uint32_t>(nodes_.size());
    build(std::move(right), depth + 1);
  }

  std::vector<TreeNode> take() { return std::move(nodes_); }

 private:
  // Partial Fisher-Yates over the feature pool.
  std::vector<std::size_t> draw_features() {
    const std::size_t n = feature_pool_.size();
    for (std::size_t i = 0; i < params_.features_per_split; ++i) {
      const std::size_t j = i + rng_.uniform_index(n - i);
      std::swap(feature_pool_[i], feature_pool_[j]);
    }
    std::vector<std::size_t> out(feature_pool_.begin(),
                                 feature_pool_.begin() +
                                     static_cast<std::ptrdiff_t>(params_.features_per_split));
    std::sort(out.begin(), out.end());
    return out;
  }

  const FeatureMatrix& data_;
  const ForestParams& params_;
  Rng& rng_;
  std::vector<std::size_t> feature_pool_;
  std::vector<TreeNode> nodes_;
};

std::size_t depth_from(const std::vector<TreeNode>& nodes, std::size_t i) {
  if (nodes[i].is_leaf()) return 0;
  return 1 + std::max(depth_from(nodes, i + 1), depth_from(nodes, nodes[i].right));
}

// Returns the index one past the subtree rooted at i.
std::size_t check_subtree(const std::vector<TreeNode>& nodes, std::size_t i) {
  if (i >= nodes.size()) throw Error(ErrorCode::kFormat, "tree: truncated node list");
  const TreeNode& node = nodes[i];
  if (sum_counts(node.counts) == 0 && node.is_leaf()) {
    throw Error(ErrorCode::kFormat, "tree: leaf with no samples");
  }
  if (node.is_leaf()) return i + 1;
  const std::size_t left_end = check_subtree(nodes, i + 1);
  if (node.right != left_end) throw Error(ErrorCode::kFormat, "tree: right child is not pre-order");
  return check_subtree(nodes, node.right);
}

}  // namespace

FeatureMatrix FeatureMatrix::from_dataset(const Dataset& ds) {
  FeatureMatrix m;
  m.n_features = kFeatureLen;
  m.values.reserve(ds.size() * kFeatureLen);
  for (const auto& s : ds.samples()) m.add_row(s.features.values, s.label);
  return m;
}

void FeatureMatrix::add_row(std::span<const double> features, Label label) {
  if (features.size() != n_features) {
    throw Error(ErrorCode::kInvalidArgument, "row width does not match n_features");
  }
  values.insert(values.end(), features.begin(), features.end());
  labels.push_back(label);
}

double gini(const ClassCounts& counts) {
  const std::uint64_t total = sum_counts(counts);
  if (total == 0) throw Error(ErrorCode::kEmptyCounts, "gini of empty class counts");
  double sum_sq = 0.0;
  for (std::uint32_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

ClassCounts count_labels(const FeatureMatrix& data, std::span<const std::size_t> rows) {
  ClassCounts counts{};
  for (std::size_t r : rows) ++counts[index_of(data.labels[r])];
  return counts;
}

std::optional<Split> best_split(const FeatureMatrix& data, std::span<const std::size_t> rows,
                                std::span<const std::size_t> candidate_features,
                                std::size_t min_leaf) {
  if (rows.size() < 2) return std::nullopt;
  const ClassCounts parent = count_labels(data, rows);
  const double parent_gini = gini(parent);
  if (parent_gini <= 0.0) return std::nullopt;

  const std::size_t leaf = std::max<std::size_t>(min_leaf, 1);
  const double n = static_cast<double>(rows.size());
  std::optional<Split> best;
  std::vector<std::pair<double, Label>> column(rows.size());

  for (std::size_t feature : candidate_features) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      column[i] = {data.at(rows[i], feature), data.labels[rows[i]]};
    }
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    ClassCounts left{};
    ClassCounts right = parent;
    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      ++left[index_of(column[i].second)];
      --right[index_of(column[i].second)];
      if (column[i].first == column[i + 1].first) continue;
      const std::size_t n_left = i + 1;
      const std::size_t n_right = column.size() - n_left;
      if (n_left < leaf || n_right < leaf) continue;

      const double decrease = parent_gini - (static_cast<double>(n_left) / n) * gini(left) -
                              (static_cast<double>(n_right) / n) * gini(right);
      if (decrease <= kMinImpurityDecrease) continue;
      const double threshold = 0.5 * (column[i].first + column[i + 1].first);
      // Decreases within rounding noise of each other count as ties.
      const bool tie = best && std::abs(decrease - best->decrease) <= kMinImpurityDecrease;
      const bool better =
          !best || (!tie && decrease > best->decrease) ||
          (tie && (feature < best->feature || (feature == best->feature && threshold < best->threshold)));
      if (better) best = Split{feature, threshold, decrease};
    }
  }
  return best;
}

void ForestParams::validate(std::size_t n_features) const {
  if (n_trees == 0 || max_depth == 0 || min_leaf == 0 || features_per_split == 0) {
    throw Error(ErrorCode::kInvalidArgument, "forest parameters must be positive");
  }
  if (features_per_split > n_features) {
    throw Error(ErrorCode::kInvalidArgument, "features_per_split exceeds the feature count");
  }
}

Label majority(const ClassCounts& counts) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kLabelCount; ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return kAllLabels[best];
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw Error(ErrorCode::kFormat, "tree: no nodes");
  if (check_subtree(nodes_, 0) != nodes_.size()) {
    throw Error(ErrorCode::kFormat, "tree: trailing nodes after the root subtree");
  }
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> features) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    i = features[nodes_[i].feature] <= nodes_[i].threshold ? i + 1 : nodes_[i].right;
  }
  return nodes_[i];
}

std::size_t DecisionTree::depth() const { return nodes_.empty() ? 0 : depth_from(nodes_, 0); }

DecisionTree grow_tree(const FeatureMatrix& data, std::span<const std::size_t> rows,
                       const ForestParams& params, Rng& rng) {
  params.validate(data.n_features);
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot grow a tree on no samples");
  TreeBuilder builder(data, params, rng);
  builder.build({rows.begin(), rows.end()}, 0);
  return DecisionTree(builder.take());
}

RandomForestModel::RandomForestModel(ForestParams params, std::size_t n_features,
                                     std::vector<DecisionTree> trees)
    : params_(params), n_features_(n_features), trees_(std::move(trees)) {
  if (trees_.size() != params_.n_trees) {
    throw Error(ErrorCode::kFormat, "model has " + std::to_string(trees_.size()) +
                                        " trees, params say " + std::to_string(params_.n_trees));
  }
  for (const auto& tree : trees_) {
    if (tree.depth() > params_.max_depth) throw Error(ErrorCode::kFormat, "tree deeper than max_depth");
    for (const auto& node : tree.nodes()) {
      if (!node.is_leaf() && node.feature >= n_features_) {
        throw Error(ErrorCode::kFormat, "split feature index out of range");
      }
    }
  }
}

Prediction RandomForestModel::predict(std::span<const double> features) const {
  if (features.size() != n_features_) {
    throw Error(ErrorCode::kInvalidArgument, "feature vector has the wrong length");
  }
  std::array<std::uint32_t, kLabelCount> votes{};
  for (const auto& tree : trees_) ++votes[index_of(tree.predict(features))];
  Prediction p;
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    p.posteriors[i] = static_cast<double>(votes[i]) / static_cast<double>(trees_.size());
  }
  p.label = majority(votes);
  return p;
}

RandomForestModel forest_fit(const FeatureMatrix& data, const ForestParams& params) {
  params.validate(data.n_features);
  std::vector<std::size_t> all(data.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const ClassCounts counts = count_labels(data, all);
  for (std::size_t c = 0; c < kLabelCount; ++c) {
    if (counts[c] == 0) {
      throw Error(ErrorCode::kMissingClass,
                  "training data has no samples of '" + std::string(to_string(kAllLabels[c])) + "'");
    }
  }

  std::vector<DecisionTree> trees;
  trees.reserve(params.n_trees);
  std::vector<std::size_t> bootstrap(data.rows());
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(mix_seed(params.seed, t));
    for (auto& r : bootstrap) r = rng.uniform_index(data.rows());
    trees.push_back(grow_tree(data, bootstrap, params, rng));
  }
  return RandomForestModel(params, data.n_features, std::move(trees));
}

RandomForestModel forest_fit(const Dataset& ds, const ForestParams& params) {
  if (ds.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot fit on an empty dataset");
  return forest_fit(FeatureMatrix::from_dataset(ds), params);
}

std::vector<Fold> stratified_kfold(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const ClassCounts& counts = ds.class_counts();
  for (std::size_t c = 0; c < kLabelCount; ++c) {
    if (counts[c] < k) {
      throw Error(ErrorCode::kTooFewPerClass,
                  "class '" + std::string(to_string(kAllLabels[c])) + "' has " +
                      std::to_string(counts[c]) + " samples, fewer than k = " + std::to_string(k));
    }
  }
  Rng rng(seed);
  std::vector<Fold> folds(k);
  std::size_t next_fold = 0;
  for (Label label : kAllLabels) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds[i].label == label) members.push_back(i);
    }
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.uniform_index(i)]);
    }
    for (std::size_t idx : members) {
      folds[next_fold].push_back(idx);
      next_fold = (next_fold + 1) % k;
    }
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

TrainTestSplit stratified_split(const Dataset& ds, std::size_t train_count, std::size_t test_count,
                                std::uint64_t seed) {
  if (train_count + test_count != ds.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "split " + std::to_string(train_count) + "/" + std::to_string(test_count) +
                    " does not add up to " + std::to_string(ds.size()) + " samples");
  }
  if (train_count == 0 || test_count == 0) {
    throw Error(ErrorCode::kInvalidArgument, "both split parts must be non-empty");
  }
  const ClassCounts& counts = ds.class_counts();

  // Largest-remainder quotas; remainder ties go to the lower label index.
  std::array<std::size_t, kLabelCount> quota{};
  std::array<std::uint64_t, kLabelCount> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < kLabelCount; ++c) {
    const std::uint64_t scaled = static_cast<std::uint64_t>(counts[c]) * train_count;
    quota[c] = static_cast<std::size_t>(scaled / ds.size());
    remainder[c] = scaled % ds.size();
    assigned += quota[c];
  }
  while (assigned < train_count) {
    std::size_t pick = 0;
    for (std::size_t c = 1; c < kLabelCount; ++c) {
      if (remainder[c] > remainder[pick]) pick = c;
    }
    ++quota[pick];
    remainder[pick] = 0;
    ++assigned;
  }

  Rng rng(seed);
  TrainTestSplit split;
  for (Label label : kAllLabels) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds[i].label == label) members.push_back(i);
    }
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.uniform_index(i)]);
    }
    const std::size_t q = quota[index_of(label)];
    split.train.insert(split.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(q));
    split.test.insert(split.test.end(), members.begin() + static_cast<std::ptrdiff_t>(q), members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

GridSearchResult grid_search(const Dataset& ds, std::span<const std::size_t> trees_grid,
                             std::span<const std::size_t> depth_grid, std::size_t k,
                             std::uint64_t seed, const ForestParams& base) {
  if (trees_grid.empty() || depth_grid.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "grid search needs non-empty grids");
  }
  const auto folds = stratified_kfold(ds, k, seed);

  // With k == 1 the single fold is both training and validation data.
  std::vector<std::pair<Dataset, Dataset>> splits;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f || folds.size() == 1) train.insert(train.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train.begin(), train.end());
    splits.emplace_back(ds.subset(train), ds.subset(folds[f]));
  }

  GridSearchResult result;
  for (std::size_t n_trees : trees_grid) {
    for (std::size_t depth : depth_grid) {
      ForestParams params = base;
      params.n_trees = n_trees;
      params.max_depth = depth;
      params.seed = seed;
      GridScore score{n_trees, depth, 0.0, {}};
      for (const auto& [train, validation] : splits) {
        const auto model = forest_fit(train, params);
        score.fold_accuracies.push_back(evaluate(model, validation).accuracy);
      }
      score.mean_accuracy =
          std::accumulate(score.fold_accuracies.begin(), score.fold_accuracies.end(), 0.0) /
          static_cast<double>(score.fold_accuracies.size());
      result.scores.push_back(std::move(score));
    }
  }
  for (std::size_t i = 1; i < result.scores.size(); ++i) {
    const GridScore& s = result.scores[i];
    const GridScore& b = result.scores[result.best_index];
    const bool better =
        s.mean_accuracy > b.mean_accuracy ||
        (s.mean_accuracy == b.mean_accuracy &&
         (s.n_trees < b.n_trees || (s.n_trees == b.n_trees && s.max_depth < b.max_depth)));
    if (better) result.best_index = i;
  }
  return result;
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  std::uint64_t sum = 0;
  for (const auto& row : counts) sum += std::accumulate(row.begin(), row.end(), std::uint64_t{0});
  return sum;
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < kLabelCount; ++i) sum += counts[i][i];
  return sum;
}

Metrics metrics_from_confusion(const ConfusionMatrix& confusion) {
  Metrics m;
  m.confusion = confusion;
  const std::uint64_t total = confusion.total();
  m.accuracy = total == 0 ? 0.0 : static_cast<double>(confusion.trace()) / static_cast<double>(total);
  for (std::size_t c = 0; c < kLabelCount; ++c) {
    std::uint64_t predicted = 0;
    std::uint64_t actual = 0;
    for (std::size_t o = 0; o < kLabelCount; ++o) {
      predicted += confusion.counts[o][c];
      actual += confusion.counts[c][o];
    }
    const double tp = confusion.counts[c][c];
    m.precision[c] = predicted == 0 ? 0.0 : tp / static_cast<double>(predicted);
    m.recall[c] = actual == 0 ? 0.0 : tp / static_cast<double>(actual);
  }
  m.precision_macro = std::accumulate(m.precision.begin(), m.precision.end(), 0.0) / kLabelCount;
  m.recall_macro = std::accumulate(m.recall.begin(), m.recall.end(), 0.0) / kLabelCount;
  return m;
}

Metrics evaluate(const RandomForestModel& model, const Dataset& test) {
  if (test.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot evaluate on an empty dataset");
  ConfusionMatrix confusion;
  for (const auto& s : test.samples()) {
    ++confusion.counts[index_of(s.label)][index_of(model.predict(s.features).label)];
  }
  return metrics_from_confusion(confusion);
}

}  // namespace dronelight
