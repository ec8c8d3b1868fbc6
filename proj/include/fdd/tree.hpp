#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fdd/dataset.hpp"

namespace fdd {

enum class TreeTask { Classification, RegressionOnGradients };

/// Size of the random feature subset drawn at every node.
struct FeatureSubsample {
  enum class Kind { All, Sqrt, Count };
  Kind kind = Kind::All;
  std::size_t count = 0;  // used when kind == Count; clamped to the feature count

  static FeatureSubsample all() { return {}; }
  static FeatureSubsample sqrt() { return {Kind::Sqrt, 0}; }
  static FeatureSubsample fixed(std::size_t m) { return {Kind::Count, m}; }
  std::size_t resolve(std::size_t n_features) const;
  bool operator==(const FeatureSubsample&) const = default;
};

struct SplitStrategy {
  enum class Kind { Exact, Histogram };
  Kind kind = Kind::Exact;
  std::size_t bins = 255;

  static SplitStrategy exact() { return {}; }
  static SplitStrategy histogram(std::size_t bins) { return {Kind::Histogram, bins}; }
  bool operator==(const SplitStrategy&) const = default;
};

struct TreeConfig {
  std::optional<std::size_t> max_depth;
  std::size_t min_leaf = 1;
  FeatureSubsample feature_subsample;
  SplitStrategy split;
  TreeTask task = TreeTask::Classification;

  void validate() const;
  bool operator==(const TreeConfig&) const = default;
};

/// Flat node record. Leaves have feature < 0 and carry `value`: a class
/// distribution for classification trees, a single score for gradient trees.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double impurity_decrease = 0.0;  // parent impurity minus size-weighted child impurity
  double gain = 0.0;               // n_samples * impurity_decrease
  double weight = 1.0;             // n_samples / root n_samples
  std::size_t n_samples = 0;
  std::vector<double> value;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct SplitRecord {
  std::size_t node;
  std::size_t feature;
  double threshold;
  double impurity_decrease;
  double weight;
  double gain;
};

class DecisionTree {
 public:
  /// Validates structure: node 0 is the root, children index forward, every
  /// node is reachable exactly once, leaf values have n_outputs entries.
  DecisionTree(std::size_t n_features, std::size_t n_outputs, TreeConfig config,
               std::vector<TreeNode> nodes);

  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t n_outputs() const noexcept { return n_outputs_; }
  const TreeConfig& config() const noexcept { return config_; }
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  /// One entry per internal node, in node order.
  std::vector<SplitRecord> split_log() const;

  /// Checked prediction (DimensionMismatch, NonFiniteInput).
  std::span<const double> predict(std::span<const double> row) const;

  /// Unchecked routing; `feature_value(j)` yields the row's value of feature j.
  template <class FeatureValue>
  const TreeNode& find_leaf(FeatureValue&& feature_value) const {
    const TreeNode* n = &nodes_.front();
    while (!n->is_leaf())
      n = &nodes_[feature_value(static_cast<std::size_t>(n->feature)) <= n->threshold ? n->left
                                                                                      : n->right];
    return *n;
  }

  bool operator==(const DecisionTree&) const = default;

 private:
  std::size_t n_features_;
  std::size_t n_outputs_;
  TreeConfig config_;
  std::vector<TreeNode> nodes_;
};

/// Gini impurity 1 - sum p_i^2 of a class-count vector. EmptyNode if total is 0.
double gini_impurity(std::span<const std::size_t> class_counts);

/// Per-feature bin layout for histogram split finding. Columns with at most
/// `max_bins` distinct values get one bin per value; otherwise bins hold
/// roughly equal sample counts.
class FeatureBins {
 public:
  FeatureBins() = default;
  FeatureBins(std::span<const std::span<const double>> columns, std::size_t max_bins);

  std::size_t n_bins(std::size_t feature) const { return upper_[feature].size(); }
  std::uint16_t code(std::size_t feature, std::size_t row) const {
    return codes_[feature][row];
  }
  double lowest(std::size_t feature, std::size_t bin) const { return lower_[feature][bin]; }
  double highest(std::size_t feature, std::size_t bin) const { return upper_[feature][bin]; }

 private:
  std::vector<std::vector<double>> lower_;
  std::vector<std::vector<double>> upper_;
  std::vector<std::vector<std::uint16_t>> codes_;
};

/// Non-owning training view. `labels` is used for classification and
/// `targets` for gradient regression; `samples` lists the row indices to fit
/// on (repeats allowed, which is how bootstrap resamples are expressed).
struct TreeTrainingSet {
  std::span<const std::span<const double>> columns;
  std::span<const ClassId> labels;
  std::span<const double> targets;
  std::size_t class_count = 0;
  std::span<const std::uint32_t> samples;
  const FeatureBins* bins = nullptr;  // required for histogram strategy
};

DecisionTree grow_tree(const TreeTrainingSet& data, const TreeConfig& cfg, std::uint64_t seed);

/// Classification tree on every row of `d` (cfg.task must be Classification).
DecisionTree fit_tree(const Dataset& d, const TreeConfig& cfg, std::uint64_t seed);

/// Regression tree on real targets (one per row of `d`).
DecisionTree fit_tree(const Dataset& d, std::span<const double> targets, const TreeConfig& cfg,
                      std::uint64_t seed);

enum class ContributionMode { Impurity, Gain };

/// Sum of split_log entries per feature. Impurity mode weights each decrease
/// by the node's share of root samples unless `node_weighted` is false.
std::vector<double> tree_importance_contributions(const DecisionTree& t, ContributionMode mode,
                                                  bool node_weighted = true);

}  // namespace fdd
