#include "fdd/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fdd/random.hpp"

namespace fdd {

namespace {

// Candidates whose decrease is within this of the best are treated as tied;
// ties go to the lowest feature index, then the lowest threshold.
constexpr double kTieTolerance = 1e-12;

double midpoint(double lo, double hi) {
  double t = lo + (hi - lo) / 2;
  return t < hi ? t : lo;
}

}  // namespace

std::size_t FeatureSubsample::resolve(std::size_t n_features) const {
  switch (kind) {
    case Kind::All: return n_features;
    case Kind::Sqrt:
      return std::clamp<std::size_t>(
          static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_features)))), 1,
          std::max<std::size_t>(n_features, 1));
    case Kind::Count: return std::clamp<std::size_t>(count, 1, std::max<std::size_t>(n_features, 1));
  }
  return n_features;
}

void TreeConfig::validate() const {
  if (min_leaf < 1) fail(ErrorCode::InvalidValue, "tree min_leaf must be >= 1");
  if (feature_subsample.kind == FeatureSubsample::Kind::Count && feature_subsample.count < 1)
    fail(ErrorCode::InvalidValue, "feature_subsample count must be >= 1");
  if (split.kind == SplitStrategy::Kind::Histogram && (split.bins < 2 || split.bins > 65535))
    fail(ErrorCode::InvalidValue, "histogram bins must lie in [2, 65535]");
}

double gini_impurity(std::span<const std::size_t> class_counts) {
  double total = 0, sq = 0;
  for (auto c : class_counts) {
    const auto x = static_cast<double>(c);
    total += x;
    sq += x * x;
  }
  if (total == 0) fail(ErrorCode::EmptyNode, "gini impurity of an empty node");
  return (total * total - sq) / (total * total);
}

// ---------------------------------------------------------------------------
// DecisionTree

DecisionTree::DecisionTree(std::size_t n_features, std::size_t n_outputs, TreeConfig config,
                           std::vector<TreeNode> nodes)
    : n_features_(n_features),
      n_outputs_(n_outputs),
      config_(config),
      nodes_(std::move(nodes)) {
  if (nodes_.empty()) fail(ErrorCode::InvalidValue, "tree has no nodes");
  std::vector<int> refs(nodes_.size(), 0);
  refs[0] = 1;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.is_leaf()) {
      if (n.value.size() != n_outputs_)
        fail(ErrorCode::InvalidValue, "leaf " + std::to_string(i) + " has " +
                                          std::to_string(n.value.size()) + " outputs, expected " +
                                          std::to_string(n_outputs_));
      continue;
    }
    if (static_cast<std::size_t>(n.feature) >= n_features_)
      fail(ErrorCode::InvalidValue, "node " + std::to_string(i) + " splits on unknown feature");
    if (n.left <= i || n.right <= i || n.left >= nodes_.size() || n.right >= nodes_.size() ||
        n.left == n.right)
      fail(ErrorCode::InvalidValue, "node " + std::to_string(i) + " has invalid children");
    ++refs[n.left];
    ++refs[n.right];
  }
  for (std::size_t i = 0; i < refs.size(); ++i)
    if (refs[i] != 1)
      fail(ErrorCode::InvalidValue, "node " + std::to_string(i) + " is not referenced exactly once");
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes_[i].is_leaf()) d[nodes_[i].left] = d[nodes_[i].right] = d[i] + 1;
  }
  return best;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::vector<SplitRecord> DecisionTree::split_log() const {
  std::vector<SplitRecord> log;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.is_leaf()) continue;
    log.push_back({i, static_cast<std::size_t>(n.feature), n.threshold, n.impurity_decrease,
                   n.weight, n.gain});
  }
  return log;
}

std::span<const double> DecisionTree::predict(std::span<const double> row) const {
  if (row.size() != n_features_)
    fail(ErrorCode::DimensionMismatch, "row has " + std::to_string(row.size()) +
                                           " values, tree expects " + std::to_string(n_features_));
  for (double v : row)
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteInput, "row contains a non-finite value");
  return find_leaf([&](std::size_t j) { return row[j]; }).value;
}

// ---------------------------------------------------------------------------
// Histogram bins

FeatureBins::FeatureBins(std::span<const std::span<const double>> columns, std::size_t max_bins) {
  if (max_bins < 2 || max_bins > 65535)
    fail(ErrorCode::InvalidValue, "histogram bins must lie in [2, 65535]");
  lower_.resize(columns.size());
  upper_.resize(columns.size());
  codes_.resize(columns.size());
  for (std::size_t f = 0; f < columns.size(); ++f) {
    auto col = columns[f];
    std::vector<double> sorted(col.begin(), col.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> uniq;
    std::vector<std::size_t> counts;
    for (double v : sorted) {
      if (uniq.empty() || v != uniq.back()) {
        uniq.push_back(v);
        counts.push_back(0);
      }
      ++counts.back();
    }
    auto& lo = lower_[f];
    auto& hi = upper_[f];
    if (uniq.size() <= max_bins) {
      lo = uniq;
      hi = uniq;
    } else {
      const double n = static_cast<double>(sorted.size());
      std::size_t cumulative = 0;
      bool open = false;
      for (std::size_t u = 0; u < uniq.size(); ++u) {
        if (!open) {
          lo.push_back(uniq[u]);
          open = true;
        }
        cumulative += counts[u];
        const double boundary = static_cast<double>(hi.size() + 1) * n / static_cast<double>(max_bins);
        if (static_cast<double>(cumulative) >= boundary || u + 1 == uniq.size()) {
          hi.push_back(uniq[u]);
          open = false;
        }
      }
    }
    auto& codes = codes_[f];
    codes.resize(col.size());
    for (std::size_t i = 0; i < col.size(); ++i)
      codes[i] = static_cast<std::uint16_t>(std::lower_bound(hi.begin(), hi.end(), col[i]) - hi.begin());
  }
}

// ---------------------------------------------------------------------------
// Growth

namespace {

struct Candidate {
  std::size_t feature;
  double threshold;
  double decrease;
};

class Grower {
 public:
  Grower(const TreeTrainingSet& data, const TreeConfig& cfg, std::uint64_t seed)
      : data_(data),
        cfg_(cfg),
        rng_(seed),
        classification_(cfg.task == TreeTask::Classification),
        n_features_(data.columns.size()),
        n_outputs_(classification_ ? data.class_count : 1),
        subset_size_(cfg.feature_subsample.resolve(n_features_)),
        rows_(data.samples.begin(), data.samples.end()) {
    features_.resize(n_features_);
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  DecisionTree grow() {
    struct Task {
      std::size_t node, begin, end, depth;
    };
    nodes_.emplace_back();
    std::vector<Task> stack{{0, 0, rows_.size(), 0}};
    const double root_n = static_cast<double>(rows_.size());
    while (!stack.empty()) {
      Task t = stack.back();
      stack.pop_back();
      const std::size_t n = t.end - t.begin;
      nodes_[t.node].n_samples = n;
      nodes_[t.node].weight = static_cast<double>(n) / root_n;
      summarize(t.begin, t.end);

      std::optional<Candidate> best;
      const bool depth_ok = !cfg_.max_depth || t.depth < *cfg_.max_depth;
      if (depth_ok && n >= 2 * cfg_.min_leaf && !pure_) best = find_split(t.begin, t.end);
      if (!best) {
        nodes_[t.node].value = leaf_value(n);
        continue;
      }

      const auto col = data_.columns[best->feature];
      auto mid_it = std::stable_partition(
          rows_.begin() + static_cast<std::ptrdiff_t>(t.begin),
          rows_.begin() + static_cast<std::ptrdiff_t>(t.end),
          [&](std::uint32_t r) { return col[r] <= best->threshold; });
      const std::size_t mid = static_cast<std::size_t>(mid_it - rows_.begin());

      const std::size_t left = nodes_.size();
      nodes_.emplace_back();
      nodes_.emplace_back();
      auto& node = nodes_[t.node];
      node.feature = static_cast<std::int32_t>(best->feature);
      node.threshold = best->threshold;
      node.left = static_cast<std::uint32_t>(left);
      node.right = static_cast<std::uint32_t>(left + 1);
      node.impurity_decrease = best->decrease;
      node.gain = best->decrease * static_cast<double>(n);
      stack.push_back({left + 1, mid, t.end, t.depth + 1});
      stack.push_back({left, t.begin, mid, t.depth + 1});
    }
    return DecisionTree(n_features_, n_outputs_, cfg_, std::move(nodes_));
  }

 private:
  // Node totals: class counts (classification) or target sum (regression).
  void summarize(std::size_t begin, std::size_t end) {
    const std::size_t n = end - begin;
    if (classification_) {
      counts_.assign(n_outputs_, 0.0);
      for (std::size_t k = begin; k < end; ++k) counts_[data_.labels[rows_[k]]] += 1;
      sq_ = 0;
      pure_ = false;
      for (double c : counts_) {
        sq_ += c * c;
        if (c == static_cast<double>(n)) pure_ = true;
      }
    } else {
      sum_ = 0;
      for (std::size_t k = begin; k < end; ++k) sum_ += data_.targets[rows_[k]];
      const double mean = sum_ / static_cast<double>(n);
      double sse = 0;
      for (std::size_t k = begin; k < end; ++k) {
        const double e = data_.targets[rows_[k]] - mean;
        sse += e * e;
      }
      pure_ = !(sse > 0);
    }
  }

  std::vector<double> leaf_value(std::size_t n) const {
    const double dn = static_cast<double>(n);
    if (!classification_) return {sum_ / dn};
    std::vector<double> dist(n_outputs_);
    for (std::size_t c = 0; c < n_outputs_; ++c) dist[c] = counts_[c] / dn;
    return dist;
  }

  std::span<const std::size_t> draw_features() {
    if (subset_size_ >= n_features_) {
      std::iota(features_.begin(), features_.end(), std::size_t{0});
      return features_;
    }
    std::iota(features_.begin(), features_.end(), std::size_t{0});
    for (std::size_t i = 0; i < subset_size_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n_features_ - 1);
      std::swap(features_[i], features_[pick(rng_)]);
    }
    std::sort(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(subset_size_));
    return {features_.data(), subset_size_};
  }

  std::optional<Candidate> find_split(std::size_t begin, std::size_t end) {
    candidates_.clear();
    for (std::size_t f : draw_features()) {
      if (cfg_.split.kind == SplitStrategy::Kind::Exact)
        scan_exact(f, begin, end);
      else
        scan_histogram(f, begin, end);
    }
    double best = 0;
    for (const auto& c : candidates_) best = std::max(best, c.decrease);
    if (!(best > kTieTolerance)) return std::nullopt;
    for (const auto& c : candidates_)
      if (c.decrease >= best - kTieTolerance) return c;
    return std::nullopt;
  }

  // Impurity decrease for a left/right partition, from running statistics.
  double class_decrease(double n_left, double sq_left, double n_right, double sq_right,
                        double n) const {
    return (sq_left / n_left + sq_right / n_right - sq_ / n) / n;
  }
  double regression_decrease(double n_left, double sum_left, double n) const {
    const double sum_right = sum_ - sum_left;
    const double n_right = n - n_left;
    return (sum_left * sum_left / n_left + sum_right * sum_right / n_right - sum_ * sum_ / n) / n;
  }

  void scan_exact(std::size_t f, std::size_t begin, std::size_t end) {
    const auto col = data_.columns[f];
    const std::size_t n = end - begin;
    const double dn = static_cast<double>(n);
    sorted_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::uint32_t r = rows_[begin + k];
      sorted_[k] = {col[r], r};
    }
    std::sort(sorted_.begin(), sorted_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (sorted_.front().first == sorted_.back().first) return;

    const std::size_t min_leaf = cfg_.min_leaf;
    if (classification_) {
      left_counts_.assign(n_outputs_, 0.0);
      double sq_left = 0, sq_right = sq_;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto c = data_.labels[sorted_[k].second];
        sq_left += 2 * left_counts_[c] + 1;
        sq_right -= 2 * (counts_[c] - left_counts_[c]) - 1;
        left_counts_[c] += 1;
        if (sorted_[k].first == sorted_[k + 1].first) continue;
        const std::size_t n_left = k + 1;
        if (n_left < min_leaf) continue;
        if (n - n_left < min_leaf) break;
        const double nl = static_cast<double>(n_left);
        candidates_.push_back({f, midpoint(sorted_[k].first, sorted_[k + 1].first),
                               class_decrease(nl, sq_left, dn - nl, sq_right, dn)});
      }
    } else {
      double sum_left = 0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        sum_left += data_.targets[sorted_[k].second];
        if (sorted_[k].first == sorted_[k + 1].first) continue;
        const std::size_t n_left = k + 1;
        if (n_left < min_leaf) continue;
        if (n - n_left < min_leaf) break;
        candidates_.push_back({f, midpoint(sorted_[k].first, sorted_[k + 1].first),
                               regression_decrease(static_cast<double>(n_left), sum_left, dn)});
      }
    }
  }

  void scan_histogram(std::size_t f, std::size_t begin, std::size_t end) {
    const FeatureBins& bins = *data_.bins;
    const std::size_t nb = bins.n_bins(f);
    const std::size_t n = end - begin;
    const double dn = static_cast<double>(n);
    const std::size_t width = classification_ ? n_outputs_ : 1;
    hist_.assign(nb * width, 0.0);
    bin_n_.assign(nb, 0);
    for (std::size_t k = begin; k < end; ++k) {
      const std::uint32_t r = rows_[k];
      const std::size_t b = bins.code(f, r);
      ++bin_n_[b];
      if (classification_)
        hist_[b * width + data_.labels[r]] += 1;
      else
        hist_[b] += data_.targets[r];
    }

    const double min_leaf = static_cast<double>(cfg_.min_leaf);
    std::optional<std::size_t> prev;
    double n_left = 0, sum_left = 0;
    left_counts_.assign(n_outputs_, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
      if (bin_n_[b] == 0) continue;
      if (prev && n_left >= min_leaf && dn - n_left >= min_leaf) {
        const double threshold = midpoint(bins.highest(f, *prev), bins.lowest(f, b));
        double dec;
        if (classification_) {
          double sq_left = 0, sq_right = 0;
          for (std::size_t c = 0; c < n_outputs_; ++c) {
            sq_left += left_counts_[c] * left_counts_[c];
            const double rc = counts_[c] - left_counts_[c];
            sq_right += rc * rc;
          }
          dec = class_decrease(n_left, sq_left, dn - n_left, sq_right, dn);
        } else {
          dec = regression_decrease(n_left, sum_left, dn);
        }
        candidates_.push_back({f, threshold, dec});
      }
      n_left += static_cast<double>(bin_n_[b]);
      if (classification_)
        for (std::size_t c = 0; c < n_outputs_; ++c) left_counts_[c] += hist_[b * width + c];
      else
        sum_left += hist_[b];
      prev = b;
    }
  }

  const TreeTrainingSet& data_;
  const TreeConfig& cfg_;
  Rng rng_;
  bool classification_;
  std::size_t n_features_;
  std::size_t n_outputs_;
  std::size_t subset_size_;
  std::vector<std::uint32_t> rows_;
  std::vector<std::size_t> features_;
  std::vector<TreeNode> nodes_;

  // per-node scratch
  std::vector<double> counts_;
  std::vector<double> left_counts_;
  double sq_ = 0;
  double sum_ = 0;
  bool pure_ = false;
  std::vector<Candidate> candidates_;
  std::vector<std::pair<double, std::uint32_t>> sorted_;
  std::vector<double> hist_;
  std::vector<std::size_t> bin_n_;
};

std::vector<std::span<const double>> columns_of(const Dataset& d) {
  std::vector<std::span<const double>> cols;
  for (std::size_t j = 0; j < d.sensors(); ++j) cols.push_back(d.column(j));
  return cols;
}

DecisionTree fit_on(const Dataset& d, std::span<const double> targets, const TreeConfig& cfg,
                    std::uint64_t seed) {
  cfg.validate();
  if (d.rows() < 2) fail(ErrorCode::EmptyInput, "fit_tree needs at least 2 rows");
  auto cols = columns_of(d);
  std::vector<std::uint32_t> samples(d.rows());
  std::iota(samples.begin(), samples.end(), 0u);
  std::optional<FeatureBins> bins;
  if (cfg.split.kind == SplitStrategy::Kind::Histogram) bins.emplace(cols, cfg.split.bins);
  TreeTrainingSet set{cols, d.labels(), targets, d.class_count(), samples,
                      bins ? &*bins : nullptr};
  return grow_tree(set, cfg, seed);
}

}  // namespace

DecisionTree grow_tree(const TreeTrainingSet& data, const TreeConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (data.samples.empty()) fail(ErrorCode::EmptyInput, "no training samples");
  if (cfg.split.kind == SplitStrategy::Kind::Histogram && data.bins == nullptr)
    fail(ErrorCode::InvalidArgument, "histogram split strategy requires feature bins");
  if (cfg.task == TreeTask::Classification && data.class_count == 0)
    fail(ErrorCode::EmptyInput, "classification tree needs at least one class");
  return Grower(data, cfg, seed).grow();
}

DecisionTree fit_tree(const Dataset& d, const TreeConfig& cfg, std::uint64_t seed) {
  if (cfg.task != TreeTask::Classification)
    fail(ErrorCode::InvalidArgument, "regression trees need explicit targets");
  return fit_on(d, {}, cfg, seed);
}

DecisionTree fit_tree(const Dataset& d, std::span<const double> targets, const TreeConfig& cfg,
                      std::uint64_t seed) {
  if (cfg.task != TreeTask::RegressionOnGradients)
    fail(ErrorCode::InvalidArgument, "targets given for a classification tree");
  if (targets.size() != d.rows()) fail(ErrorCode::LengthMismatch, "one target per row required");
  for (double t : targets)
    if (!std::isfinite(t)) fail(ErrorCode::NonFiniteInput, "non-finite regression target");
  return fit_on(d, targets, cfg, seed);
}

std::vector<double> tree_importance_contributions(const DecisionTree& t, ContributionMode mode,
                                                  bool node_weighted) {
  std::vector<double> out(t.n_features(), 0.0);
  for (const auto& s : t.split_log()) {
    if (mode == ContributionMode::Gain)
      out[s.feature] += s.gain;
    else
      out[s.feature] += node_weighted ? s.weight * s.impurity_decrease : s.impurity_decrease;
  }
  return out;
}

}  // namespace fdd
