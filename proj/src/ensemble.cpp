#include "fdd/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>

#include "fdd/parallel.hpp"
#include "fdd/random.hpp"

namespace fdd {

EnsembleConfig EnsembleConfig::bagging_defaults() {
  EnsembleConfig c;
  c.family = EnsembleFamily::Bagging;
  c.n_trees = 50;
  c.bootstrap = true;
  c.tree.max_depth = std::nullopt;
  c.tree.min_leaf = 1;
  c.tree.feature_subsample = FeatureSubsample::sqrt();
  c.tree.task = TreeTask::Classification;
  return c;
}

EnsembleConfig EnsembleConfig::boosting_defaults() {
  EnsembleConfig c;
  c.family = EnsembleFamily::Boosting;
  c.n_trees = 100;
  c.learning_rate = 0.1;
  c.bootstrap = false;
  c.tree.max_depth = 6;
  c.tree.min_leaf = 1;
  c.tree.feature_subsample = FeatureSubsample::all();
  c.tree.task = TreeTask::RegressionOnGradients;
  return c;
}

void EnsembleConfig::validate() const {
  if (n_trees < 1) fail(ErrorCode::InvalidValue, "n_trees must be >= 1");
  if (family == EnsembleFamily::Boosting && !(learning_rate > 0.0 && learning_rate <= 1.0))
    fail(ErrorCode::InvalidValue, "learning_rate must lie in (0, 1]");
  const TreeTask expected = family == EnsembleFamily::Bagging ? TreeTask::Classification
                                                              : TreeTask::RegressionOnGradients;
  if (tree.task != expected)
    fail(ErrorCode::InvalidValue,
         family == EnsembleFamily::Bagging ? "bagging trees must be classification trees"
                                           : "boosting trees must fit gradients");
  tree.validate();
}

std::string schema_fingerprint(std::span<const std::string> symbols) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const auto& s : symbols) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    h ^= 0x1f;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Model

EnsembleModel::EnsembleModel(EnsembleConfig config, std::vector<std::string> symbols,
                             std::size_t class_count, std::vector<double> base_scores,
                             std::vector<DecisionTree> trees)
    : config_(std::move(config)),
      symbols_(std::move(symbols)),
      class_count_(class_count),
      base_scores_(std::move(base_scores)),
      trees_(std::move(trees)),
      fingerprint_(fdd::schema_fingerprint(symbols_)) {
  config_.validate();
  if (class_count_ < 2) fail(ErrorCode::SingleClass, "model needs at least two classes");
  const bool boosting = config_.family == EnsembleFamily::Boosting;
  const std::size_t expected = boosting ? config_.n_trees * class_count_ : config_.n_trees;
  if (trees_.size() != expected)
    fail(ErrorCode::InvalidValue, "model has " + std::to_string(trees_.size()) +
                                      " trees, expected " + std::to_string(expected));
  if (boosting && base_scores_.size() != class_count_)
    fail(ErrorCode::InvalidValue, "boosting model needs one base score per class");
  if (!boosting && !base_scores_.empty())
    fail(ErrorCode::InvalidValue, "bagging model carries no base scores");
  for (const auto& t : trees_) {
    if (t.n_features() != symbols_.size())
      fail(ErrorCode::DimensionMismatch, "tree feature count differs from model schema");
    if (t.n_outputs() != (boosting ? 1 : class_count_))
      fail(ErrorCode::InvalidValue, "tree output width does not match model family");
  }
}

template <class FeatureValue>
void EnsembleModel::accumulate(FeatureValue&& value, std::vector<double>& out) const {
  const std::size_t k = class_count_;
  if (config_.family == EnsembleFamily::Boosting) {
    out = base_scores_;
    for (std::size_t t = 0; t < trees_.size(); ++t)
      out[t % k] += config_.learning_rate * trees_[t].find_leaf(value).value[0];
    return;
  }
  out.assign(k, 0.0);
  const double share = 1.0 / static_cast<double>(trees_.size());
  for (const auto& tree : trees_) {
    const auto& dist = tree.find_leaf(value).value;
    if (config_.voting == Voting::Soft) {
      for (std::size_t c = 0; c < k; ++c) out[c] += dist[c] * share;
    } else {
      const auto vote = std::max_element(dist.begin(), dist.end()) - dist.begin();
      out[static_cast<std::size_t>(vote)] += share;
    }
  }
}

namespace {

ClassId argmax(const std::vector<double>& v) {
  return static_cast<ClassId>(std::max_element(v.begin(), v.end()) - v.begin());
}

void softmax_inplace(std::vector<double>& v) {
  const double hi = *std::max_element(v.begin(), v.end());
  double z = 0;
  for (double& x : v) z += (x = std::exp(x - hi));
  for (double& x : v) x /= z;
}

void check_row(std::span<const double> row, std::size_t width) {
  if (row.size() != width)
    fail(ErrorCode::DimensionMismatch, "row has " + std::to_string(row.size()) +
                                           " values, model expects " + std::to_string(width));
  for (double v : row)
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteInput, "row contains a non-finite value");
}

}  // namespace

std::vector<double> EnsembleModel::raw_scores(std::span<const double> row) const {
  check_row(row, symbols_.size());
  std::vector<double> out;
  accumulate([&](std::size_t j) { return row[j]; }, out);
  return out;
}

Prediction EnsembleModel::predict(std::span<const double> row) const {
  check_row(row, symbols_.size());
  Prediction p;
  accumulate([&](std::size_t j) { return row[j]; }, p.probabilities);
  if (config_.family == EnsembleFamily::Boosting) softmax_inplace(p.probabilities);
  p.label = argmax(p.probabilities);
  return p;
}

std::vector<ClassId> EnsembleModel::predict_labels(const Dataset& d) const {
  if (d.symbols() != symbols_)
    fail(ErrorCode::SchemaMismatch, "dataset sensors do not match model schema (fingerprint " +
                                        fingerprint_ + ")");
  std::vector<ClassId> out(d.rows());
  std::vector<double> scores;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    accumulate([&](std::size_t j) { return d.value(i, j); }, scores);
    out[i] = argmax(scores);  // softmax is monotone
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

namespace {

std::vector<std::uint32_t> draw_samples(std::size_t n, bool bootstrap, std::uint64_t seed) {
  std::vector<std::uint32_t> s(n);
  if (!bootstrap) {
    std::iota(s.begin(), s.end(), 0u);
    return s;
  }
  Rng rng(seed);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
  for (auto& x : s) x = pick(rng);
  return s;
}

EnsembleModel fit_bagging(const Dataset& d, const EnsembleConfig& cfg,
                          std::span<const std::span<const double>> cols, const FeatureBins* bins,
                          unsigned threads) {
  std::vector<std::optional<DecisionTree>> trees(cfg.n_trees);
  parallel_for(cfg.n_trees, threads, [&](std::size_t i) {
    const std::uint64_t tree_seed = derive_seed(cfg.master_seed, i);
    const auto samples = draw_samples(d.rows(), cfg.bootstrap, derive_seed(tree_seed, 0));
    TreeTrainingSet set{cols, d.labels(), {}, d.class_count(), samples, bins};
    trees[i].emplace(grow_tree(set, cfg.tree, derive_seed(tree_seed, 1)));
  });
  std::vector<DecisionTree> out;
  out.reserve(trees.size());
  for (auto& t : trees) out.push_back(std::move(*t));
  return EnsembleModel(cfg, d.symbols(), d.class_count(), {}, std::move(out));
}

EnsembleModel fit_boosting(const Dataset& d, const EnsembleConfig& cfg,
                           std::span<const std::span<const double>> cols, const FeatureBins* bins,
                           unsigned threads) {
  const std::size_t n = d.rows();
  const std::size_t k = d.class_count();
  const auto counts = d.class_counts();

  // Log class priors; an absent class is floored at one pseudo-sample.
  std::vector<double> base(k);
  for (std::size_t c = 0; c < k; ++c)
    base[c] = std::log(static_cast<double>(std::max<std::size_t>(counts[c], 1)) /
                       static_cast<double>(n));

  std::vector<double> scores(n * k);  // row-major
  for (std::size_t i = 0; i < n; ++i) std::copy(base.begin(), base.end(), scores.begin() + i * k);

  std::vector<double> probs(n * k);
  std::vector<std::vector<double>> residuals(k, std::vector<double>(n));
  std::vector<std::optional<DecisionTree>> trees(cfg.n_trees * k);

  for (std::size_t round = 0; round < cfg.n_trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* s = &scores[i * k];
      double* p = &probs[i * k];
      const double hi = *std::max_element(s, s + k);
      double z = 0;
      for (std::size_t c = 0; c < k; ++c) z += (p[c] = std::exp(s[c] - hi));
      for (std::size_t c = 0; c < k; ++c) p[c] /= z;
    }
    parallel_for(k, threads, [&](std::size_t c) {
      auto& r = residuals[c];
      for (std::size_t i = 0; i < n; ++i)
        r[i] = (d.label(i) == c ? 1.0 : 0.0) - probs[i * k + c];
      const std::size_t slot = round * k + c;
      const std::uint64_t tree_seed = derive_seed(cfg.master_seed, slot);
      const auto samples = draw_samples(n, cfg.bootstrap, derive_seed(tree_seed, 0));
      TreeTrainingSet set{cols, {}, r, k, samples, bins};
      auto& tree = trees[slot].emplace(grow_tree(set, cfg.tree, derive_seed(tree_seed, 1)));
      for (std::size_t i = 0; i < n; ++i)
        scores[i * k + c] +=
            cfg.learning_rate * tree.find_leaf([&](std::size_t j) { return cols[j][i]; }).value[0];
    });
  }
  std::vector<DecisionTree> out;
  out.reserve(trees.size());
  for (auto& t : trees) out.push_back(std::move(*t));
  return EnsembleModel(cfg, d.symbols(), k, std::move(base), std::move(out));
}

}  // namespace

EnsembleModel fit_ensemble(const Dataset& d, const EnsembleConfig& cfg, unsigned threads) {
  cfg.validate();
  if (d.rows() == 0 || d.sensors() == 0) fail(ErrorCode::EmptyInput, "empty training set");
  const auto counts = d.class_counts();
  if (std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) < 2)
    fail(ErrorCode::SingleClass, "training set contains a single class");

  std::vector<std::span<const double>> cols;
  for (std::size_t j = 0; j < d.sensors(); ++j) cols.push_back(d.column(j));
  std::optional<FeatureBins> bins;
  if (cfg.tree.split.kind == SplitStrategy::Kind::Histogram) bins.emplace(cols, cfg.tree.split.bins);
  const FeatureBins* b = bins ? &*bins : nullptr;

  return cfg.family == EnsembleFamily::Bagging ? fit_bagging(d, cfg, cols, b, threads)
                                               : fit_boosting(d, cfg, cols, b, threads);
}

// ---------------------------------------------------------------------------
// Importance

std::vector<std::string> ImportanceRanking::ordered_symbols() const {
  std::vector<std::string> out;
  out.reserve(order.size());
  for (auto j : order) out.push_back(symbols[j]);
  return out;
}

ImportanceRanking make_ranking(std::vector<std::string> symbols, std::vector<double> scores,
                               ImportanceMode mode, bool mode_mismatch) {
  if (symbols.size() != scores.size())
    fail(ErrorCode::LengthMismatch, "one importance score per sensor required");
  ImportanceRanking r;
  r.order.resize(scores.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  r.symbols = std::move(symbols);
  r.scores = std::move(scores);
  r.mode = mode;
  r.mode_mismatch = mode_mismatch;
  return r;
}

ImportanceRanking feature_importance(const EnsembleModel& m, ImportanceMode mode,
                                     bool node_weighted) {
  const std::size_t f = m.symbols().size();
  std::vector<double> scores(f, 0.0);
  for (const auto& t : m.trees()) {
    auto contrib = tree_importance_contributions(
        t, mode == ImportanceMode::Mdi ? ContributionMode::Impurity : ContributionMode::Gain,
        node_weighted);
    for (std::size_t j = 0; j < f; ++j) scores[j] += contrib[j];
  }
  if (mode == ImportanceMode::Mdi) {
    for (double& s : scores) s /= static_cast<double>(m.trees().size());
  } else {
    const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
    if (total > 0)
      for (double& s : scores) s /= total;
  }
  const bool boosting = m.config().family == EnsembleFamily::Boosting;
  const bool mismatch = (mode == ImportanceMode::Mdi) == boosting;
  return make_ranking(m.symbols(), std::move(scores), mode, mismatch);
}

}  // namespace fdd
