#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fdd/dataset.hpp"
#include "fdd/tree.hpp"

namespace fdd {

enum class EnsembleFamily { Bagging, Boosting };
enum class Voting { Soft, Hard };

struct EnsembleConfig {
  EnsembleFamily family = EnsembleFamily::Bagging;
  std::size_t n_trees = 50;    // bagging: trees; boosting: rounds
  double learning_rate = 0.1;  // boosting only
  bool bootstrap = true;
  TreeConfig tree;
  std::uint64_t master_seed = 0;
  Voting voting = Voting::Soft;  // bagging only

  /// Random-forest style: bootstrap, sqrt(features) per node, unlimited depth.
  static EnsembleConfig bagging_defaults();
  /// Gradient boosting: 100 rounds, eta 0.1, depth 6, all features, no resampling.
  static EnsembleConfig boosting_defaults();

  void validate() const;
  bool operator==(const EnsembleConfig&) const = default;
};

struct Prediction {
  ClassId label;
  std::vector<double> probabilities;
};

/// Trained ensemble. Bagging holds n_trees classification trees; boosting
/// holds n_trees * class_count gradient trees laid out round-major
/// (tree r * K + c is round r's tree for class c).
class EnsembleModel {
 public:
  EnsembleModel(EnsembleConfig config, std::vector<std::string> symbols, std::size_t class_count,
                std::vector<double> base_scores, std::vector<DecisionTree> trees);

  const EnsembleConfig& config() const noexcept { return config_; }
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }
  std::size_t class_count() const noexcept { return class_count_; }
  const std::vector<double>& base_scores() const noexcept { return base_scores_; }
  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  const std::string& schema_fingerprint() const noexcept { return fingerprint_; }

  /// Checked single-row prediction (DimensionMismatch, NonFiniteInput).
  Prediction predict(std::span<const double> row) const;

  /// Boosting: base score plus learning-rate-scaled tree outputs per class.
  std::vector<double> raw_scores(std::span<const double> row) const;

  /// Predicts every row of `d`; SchemaMismatch unless d's sensors are
  /// exactly this model's symbols in order.
  std::vector<ClassId> predict_labels(const Dataset& d) const;

  bool operator==(const EnsembleModel&) const = default;

 private:
  template <class FeatureValue>
  void accumulate(FeatureValue&& value, std::vector<double>& out) const;

  EnsembleConfig config_;
  std::vector<std::string> symbols_;
  std::size_t class_count_;
  std::vector<double> base_scores_;
  std::vector<DecisionTree> trees_;
  std::string fingerprint_;
};

std::string schema_fingerprint(std::span<const std::string> symbols);

/// Trains on every row of `d`. Results are identical for any `threads`.
EnsembleModel fit_ensemble(const Dataset& d, const EnsembleConfig& cfg, unsigned threads = 0);

enum class ImportanceMode { Mdi, Gain };

struct ImportanceRanking {
  std::vector<std::string> symbols;
  std::vector<double> scores;
  std::vector<std::size_t> order;  // indices into symbols, best first
  ImportanceMode mode = ImportanceMode::Mdi;
  // Set when the mode is not the family's usual pairing (MDI for bagging,
  // gain for boosting). The scores are still valid.
  bool mode_mismatch = false;

  std::vector<std::string> ordered_symbols() const;
};

ImportanceRanking feature_importance(const EnsembleModel& m, ImportanceMode mode,
                                     bool node_weighted = true);

/// Builds a ranking from raw scores (descending, ties to lower index).
ImportanceRanking make_ranking(std::vector<std::string> symbols, std::vector<double> scores,
                               ImportanceMode mode, bool mode_mismatch = false);

}  // namespace fdd
