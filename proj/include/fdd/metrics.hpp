#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fdd/dataset.hpp"

namespace fdd {

class EnsembleModel;

/// K x K counts; rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t k) : k_(k), counts_(k * k, 0) {}
  ConfusionMatrix(std::size_t k, std::vector<std::uint64_t> row_major);

  std::size_t classes() const noexcept { return k_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * k_ + predicted];
  }
  std::uint64_t& at(std::size_t truth, std::size_t predicted) {
    return counts_[truth * k_ + predicted];
  }
  std::uint64_t total() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t k_;
  std::vector<std::uint64_t> counts_;
};

struct ClassScore {
  ClassId id;
  double precision;
  double recall;
  double f1;
  std::uint64_t support;  // true rows of this class
};

struct ClassReport {
  std::vector<ClassScore> per_class;
  double macro_f1 = 0.0;
};

ConfusionMatrix confusion_matrix(std::span<const ClassId> truth, std::span<const ClassId> predicted,
                                 std::size_t k);

/// Per-class precision/recall/F1 and their unweighted mean over all K
/// classes. A zero denominator yields 0 for that quantity.
ClassReport macro_f1(const ConfusionMatrix& cm);

/// Convenience: predict every row of `d` and score against its labels.
ClassReport evaluate(const EnsembleModel& m, const Dataset& d);

}  // namespace fdd
