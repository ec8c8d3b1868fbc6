#include "fdd/metrics.hpp"

#include <numeric>
#include <string>

#include "fdd/ensemble.hpp"

namespace fdd {

ConfusionMatrix::ConfusionMatrix(std::size_t k, std::vector<std::uint64_t> row_major)
    : k_(k), counts_(std::move(row_major)) {
  if (counts_.size() != k_ * k_) fail(ErrorCode::DimensionMismatch, "confusion matrix must be K x K");
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

ConfusionMatrix confusion_matrix(std::span<const ClassId> truth, std::span<const ClassId> predicted,
                                 std::size_t k) {
  if (truth.size() != predicted.size())
    fail(ErrorCode::LengthMismatch, "label vectors differ in length");
  if (truth.empty()) fail(ErrorCode::LengthMismatch, "label vectors are empty");
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= k || predicted[i] >= k)
      fail(ErrorCode::LabelOutOfRange, "label at position " + std::to_string(i) +
                                           " is outside [0, " + std::to_string(k) + ")");
    ++cm.at(truth[i], predicted[i]);
  }
  return cm;
}

ClassReport macro_f1(const ConfusionMatrix& cm) {
  if (cm.total() == 0) fail(ErrorCode::EmptyMatrix, "confusion matrix has no entries");
  const std::size_t k = cm.classes();
  ClassReport report;
  double sum = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::uint64_t predicted = 0, actual = 0;
    for (std::size_t j = 0; j < k; ++j) {
      predicted += cm.at(j, i);
      actual += cm.at(i, j);
    }
    const auto tp = static_cast<double>(cm.at(i, i));
    const double precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
    const double recall = actual ? tp / static_cast<double>(actual) : 0.0;
    const double f1 =
        precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    report.per_class.push_back({static_cast<ClassId>(i), precision, recall, f1, actual});
    sum += f1;
  }
  report.macro_f1 = sum / static_cast<double>(k);
  return report;
}

ClassReport evaluate(const EnsembleModel& m, const Dataset& d) {
  const auto predicted = m.predict_labels(d);
  return macro_f1(confusion_matrix(d.labels(), predicted, m.class_count()));
}

}  // namespace fdd
