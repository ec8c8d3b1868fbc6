#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fdd/error.hpp"

namespace fdd {

using ClassId = std::uint16_t;

enum class SensorKind { Power, MassFlow, Pressure, Temperature };

std::string_view sensor_kind_name(SensorKind kind) noexcept;
std::string_view sensor_kind_unit(SensorKind kind) noexcept;

struct SensorMeta {
  std::string symbol;
  std::string description;
  SensorKind kind = SensorKind::Temperature;

  std::string_view unit() const noexcept { return sensor_kind_unit(kind); }
  bool operator==(const SensorMeta&) const = default;
};

struct FaultClass {
  ClassId id;
  std::string_view name;
};

/// The 40 sensors installed on the laboratory CO2 rig, in catalogue order.
const std::vector<SensorMeta>& reference_schema();

/// Non-faulty condition (id 0) followed by the six studied faults.
const std::vector<FaultClass>& fault_taxonomy();

/// Column-major sensor table with one class label per row. Immutable after
/// construction; every constructor path validates the invariants (finite
/// values, labels < class_count, unique symbols, matching shapes).
class Dataset {
 public:
  Dataset(std::vector<SensorMeta> schema, std::vector<double> column_major,
          std::vector<ClassId> labels, std::size_t class_count);

  std::size_t rows() const noexcept { return labels_.size(); }
  std::size_t sensors() const noexcept { return schema_.size(); }
  std::size_t class_count() const noexcept { return class_count_; }

  const std::vector<SensorMeta>& schema() const noexcept { return schema_; }
  std::vector<std::string> symbols() const;
  std::optional<std::size_t> find_sensor(std::string_view symbol) const;
  std::size_t sensor_index(std::string_view symbol) const;  // UnknownSensor

  std::span<const double> column(std::size_t j) const {
    return {values_.data() + j * rows(), rows()};
  }
  double value(std::size_t row, std::size_t j) const {
    return values_[j * rows() + row];
  }
  std::vector<double> row(std::size_t i) const;
  std::span<const ClassId> labels() const noexcept { return labels_; }
  ClassId label(std::size_t i) const { return labels_[i]; }
  std::vector<std::size_t> class_counts() const;

  Dataset select_rows(std::span<const std::size_t> indices) const;
  Dataset select_sensors(std::span<const std::size_t> columns) const;
  Dataset select_sensors(std::span<const std::string> symbols) const;
  Dataset with_column(std::size_t j, std::vector<double> values) const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<SensorMeta> schema_;
  std::vector<double> values_;
  std::vector<ClassId> labels_;
  std::size_t class_count_;
};

enum class SchemaPolicy { Strict, Infer };

struct RowIssue {
  std::size_t row;     // 0-based data row (header excluded)
  std::string column;  // offending column name, or "" for a cell-count error
  std::string reason;
};

/// Raised by load_dataset with code MalformedRow; carries every bad cell.
class MalformedRowsError : public Error {
 public:
  explicit MalformedRowsError(std::vector<RowIssue> issues);
  const std::vector<RowIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<RowIssue> issues_;
};

Dataset load_dataset(const std::string& path, SchemaPolicy policy);
Dataset parse_dataset(std::istream& in, SchemaPolicy policy);
void write_csv(const Dataset& d, std::ostream& out);
void write_csv(const Dataset& d, const std::string& path);

struct UndersampleTarget {
  // nullopt: shrink the majority class to the size of the largest other class
  std::optional<std::size_t> explicit_count;

  static UndersampleTarget match_largest_minority() { return {}; }
  static UndersampleTarget explicit_size(std::size_t n) { return {n}; }
};

Dataset undersample_majority(const Dataset& d, UndersampleTarget target,
                             std::uint64_t seed);

struct SplitPair {
  Dataset train;
  Dataset test;
  std::uint64_t seed;
  double train_fraction;
};

SplitPair split_train_test(const Dataset& d, double train_fraction,
                           bool stratified, std::uint64_t seed);

}  // namespace fdd
