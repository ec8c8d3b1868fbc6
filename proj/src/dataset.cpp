#include "fdd/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "fdd/io.hpp"
#include "fdd/random.hpp"

namespace fdd {

std::string_view sensor_kind_name(SensorKind kind) noexcept {
  switch (kind) {
    case SensorKind::Power: return "power";
    case SensorKind::MassFlow: return "mass_flow";
    case SensorKind::Pressure: return "pressure";
    case SensorKind::Temperature: return "temperature";
  }
  return "temperature";
}

std::string_view sensor_kind_unit(SensorKind kind) noexcept {
  switch (kind) {
    case SensorKind::Power: return "W";
    case SensorKind::MassFlow: return "kg/min";
    case SensorKind::Pressure: return "MPa";
    case SensorKind::Temperature: return "\xC2\xB0" "C";
  }
  return "";
}

const std::vector<SensorMeta>& reference_schema() {
  using K = SensorKind;
  static const std::vector<SensorMeta> schema = {
      {"W_1", "MT 1st compressor power", K::Power},
      {"W_2", "MT 2nd compressor power", K::Power},
      {"W_3", "MT 3rd compressor power", K::Power},
      {"W_4", "LT 1st compressor power", K::Power},
      {"W_5", "LT 2nd compressor power", K::Power},
      {"W_6", "Condenser fan power", K::Power},
      {"M_1", "Flash tank bypass mass flow rate", K::MassFlow},
      {"M_2", "LT evaporator mass flow rate", K::MassFlow},
      {"M_3", "MT evaporator mass flow rate", K::MassFlow},
      {"P_dis1", "MT compressor rack outlet pressure", K::Pressure},
      {"P_suc1", "MT compressor rack inlet pressure", K::Pressure},
      {"P_dis2", "LT compressor rack outlet pressure", K::Pressure},
      {"P_suc2", "LT compressor rack inlet pressure", K::Pressure},
      {"P_dis3", "Flash tank vapor outlet pressure", K::Pressure},
      {"P_suc3", "LT display case suction pressure", K::Pressure},
      {"P_suc4", "MT display case suction pressure", K::Pressure},
      {"T_dis1", "MT 1st compressor discharge temperature", K::Temperature},
      {"T_suc1", "MT 1st compressor suction temperature", K::Temperature},
      {"T_dis2", "MT 2nd compressor discharge temperature", K::Temperature},
      {"T_suc2", "MT 2nd compressor suction temperature", K::Temperature},
      {"T_dis3", "MT 3rd compressor discharge temperature", K::Temperature},
      {"T_suc3", "MT 3rd compressor suction temperature", K::Temperature},
      {"T_dis4", "LT 1st compressor discharge temperature", K::Temperature},
      {"T_suc4", "LT 1st compressor suction temperature", K::Temperature},
      {"T_dis5", "LT 2nd compressor discharge temperature", K::Temperature},
      {"T_suc5", "LT 2nd compressor suction temperature", K::Temperature},
      {"T_dis6", "MT compressor rack outlet temperature", K::Temperature},
      {"T_suc6", "MT compressor rack inlet temperature", K::Temperature},
      {"T_dis7", "LT compressor rack outlet temperature", K::Temperature},
      {"T_suc7", "LT compressor rack inlet temperature", K::Temperature},
      {"T_suc8", "Flash tank vapor outlet temperature", K::Temperature},
      {"T_suc9", "LT display case suction temperature", K::Temperature},
      {"T_suc10", "MT display case suction temperature", K::Temperature},
      {"T_C", "Condenser outlet temperature", K::Temperature},
      {"T_FI", "Condenser inlet air temperature", K::Temperature},
      {"T_FO", "Condenser outlet air temperature", K::Temperature},
      {"T_sup1", "MT evaporator supply air temperature", K::Temperature},
      {"T_ret1", "MT evaporator return air temperature", K::Temperature},
      {"T_sup2", "LT evaporator supply air temperature", K::Temperature},
      {"T_ret2", "LT evaporator return air temperature", K::Temperature},
  };
  return schema;
}

const std::vector<FaultClass>& fault_taxonomy() {
  static const std::vector<FaultClass> classes = {
      {0, "Non-faulty condition"},
      {1, "Open LT display case door"},
      {2, "Ice accumulation on LT evaporator coil"},
      {3, "LT evaporator expansion valve failure"},
      {4, "MT evaporator fan motor failure"},
      {5, "Condenser air path blockage"},
      {6, "MT evaporator air path blockage"},
  };
  return classes;
}

Dataset::Dataset(std::vector<SensorMeta> schema, std::vector<double> column_major,
                 std::vector<ClassId> labels, std::size_t class_count)
    : schema_(std::move(schema)),
      values_(std::move(column_major)),
      labels_(std::move(labels)),
      class_count_(class_count) {
  if (values_.size() != schema_.size() * labels_.size())
    fail(ErrorCode::DimensionMismatch,
         "value count " + std::to_string(values_.size()) + " != " +
             std::to_string(schema_.size()) + " sensors x " +
             std::to_string(labels_.size()) + " rows");
  std::unordered_set<std::string_view> seen;
  for (const auto& s : schema_)
    if (!seen.insert(s.symbol).second)
      fail(ErrorCode::SchemaMismatch, "duplicate sensor symbol " + s.symbol);
  for (std::size_t k = 0; k < values_.size(); ++k)
    if (!std::isfinite(values_[k]))
      fail(ErrorCode::NonFiniteInput,
           "non-finite value in column " + schema_[k / labels_.size()].symbol);
  for (ClassId l : labels_)
    if (l >= class_count_)
      fail(ErrorCode::LabelOutOfRange, "label " + std::to_string(l) +
                                           " >= class count " + std::to_string(class_count_));
}

std::vector<std::string> Dataset::symbols() const {
  std::vector<std::string> out;
  out.reserve(schema_.size());
  for (const auto& s : schema_) out.push_back(s.symbol);
  return out;
}

std::optional<std::size_t> Dataset::find_sensor(std::string_view symbol) const {
  for (std::size_t j = 0; j < schema_.size(); ++j)
    if (schema_[j].symbol == symbol) return j;
  return std::nullopt;
}

std::size_t Dataset::sensor_index(std::string_view symbol) const {
  auto j = find_sensor(symbol);
  if (!j) fail(ErrorCode::UnknownSensor, "unknown sensor " + std::string(symbol));
  return *j;
}

std::vector<double> Dataset::row(std::size_t i) const {
  std::vector<double> r(sensors());
  for (std::size_t j = 0; j < sensors(); ++j) r[j] = value(i, j);
  return r;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_count_, 0);
  for (ClassId l : labels_) ++counts[l];
  return counts;
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
  const std::size_t n = indices.size();
  std::vector<double> vals(n * sensors());
  std::vector<ClassId> labs(n);
  for (std::size_t j = 0; j < sensors(); ++j) {
    auto col = column(j);
    for (std::size_t k = 0; k < n; ++k) vals[j * n + k] = col[indices[k]];
  }
  for (std::size_t k = 0; k < n; ++k) labs[k] = labels_[indices[k]];
  return Dataset(schema_, std::move(vals), std::move(labs), class_count_);
}

Dataset Dataset::select_sensors(std::span<const std::size_t> columns) const {
  std::vector<SensorMeta> schema;
  std::vector<double> vals;
  vals.reserve(columns.size() * rows());
  for (std::size_t j : columns) {
    if (j >= sensors()) fail(ErrorCode::UnknownSensor, "sensor index out of range");
    schema.push_back(schema_[j]);
    auto col = column(j);
    vals.insert(vals.end(), col.begin(), col.end());
  }
  return Dataset(std::move(schema), std::move(vals), labels_, class_count_);
}

Dataset Dataset::select_sensors(std::span<const std::string> symbols) const {
  std::vector<std::size_t> cols;
  for (const auto& s : symbols) cols.push_back(sensor_index(s));
  return select_sensors(cols);
}

Dataset Dataset::with_column(std::size_t j, std::vector<double> values) const {
  if (j >= sensors()) fail(ErrorCode::UnknownSensor, "sensor index out of range");
  if (values.size() != rows()) fail(ErrorCode::DimensionMismatch, "column length mismatch");
  std::vector<double> vals = values_;
  std::copy(values.begin(), values.end(), vals.begin() + static_cast<std::ptrdiff_t>(j * rows()));
  return Dataset(schema_, std::move(vals), labels_, class_count_);
}

// ---------------------------------------------------------------------------
// CSV

MalformedRowsError::MalformedRowsError(std::vector<RowIssue> issues)
    : Error(ErrorCode::MalformedRow,
            [&] {
              std::ostringstream ss;
              ss << issues.size() << " malformed row issue(s)";
              for (std::size_t k = 0; k < std::min<std::size_t>(issues.size(), 5); ++k)
                ss << "; row " << issues[k].row
                   << (issues[k].column.empty() ? "" : " column " + issues[k].column) << ": "
                   << issues[k].reason;
              return ss.str();
            }()),
      issues_(std::move(issues)) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::optional<double> parse_real(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<ClassId> parse_label(std::string_view s) {
  unsigned v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || v > 0xFFFE)
    return std::nullopt;
  return static_cast<ClassId>(v);
}

}  // namespace

Dataset parse_dataset(std::istream& in, SchemaPolicy policy) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::SchemaMismatch, "missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = split_cells(line);
  if (header.empty() || header.back() != "class")
    fail(ErrorCode::SchemaMismatch, "last header column must be \"class\"");
  header.pop_back();
  if (header.empty()) fail(ErrorCode::SchemaMismatch, "no sensor columns");

  std::vector<SensorMeta> schema;
  for (auto sym : header) {
    if (sym.empty()) fail(ErrorCode::SchemaMismatch, "empty column name");
    const auto& ref = reference_schema();
    auto it = std::find_if(ref.begin(), ref.end(),
                           [&](const SensorMeta& m) { return m.symbol == sym; });
    if (it != ref.end())
      schema.push_back(*it);
    else if (policy == SchemaPolicy::Strict)
      fail(ErrorCode::SchemaMismatch, "unknown sensor symbol " + std::string(sym));
    else
      schema.push_back({std::string(sym), "", SensorKind::Temperature});
  }
  const std::size_t ncol = schema.size();

  std::vector<std::vector<double>> cols(ncol);
  std::vector<ClassId> labels;
  std::vector<RowIssue> issues;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_cells(line);
    const std::size_t r = row++;
    if (cells.size() != ncol + 1) {
      issues.push_back({r, "", "expected " + std::to_string(ncol + 1) + " cells, got " +
                                   std::to_string(cells.size())});
      continue;
    }
    bool ok = true;
    std::vector<double> vals(ncol);
    for (std::size_t j = 0; j < ncol; ++j) {
      auto v = parse_real(cells[j]);
      if (!v) {
        issues.push_back({r, schema[j].symbol,
                          cells[j].empty() ? "missing value" : "not a finite number"});
        ok = false;
      } else {
        vals[j] = *v;
      }
    }
    auto lab = parse_label(cells[ncol]);
    if (!lab) {
      issues.push_back({r, "class", "label is not a non-negative integer"});
      ok = false;
    }
    if (!ok) continue;
    for (std::size_t j = 0; j < ncol; ++j) cols[j].push_back(vals[j]);
    labels.push_back(*lab);
  }
  if (!issues.empty()) throw MalformedRowsError(std::move(issues));
  if (labels.empty()) fail(ErrorCode::EmptyDataset, "no data rows");

  std::vector<double> flat;
  flat.reserve(ncol * labels.size());
  for (auto& c : cols) flat.insert(flat.end(), c.begin(), c.end());
  const std::size_t k = *std::max_element(labels.begin(), labels.end()) + std::size_t{1};
  return Dataset(std::move(schema), std::move(flat), std::move(labels), k);
}

Dataset load_dataset(const std::string& path, SchemaPolicy policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::FileNotFound, "cannot open dataset " + path);
  return parse_dataset(in, policy);
}

void write_csv(const Dataset& d, std::ostream& out) {
  for (const auto& s : d.schema()) out << s.symbol << ',';
  out << "class\n";
  std::string line;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < d.sensors(); ++j) {
      line += format_double(d.value(i, j));
      line += ',';
    }
    line += std::to_string(d.label(i));
    line += '\n';
    out << line;
  }
}

void write_csv(const Dataset& d, const std::string& path) {
  std::ostringstream ss;
  write_csv(d, ss);
  write_file_atomic(path, ss.str());
}

// ---------------------------------------------------------------------------
// Preprocessing

Dataset undersample_majority(const Dataset& d, UndersampleTarget target, std::uint64_t seed) {
  const auto counts = d.class_counts();
  std::size_t present = 0;
  for (auto c : counts) present += c > 0;
  if (present < 2) fail(ErrorCode::SingleClass, "undersampling needs at least two classes");

  // Majority = largest class; ties go to the lowest id.
  std::size_t majority = 0;
  for (std::size_t c = 1; c < counts.size(); ++c)
    if (counts[c] > counts[majority]) majority = c;

  std::size_t keep = 0;
  if (target.explicit_count) {
    keep = *target.explicit_count;
    if (keep > counts[majority])
      fail(ErrorCode::TargetTooLarge, "target " + std::to_string(keep) +
                                          " exceeds majority class size " +
                                          std::to_string(counts[majority]));
  } else {
    for (std::size_t c = 0; c < counts.size(); ++c)
      if (c != majority) keep = std::max(keep, counts[c]);
  }

  std::vector<std::size_t> majority_rows;
  for (std::size_t i = 0; i < d.rows(); ++i)
    if (d.label(i) == majority) majority_rows.push_back(i);
  Rng rng(seed);
  std::shuffle(majority_rows.begin(), majority_rows.end(), rng);
  std::vector<bool> keep_row(d.rows(), true);
  for (std::size_t k = keep; k < majority_rows.size(); ++k) keep_row[majority_rows[k]] = false;

  std::vector<std::size_t> survivors;
  for (std::size_t i = 0; i < d.rows(); ++i)
    if (keep_row[i]) survivors.push_back(i);
  return d.select_rows(survivors);
}

SplitPair split_train_test(const Dataset& d, double train_fraction, bool stratified,
                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(ErrorCode::DegenerateFraction, "train fraction must lie in (0, 1)");

  Rng rng(seed);
  std::vector<bool> in_train(d.rows(), false);
  auto assign = [&](std::vector<std::size_t>& idx, std::size_t n_train) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < n_train; ++k) in_train[idx[k]] = true;
  };

  if (stratified) {
    std::vector<std::vector<std::size_t>> by_class(d.class_count());
    for (std::size_t i = 0; i < d.rows(); ++i) by_class[d.label(i)].push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      const std::size_t n = by_class[c].size();
      if (n == 0) continue;
      if (n < 2)
        fail(ErrorCode::ClassTooSmall,
             "class " + std::to_string(c) + " has a single row; stratified split needs 2");
      auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
      n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
      assign(by_class[c], n_train);
    }
  } else {
    std::vector<std::size_t> idx(d.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(d.rows()) + 0.5));
    assign(idx, n_train);
  }

  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t i = 0; i < d.rows(); ++i) (in_train[i] ? train_rows : test_rows).push_back(i);
  return SplitPair{d.select_rows(train_rows), d.select_rows(test_rows), seed, train_fraction};
}

}  // namespace fdd
