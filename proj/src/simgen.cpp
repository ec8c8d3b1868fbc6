#include "fdd/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "fdd/random.hpp"

namespace fdd {

namespace {

// Operating-point magnitudes for the reference sensors.
const std::unordered_map<std::string, double>& baselines() {
  static const std::unordered_map<std::string, double> table = {
      {"W_1", 3200}, {"W_2", 3100}, {"W_3", 2900}, {"W_4", 1800}, {"W_5", 1700},
      {"W_6", 800},  {"M_1", 1.5},  {"M_2", 3.0},  {"M_3", 6.0},  {"P_dis1", 9.0},
      {"P_suc1", 3.2}, {"P_dis2", 3.2}, {"P_suc2", 1.3}, {"P_dis3", 3.6}, {"P_suc3", 1.3},
      {"P_suc4", 3.0}, {"T_dis1", 85}, {"T_suc1", 8},  {"T_dis2", 83}, {"T_suc2", 8},
      {"T_dis3", 84}, {"T_suc3", 9},  {"T_dis4", 55}, {"T_suc4", -20}, {"T_dis5", 56},
      {"T_suc5", -19}, {"T_dis6", 82}, {"T_suc6", 7},  {"T_dis7", 52}, {"T_suc7", -18},
      {"T_suc8", 4},  {"T_suc9", -25}, {"T_suc10", -6}, {"T_C", 30},  {"T_FI", 25},
      {"T_FO", 35},   {"T_sup1", 2},  {"T_ret1", 5},  {"T_sup2", -22}, {"T_ret2", -18},
  };
  return table;
}

double kind_noise_scale(SensorKind kind) {
  switch (kind) {
    case SensorKind::Power: return 20.0;
    case SensorKind::MassFlow: return 0.05;
    case SensorKind::Pressure: return 0.02;
    case SensorKind::Temperature: return 1.0;
  }
  return 1.0;
}

}  // namespace

const std::vector<double>& reference_class_proportions() {
  static const std::vector<double> p = {0.456, 0.091, 0.089, 0.091, 0.091, 0.091, 0.091};
  return p;
}

GeneratorConfig GeneratorConfig::defaults() {
  GeneratorConfig c;
  c.class_proportions = reference_class_proportions();
  // Classes: 0 normal, 1 LT door open, 2 LT coil ice, 3 LT valve,
  //          4 MT fan, 5 condenser blockage, 6 MT air path.
  // The three condenser channels jointly give every class a distinct code
  // eight nuisance deviations apart; the evaporator channels add weaker cues.
  c.informative_sensors = {
      {"T_FI", {0, 8, 0, 8, 0, 16, 8}},
      {"T_FO", {0, 0, 8, 8, 0, 8, 0}},
      {"T_C", {0, 0, 0, 0, 8, 8, 8}},
      {"T_sup2", {0, 3, 3, 3, 0, 0, 0}},
      {"T_sup1", {0, 0, 0, 0, 3, 0, 3}},
      {"T_ret2", {0, 2, -2, 0, 0, 0, 0}},
  };
  return c;
}

void GeneratorConfig::validate() const {
  const std::size_t k = class_proportions.size();
  if (k < 2) fail(ErrorCode::BadProportions, "need proportions for at least two classes");
  double sum = 0;
  for (double p : class_proportions) {
    if (!(p >= 0.0) || !std::isfinite(p))
      fail(ErrorCode::BadProportions, "class proportions must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    fail(ErrorCode::BadProportions, "class proportions must sum to 1");
  if (n_rows < k) fail(ErrorCode::InvalidValue, "n_rows must be at least the class count");
  if (informative_sensors.empty())
    fail(ErrorCode::InvalidValue, "at least one informative sensor is required");
  const auto& ref = reference_schema();
  for (const auto& s : informative_sensors) {
    if (std::none_of(ref.begin(), ref.end(), [&](const SensorMeta& m) { return m.symbol == s.symbol; }))
      fail(ErrorCode::UnknownSymbol, "unknown sensor symbol " + s.symbol);
    if (s.shifts.size() != k)
      fail(ErrorCode::InvalidValue, "sensor " + s.symbol + " needs one shift per class");
    for (double v : s.shifts)
      if (!std::isfinite(v)) fail(ErrorCode::InvalidValue, "non-finite shift for " + s.symbol);
  }
  if (!(nuisance_noise_sd >= 0.0) || !std::isfinite(nuisance_noise_sd))
    fail(ErrorCode::InvalidValue, "nuisance_noise_sd must be >= 0");
}

Dataset generate_dataset(const GeneratorConfig& cfg) {
  cfg.validate();
  const auto& schema = reference_schema();
  const std::size_t n = cfg.n_rows;
  const std::size_t f = schema.size();
  const std::size_t k = cfg.class_proportions.size();

  // shift[j * k + c]
  std::vector<double> shift(f * k, 0.0);
  for (const auto& s : cfg.informative_sensors) {
    const auto j = static_cast<std::size_t>(
        std::find_if(schema.begin(), schema.end(),
                     [&](const SensorMeta& m) { return m.symbol == s.symbol; }) -
        schema.begin());
    for (std::size_t c = 0; c < k; ++c) shift[j * k + c] += s.shifts[c];
  }
  std::vector<double> base(f), sd(f);
  for (std::size_t j = 0; j < f; ++j) {
    base[j] = baselines().at(schema[j].symbol);
    sd[j] = cfg.nuisance_noise_sd * kind_noise_scale(schema[j].kind);
  }
  std::vector<double> cumulative(k);
  std::partial_sum(cfg.class_proportions.begin(), cfg.class_proportions.end(), cumulative.begin());

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> values(n * f);
  std::vector<ClassId> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = uniform(rng) * cumulative.back();
    std::size_t c = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    c = std::min(c, k - 1);
    labels[i] = static_cast<ClassId>(c);
    for (std::size_t j = 0; j < f; ++j)
      values[j * n + i] = base[j] + shift[j * k + c] + sd[j] * gauss(rng);
  }
  return Dataset(schema, std::move(values), std::move(labels), k);
}

}  // namespace fdd
