#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fdd/dataset.hpp"

namespace fdd {

struct InformativeSensor {
  std::string symbol;
  std::vector<double> shifts;  // per-class mean offset, physical units
  bool operator==(const InformativeSensor&) const = default;
};

/// Class-conditional Gaussian stand-in for the CO2 rig. Every sensor of the
/// reference schema is emitted as baseline + class shift + nuisance noise.
/// The nuisance standard deviation is `nuisance_noise_sd` in degrees for
/// temperature channels and scaled per sensor kind for the others.
struct GeneratorConfig {
  std::size_t n_rows = 20000;
  std::vector<double> class_proportions;
  std::vector<InformativeSensor> informative_sensors;
  double nuisance_noise_sd = 1.0;
  std::uint64_t seed = 0;

  static GeneratorConfig defaults();
  void validate() const;
  bool operator==(const GeneratorConfig&) const = default;
};

/// Class occurrence shares of the original campaign (non-faulty first).
const std::vector<double>& reference_class_proportions();

Dataset generate_dataset(const GeneratorConfig& cfg);

}  // namespace fdd
