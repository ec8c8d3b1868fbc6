#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fdd/dataset.hpp"
#include "fdd/ensemble.hpp"

namespace fdd {

struct RfaConfig {
  double threshold = 0.99;  // stop once clean macro-F1 >= threshold; values above 1 act as 1
  ImportanceRanking ranking;
  EnsembleConfig ensemble = EnsembleConfig::bagging_defaults();
  double robustness_snr_db = 3.0;
  std::optional<std::size_t> max_sensors;
  std::uint64_t noise_seed = 0;
};

struct RfaIteration {
  std::string sensor_added;
  std::size_t sensor_count = 0;
  double clean_f1 = 0.0;
  double noisy_f1 = 0.0;
};

struct RfaTrace {
  std::vector<RfaIteration> iterations;
  std::vector<std::string> selected_set;  // sensors of the final iteration, rank order
  std::string noise_sensor;               // rank-1 sensor, perturbed in every iteration
  bool threshold_met = false;
};

/// Recursive feature addition over a fixed ranking. Iteration k trains a
/// fresh ensemble on the top-k ranked sensors of `train`, scores it on the
/// matching columns of `test`, and again with AWGN injected into the rank-1
/// sensor. Stops at the threshold, the sensor cap, or when sensors run out.
RfaTrace run_rfa(const Dataset& train, const Dataset& test, const RfaConfig& cfg,
                 unsigned threads = 0);

}  // namespace fdd
