#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdd/dataset.hpp"

namespace fdd {

class EnsembleModel;

/// Mean of squares of the raw (uncentred) samples.
double signal_power(std::span<const double> values);

/// Noise power that realises `snr_db` against `p_signal`:
/// p_signal / 10^(snr_db / 10). ZeroSignal unless p_signal > 0.
double noise_power_for_snr(double p_signal, double snr_db);

struct NoiseSpec {
  double snr_db = 3.0;
  std::string target_sensor;
  std::uint64_t seed = 0;
};

/// A test set with exactly one column replaced.
struct PerturbedTestSet {
  std::shared_ptr<const Dataset> base;
  std::size_t perturbed_column = 0;
  std::vector<double> noisy_values;
  std::optional<double> measured_snr_db;  // absent for sensor failure

  Dataset materialize() const;
};

PerturbedTestSet inject_awgn(std::shared_ptr<const Dataset> test, const NoiseSpec& spec);
PerturbedTestSet fail_sensor(std::shared_ptr<const Dataset> test, const std::string& sensor);

struct ScenarioResult {
  enum class Kind { Snr, SensorFailure };
  Kind kind = Kind::Snr;
  double snr_db = 0.0;  // Snr only
  double f1 = 0.0;
  std::optional<double> measured_snr_db;

  std::string label() const;  // "snr_10dB", "sensor_failure"
};

struct RobustnessReport {
  std::string model_id;  // schema fingerprint of the evaluated model
  std::vector<std::string> optimal_set;
  std::string top_sensor;
  double baseline_f1 = 0.0;
  std::vector<ScenarioResult> scenarios;  // declared order: SNRs, then failure
};

/// Baseline macro-F1, then one noisy evaluation per SNR (sub-seed
/// derive_seed(seed, index)), then the zeroed-sensor scenario if requested.
RobustnessReport run_scenarios(const EnsembleModel& model, const Dataset& test,
                               const std::string& top_sensor, std::span<const double> snr_list,
                               bool include_failure, std::uint64_t seed, unsigned threads = 0);

}  // namespace fdd
