#include "fdd/robustness.hpp"

#include <cmath>
#include <sstream>

#include "fdd/ensemble.hpp"
#include "fdd/io.hpp"
#include "fdd/metrics.hpp"
#include "fdd/parallel.hpp"
#include "fdd/random.hpp"

namespace fdd {

double signal_power(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::EmptyVector, "signal power of an empty vector");
  double acc = 0;
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteInput, "non-finite sample");
    acc += v * v;
  }
  return acc / static_cast<double>(values.size());
}

double noise_power_for_snr(double p_signal, double snr_db) {
  if (!(p_signal > 0))
    fail(ErrorCode::ZeroSignal, "cannot reach a finite SNR on a zero-power signal");
  if (!std::isfinite(snr_db)) fail(ErrorCode::InvalidValue, "SNR must be finite");
  return p_signal / std::pow(10.0, snr_db / 10.0);
}

Dataset PerturbedTestSet::materialize() const {
  return base->with_column(perturbed_column, noisy_values);
}

PerturbedTestSet inject_awgn(std::shared_ptr<const Dataset> test, const NoiseSpec& spec) {
  const std::size_t j = test->sensor_index(spec.target_sensor);
  const auto clean = test->column(j);
  const double p_signal = signal_power(clean);
  const double p_noise = noise_power_for_snr(p_signal, spec.snr_db);

  Rng rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(p_noise));
  std::vector<double> noisy(clean.size());
  double drawn_power = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double n = gauss(rng);
    drawn_power += n * n;
    noisy[i] = clean[i] + n;
  }
  drawn_power /= static_cast<double>(clean.size());

  PerturbedTestSet out;
  out.base = std::move(test);
  out.perturbed_column = j;
  out.noisy_values = std::move(noisy);
  out.measured_snr_db = 10.0 * std::log10(p_signal / drawn_power);
  return out;
}

PerturbedTestSet fail_sensor(std::shared_ptr<const Dataset> test, const std::string& sensor) {
  PerturbedTestSet out;
  out.perturbed_column = test->sensor_index(sensor);
  out.noisy_values.assign(test->rows(), 0.0);
  out.base = std::move(test);
  return out;
}

std::string ScenarioResult::label() const {
  if (kind == Kind::SensorFailure) return "sensor_failure";
  return "snr_" + format_double(snr_db) + "dB";
}

RobustnessReport run_scenarios(const EnsembleModel& model, const Dataset& test,
                               const std::string& top_sensor, std::span<const double> snr_list,
                               bool include_failure, std::uint64_t seed, unsigned threads) {
  if (test.symbols() != model.symbols())
    fail(ErrorCode::SchemaMismatch, "test set sensors do not match the model schema");
  auto base = std::make_shared<const Dataset>(test);
  base->sensor_index(top_sensor);

  RobustnessReport report;
  report.model_id = model.schema_fingerprint();
  report.optimal_set = model.symbols();
  report.top_sensor = top_sensor;
  report.baseline_f1 = evaluate(model, *base).macro_f1;

  const std::size_t n = snr_list.size() + (include_failure ? 1 : 0);
  report.scenarios.resize(n);
  parallel_for(n, threads, [&](std::size_t s) {
    ScenarioResult& r = report.scenarios[s];
    PerturbedTestSet p;
    if (s < snr_list.size()) {
      r.kind = ScenarioResult::Kind::Snr;
      r.snr_db = snr_list[s];
      p = inject_awgn(base, {snr_list[s], top_sensor, derive_seed(seed, s)});
    } else {
      r.kind = ScenarioResult::Kind::SensorFailure;
      p = fail_sensor(base, top_sensor);
    }
    r.measured_snr_db = p.measured_snr_db;
    r.f1 = evaluate(model, p.materialize()).macro_f1;
  });
  return report;
}

}  // namespace fdd
