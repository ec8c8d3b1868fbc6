#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdd/dataset.hpp"
#include "fdd/ensemble.hpp"
#include "fdd/json_io.hpp"
#include "fdd/metrics.hpp"
#include "fdd/robustness.hpp"
#include "fdd/selection.hpp"
#include "fdd/simgen.hpp"

namespace fdd {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "FDD_OUTPUT_DIR";
inline constexpr const char* kDefaultOutputDir = "fdd_out";

struct PipelineConfig {
  // data source: a CSV file, or the synthetic generator when csv_path is empty
  std::optional<std::string> csv_path;
  SchemaPolicy schema_policy = SchemaPolicy::Strict;
  GeneratorConfig simgen = GeneratorConfig::defaults();

  bool undersample = true;
  std::optional<std::size_t> undersample_target;
  double train_fraction = 0.75;
  bool stratified = true;

  EnsembleConfig ensemble = EnsembleConfig::bagging_defaults();
  ImportanceMode importance = ImportanceMode::Mdi;

  double rfa_threshold = 0.99;
  double rfa_snr_db = 3.0;
  std::optional<std::size_t> rfa_max_sensors;

  std::vector<double> robustness_snr_db = {10.0, 3.0, 0.0};
  bool include_failure = true;

  // Every stage seed derives from this one value.
  std::uint64_t seed = 42;
  std::string output_dir = kDefaultOutputDir;

  void validate() const;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;  // --out
  std::optional<std::string> env_output_dir;
};

/// Resolves a JSON config document. Omitted fields take documented defaults;
/// output_dir precedence is flag, then file, then environment, then default.
PipelineConfig parse_config(std::string_view json_text, const ConfigOverrides& overrides = {});

/// Fully resolved config, excluding output_dir. Feeding it back to
/// parse_config yields the same experiment.
json resolved_config_json(const PipelineConfig& cfg);

/// Pipeline stage seeds.
enum class Stage : std::uint64_t { Simgen = 1, Undersample, Split, Ensemble, RfaNoise, Robustness };
std::uint64_t stage_seed(const PipelineConfig& cfg, Stage s);

/// Error raised inside a pipeline stage, tagged with where it happened.
class StageError : public Error {
 public:
  StageError(const Error& cause, std::string module, std::string operation)
      : Error(cause.code(), cause.what()),
        module_(std::move(module)),
        operation_(std::move(operation)) {}
  const std::string& module() const noexcept { return module_; }
  const std::string& operation() const noexcept { return operation_; }

 private:
  std::string module_;
  std::string operation_;
};

/// Machine-readable error document written as error.json.
json error_json(const Error& e);

struct PipelineResult {
  ImportanceRanking ranking;
  RfaTrace trace;
  ClassReport final_report;
  RobustnessReport robustness;
  std::vector<std::string> artifacts;  // file names written under output_dir
};

/// Load or generate, undersample, split, fit the all-sensor model, rank,
/// run RFA, retrain on the selected set, run the robustness scenarios, and
/// write every artifact into cfg.output_dir.
PipelineResult run_pipeline(const PipelineConfig& cfg, unsigned threads = 0);

/// Line chart of clean and noisy macro-F1 against sensor count.
std::string render_rfa_svg(const RfaTrace& trace, double threshold);

/// Writes rfa_trace.json, rfa_trace.csv and rfa_curves.svg into `dir`.
std::vector<std::string> write_rfa_artifacts(const RfaTrace& trace, double threshold,
                                             const std::string& dir);
/// Writes robustness.json and robustness.csv into `dir`.
std::vector<std::string> write_robustness_artifacts(const RobustnessReport& r,
                                                    const std::string& dir);

std::string dump_pretty(const json& j);

}  // namespace fdd
