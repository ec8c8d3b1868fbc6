#include "fdd/fdd.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>

#include "fdd/io.hpp"
#include "fdd/parallel.hpp"
#include "fdd/pipeline.hpp"
#include "fdd/random.hpp"

struct fdd_dataset {
  std::shared_ptr<const fdd::Dataset> data;
};

struct fdd_model {
  fdd::EnsembleModel model;
};

namespace {

thread_local std::string last_message;
thread_local std::string last_json = "{}";

void clear_error() {
  last_message.clear();
  last_json = "{}";
}

fdd_status record(const fdd::Error& e) {
  last_message = e.what();
  last_json = fdd::error_json(e).dump();
  return static_cast<fdd_status>(e.code());
}

// Runs fn, translating every exception into a status code.
template <class F>
fdd_status guarded(F&& fn) noexcept {
  clear_error();
  try {
    fn();
    return FDD_OK;
  } catch (const fdd::Error& e) {
    return record(e);
  } catch (const std::bad_alloc&) {
    last_message = "out of memory";
  } catch (const std::exception& e) {
    last_message = e.what();
  } catch (...) {
    last_message = "unknown error";
  }
  last_json = fdd::json{{"error", {{"code", "Internal"}, {"status", FDD_INTERNAL}, {"message", last_message}}}}
                  .dump();
  return FDD_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) fdd::fail(fdd::ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void emit(char** out, const fdd::json& j) {
  if (out) *out = dup_string(fdd::dump_pretty(j));
}

fdd_dataset* wrap(fdd::Dataset d) {
  return new fdd_dataset{std::make_shared<const fdd::Dataset>(std::move(d))};
}

fdd::ConfigOverrides overrides(const uint64_t* seed, const char* out_dir) {
  fdd::ConfigOverrides o;
  if (seed) o.seed = *seed;
  if (out_dir) o.output_dir = out_dir;
  if (const char* env = std::getenv(fdd::kOutputDirEnv)) o.env_output_dir = env;
  return o;
}

}  // namespace

extern "C" {

const char* fdd_last_error(void) { return last_message.c_str(); }
const char* fdd_last_error_json(void) { return last_json.c_str(); }

const char* fdd_status_name(fdd_status status) {
  if (status == FDD_OK) return "Ok";
  if (status == FDD_INTERNAL) return "Internal";
  const auto name = fdd::error_code_name(static_cast<fdd::ErrorCode>(status));
  return name.data();
}

void fdd_string_free(char* s) { std::free(s); }

void fdd_set_threads(unsigned threads) { fdd::set_default_threads(threads); }

fdd_status fdd_write_text(const char* path, const char* text) {
  return guarded([&] {
    require(path && text, "path and text are required");
    fdd::write_file_atomic(path, text);
  });
}

// ---- datasets

fdd_status fdd_dataset_load_csv(const char* path, int infer_schema, fdd_dataset** out) {
  return guarded([&] {
    require(path && out, "path and out are required");
    *out = wrap(fdd::load_dataset(path, infer_schema ? fdd::SchemaPolicy::Infer : fdd::SchemaPolicy::Strict));
  });
}

fdd_status fdd_dataset_generate(const char* config_json, uint64_t seed, fdd_dataset** out) {
  return guarded([&] {
    require(out, "out is required");
    fdd::GeneratorConfig cfg = config_json
                                   ? fdd::generator_config_from_json(fdd::parse_json(config_json, "simgen config"))
                                   : fdd::GeneratorConfig::defaults();
    cfg.seed = seed;
    *out = wrap(fdd::generate_dataset(cfg));
  });
}

fdd_status fdd_dataset_write_csv(const fdd_dataset* d, const char* path) {
  return guarded([&] {
    require(d && path, "dataset and path are required");
    fdd::write_csv(*d->data, std::string(path));
  });
}

size_t fdd_dataset_rows(const fdd_dataset* d) { return d ? d->data->rows() : 0; }
size_t fdd_dataset_sensors(const fdd_dataset* d) { return d ? d->data->sensors() : 0; }
size_t fdd_dataset_class_count(const fdd_dataset* d) { return d ? d->data->class_count() : 0; }

fdd_status fdd_dataset_undersample(const fdd_dataset* d, int64_t target, uint64_t seed, fdd_dataset** out) {
  return guarded([&] {
    require(d && out, "dataset and out are required");
    fdd::UndersampleTarget t;
    if (target >= 0) t.explicit_count = static_cast<std::size_t>(target);
    *out = wrap(fdd::undersample_majority(*d->data, t, seed));
  });
}

fdd_status fdd_dataset_split(const fdd_dataset* d, double train_fraction, int stratified, uint64_t seed,
                             fdd_dataset** train, fdd_dataset** test) {
  return guarded([&] {
    require(d && train && test, "dataset, train and test are required");
    auto pair = fdd::split_train_test(*d->data, train_fraction, stratified != 0, seed);
    std::unique_ptr<fdd_dataset> tr(wrap(std::move(pair.train)));
    *test = wrap(std::move(pair.test));
    *train = tr.release();
  });
}

fdd_status fdd_dataset_select(const fdd_dataset* d, const char* const* symbols, size_t n, fdd_dataset** out) {
  return guarded([&] {
    require(d && out && (symbols || n == 0), "dataset, symbols and out are required");
    std::vector<std::string> names(symbols, symbols + n);
    *out = wrap(d->data->select_sensors(std::span<const std::string>(names)));
  });
}

void fdd_dataset_free(fdd_dataset* d) { delete d; }

// ---- models

fdd_status fdd_model_fit(const fdd_dataset* train, const char* config_json, uint64_t seed, fdd_model** out) {
  return guarded([&] {
    require(train && out, "dataset and out are required");
    fdd::EnsembleConfig cfg = config_json
                                  ? fdd::ensemble_config_from_json(fdd::parse_json(config_json, "ensemble config"))
                                  : fdd::EnsembleConfig::bagging_defaults();
    cfg.master_seed = seed;
    *out = new fdd_model{fdd::fit_ensemble(*train->data, cfg)};
  });
}

fdd_status fdd_model_load(const char* path, fdd_model** out) {
  return guarded([&] {
    require(path && out, "path and out are required");
    *out = new fdd_model{fdd::model_from_string(fdd::read_file(path))};
  });
}

fdd_status fdd_model_save(const fdd_model* m, const char* path) {
  return guarded([&] {
    require(m && path, "model and path are required");
    fdd::write_file_atomic(path, fdd::model_to_string(m->model));
  });
}

size_t fdd_model_class_count(const fdd_model* m) { return m ? m->model.class_count() : 0; }
size_t fdd_model_sensors(const fdd_model* m) { return m ? m->model.symbols().size() : 0; }

fdd_status fdd_model_predict(const fdd_model* m, const double* row, size_t n, uint32_t* label,
                             double* probabilities) {
  return guarded([&] {
    require(m && (row || n == 0) && label, "model, row and label are required");
    const auto p = m->model.predict(std::span<const double>(row, n));
    *label = p.label;
    if (probabilities) std::copy(p.probabilities.begin(), p.probabilities.end(), probabilities);
  });
}

fdd_status fdd_model_importance(const fdd_model* m, const char* mode, char** json_out) {
  return guarded([&] {
    require(m && json_out, "model and json_out are required");
    const auto family = m->model.config().family;
    const auto resolved = mode ? fdd::importance_mode_from_string(mode)
                               : (family == fdd::EnsembleFamily::Bagging ? fdd::ImportanceMode::Mdi
                                                                         : fdd::ImportanceMode::Gain);
    emit(json_out, fdd::to_json(fdd::feature_importance(m->model, resolved)));
  });
}

fdd_status fdd_model_evaluate(const fdd_model* m, const fdd_dataset* test, char** json_out) {
  return guarded([&] {
    require(m && test && json_out, "model, dataset and json_out are required");
    emit(json_out, fdd::to_json(fdd::evaluate(m->model, *test->data)));
  });
}

void fdd_model_free(fdd_model* m) { delete m; }

// ---- selection and robustness

fdd_status fdd_rfa_run(const fdd_dataset* train, const fdd_dataset* test, const char* ranking_json,
                       const char* config_json, const char* out_dir, char** json_out) {
  return guarded([&] {
    require(train && test && ranking_json, "train, test and ranking are required");
    fdd::RfaConfig cfg;
    cfg.ranking = fdd::ranking_from_json(fdd::parse_json(ranking_json, "ranking"));
    if (config_json) {
      const auto j = fdd::parse_json(config_json, "rfa config");
      fdd::require_keys(j, {"threshold", "snr_db", "max_sensors", "seed", "ensemble"}, "rfa");
      try {
        if (j.contains("ensemble")) cfg.ensemble = fdd::ensemble_config_from_json(j["ensemble"]);
        cfg.threshold = j.value("threshold", cfg.threshold);
        cfg.robustness_snr_db = j.value("snr_db", cfg.robustness_snr_db);
        if (j.contains("max_sensors") && !j["max_sensors"].is_null())
          cfg.max_sensors = j["max_sensors"].get<std::size_t>();
        cfg.noise_seed = j.value("seed", cfg.noise_seed);
        cfg.ensemble.master_seed = fdd::derive_seed(cfg.noise_seed, 1);
      } catch (const fdd::json::exception& e) {
        fdd::fail(fdd::ErrorCode::InvalidValue, std::string("rfa config: ") + e.what());
      }
    }
    const auto trace = fdd::run_rfa(*train->data, *test->data, cfg);
    if (out_dir) fdd::write_rfa_artifacts(trace, cfg.threshold, out_dir);
    emit(json_out, fdd::to_json(trace));
  });
}

fdd_status fdd_robustness_run(const fdd_model* m, const fdd_dataset* test, const char* sensor,
                              const double* snr_db, size_t n_snr, int include_failure, uint64_t seed,
                              const char* out_dir, char** json_out) {
  return guarded([&] {
    require(m && test && (snr_db || n_snr == 0), "model, test and snr list are required");
    require(!m->model.symbols().empty(), "model has no sensors");
    const auto family = m->model.config().family;
    const std::string target =
        sensor ? std::string(sensor)
               : fdd::feature_importance(m->model, family == fdd::EnsembleFamily::Bagging
                                                       ? fdd::ImportanceMode::Mdi
                                                       : fdd::ImportanceMode::Gain)
                     .ordered_symbols()
                     .front();
    // accept a wider test set by projecting onto the model's sensors
    const fdd::Dataset projected =
        test->data->select_sensors(std::span<const std::string>(m->model.symbols()));
    const auto report = fdd::run_scenarios(m->model, projected, target,
                                           std::span<const double>(snr_db, n_snr), include_failure != 0, seed);
    if (out_dir) fdd::write_robustness_artifacts(report, out_dir);
    emit(json_out, fdd::to_json(report));
  });
}

// ---- pipeline

fdd_status fdd_config_resolve(const char* config_json, const uint64_t* seed, const char* out_dir,
                              char** json_out) {
  return guarded([&] {
    require(config_json && json_out, "config and json_out are required");
    const auto cfg = fdd::parse_config(config_json, overrides(seed, out_dir));
    auto j = fdd::resolved_config_json(cfg);
    j["output_dir"] = cfg.output_dir;
    emit(json_out, j);
  });
}

fdd_status fdd_pipeline_run(const char* config_json, const uint64_t* seed, const char* out_dir,
                            char** summary_json_out) {
  return guarded([&] {
    require(config_json, "config is required");
    fdd::PipelineConfig cfg;
    try {
      cfg = fdd::parse_config(config_json, overrides(seed, out_dir));
    } catch (const fdd::Error& e) {
      throw fdd::StageError(e, "cli", "parse_config");
    }
    const auto result = fdd::run_pipeline(cfg);
    if (summary_json_out)
      emit(summary_json_out, fdd::json{{"output_dir", cfg.output_dir},
                                       {"artifacts", result.artifacts},
                                       {"selected_set", result.trace.selected_set},
                                       {"threshold_met", result.trace.threshold_met},
                                       {"final_macro_f1", result.final_report.macro_f1}});
  });
}

}  // extern "C"
