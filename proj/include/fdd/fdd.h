/* C interface to the fault-detection library. All handles are opaque and
 * owned by the caller; strings returned through char** must be released with
 * fdd_string_free. Failing calls return a nonzero status and leave outputs
 * untouched; fdd_last_error() then describes the failure on this thread. */
#ifndef FDD_FDD_H
#define FDD_FDD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FDD_API __declspec(dllexport)
#else
#define FDD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fdd_status {
  FDD_OK = 0,
  FDD_INVALID_ARGUMENT = 1,
  FDD_FILE_NOT_FOUND = 2,
  FDD_SCHEMA_MISMATCH = 3,
  FDD_MALFORMED_ROW = 4,
  FDD_EMPTY_DATASET = 5,
  FDD_SINGLE_CLASS = 6,
  FDD_TARGET_TOO_LARGE = 7,
  FDD_DEGENERATE_FRACTION = 8,
  FDD_CLASS_TOO_SMALL = 9,
  FDD_EMPTY_NODE = 10,
  FDD_EMPTY_INPUT = 11,
  FDD_DIMENSION_MISMATCH = 12,
  FDD_NON_FINITE_INPUT = 13,
  FDD_LENGTH_MISMATCH = 14,
  FDD_LABEL_OUT_OF_RANGE = 15,
  FDD_EMPTY_MATRIX = 16,
  FDD_RANKING_SCHEMA_MISMATCH = 17,
  FDD_EMPTY_RANKING = 18,
  FDD_EMPTY_VECTOR = 19,
  FDD_ZERO_SIGNAL = 20,
  FDD_UNKNOWN_SENSOR = 21,
  FDD_BAD_PROPORTIONS = 22,
  FDD_UNKNOWN_SYMBOL = 23,
  FDD_PARSE_ERROR = 24,
  FDD_INVALID_VALUE = 25,
  FDD_UNSUPPORTED_VERSION = 26,
  FDD_IO_ERROR = 27,
  FDD_INTERNAL = 100
} fdd_status;

typedef struct fdd_dataset fdd_dataset;
typedef struct fdd_model fdd_model;

/* Human-readable message for the last failure on this thread ("" if none). */
FDD_API const char* fdd_last_error(void);
/* The same failure as a JSON document {"error": {...}}; "{}" if none. */
FDD_API const char* fdd_last_error_json(void);
FDD_API const char* fdd_status_name(fdd_status status);
FDD_API void fdd_string_free(char* s);

/* Worker threads for ensemble fitting and scenario runs; 0 = hardware. */
FDD_API void fdd_set_threads(unsigned threads);

/* Writes text to path atomically, creating parent directories. */
FDD_API fdd_status fdd_write_text(const char* path, const char* text);

/* ---- datasets ---- */

/* infer_schema != 0 accepts headers outside the reference catalogue. */
FDD_API fdd_status fdd_dataset_load_csv(const char* path, int infer_schema, fdd_dataset** out);
/* config_json may be NULL for the default generator; seed always applies. */
FDD_API fdd_status fdd_dataset_generate(const char* config_json, uint64_t seed, fdd_dataset** out);
FDD_API fdd_status fdd_dataset_write_csv(const fdd_dataset* d, const char* path);
FDD_API size_t fdd_dataset_rows(const fdd_dataset* d);
FDD_API size_t fdd_dataset_sensors(const fdd_dataset* d);
FDD_API size_t fdd_dataset_class_count(const fdd_dataset* d);
/* target < 0 shrinks the majority to the largest minority class. */
FDD_API fdd_status fdd_dataset_undersample(const fdd_dataset* d, int64_t target, uint64_t seed,
                                           fdd_dataset** out);
FDD_API fdd_status fdd_dataset_split(const fdd_dataset* d, double train_fraction, int stratified,
                                     uint64_t seed, fdd_dataset** train, fdd_dataset** test);
FDD_API fdd_status fdd_dataset_select(const fdd_dataset* d, const char* const* symbols, size_t n,
                                      fdd_dataset** out);
FDD_API void fdd_dataset_free(fdd_dataset* d);

/* ---- models ---- */

/* config_json: ensemble config object, NULL for bagging defaults. */
FDD_API fdd_status fdd_model_fit(const fdd_dataset* train, const char* config_json, uint64_t seed,
                                 fdd_model** out);
FDD_API fdd_status fdd_model_load(const char* path, fdd_model** out);
FDD_API fdd_status fdd_model_save(const fdd_model* m, const char* path);
FDD_API size_t fdd_model_class_count(const fdd_model* m);
FDD_API size_t fdd_model_sensors(const fdd_model* m);
/* probabilities may be NULL; otherwise it must hold class_count values. */
FDD_API fdd_status fdd_model_predict(const fdd_model* m, const double* row, size_t n,
                                     uint32_t* label, double* probabilities);
/* mode: "mdi", "gain" or NULL for the family's usual pairing. */
FDD_API fdd_status fdd_model_importance(const fdd_model* m, const char* mode, char** json_out);
FDD_API fdd_status fdd_model_evaluate(const fdd_model* m, const fdd_dataset* test, char** json_out);
FDD_API void fdd_model_free(fdd_model* m);

/* ---- selection and robustness ---- */

/* config_json keys: threshold, snr_db, max_sensors, seed, ensemble (all
 * optional). When out_dir is non-NULL the trace JSON/CSV and SVG chart are
 * written there. json_out may be NULL. */
FDD_API fdd_status fdd_rfa_run(const fdd_dataset* train, const fdd_dataset* test,
                               const char* ranking_json, const char* config_json,
                               const char* out_dir, char** json_out);

/* sensor NULL perturbs the model's most important sensor. The test set may carry extra
 * sensors; it is projected onto the model's sensors first. */
FDD_API fdd_status fdd_robustness_run(const fdd_model* m, const fdd_dataset* test, const char* sensor,
                                      const double* snr_db, size_t n_snr, int include_failure,
                                      uint64_t seed, const char* out_dir, char** json_out);

/* ---- pipeline ---- */

/* seed and out_dir may be NULL; they override the file when set. The
 * FDD_OUTPUT_DIR environment variable is the fallback output directory. */
FDD_API fdd_status fdd_config_resolve(const char* config_json, const uint64_t* seed,
                                      const char* out_dir, char** json_out);
FDD_API fdd_status fdd_pipeline_run(const char* config_json, const uint64_t* seed,
                                    const char* out_dir, char** summary_json_out);

#ifdef __cplusplus
}
#endif

#endif
