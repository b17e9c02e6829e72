/* C interface to libpireg. All handles are opaque; every function that can
 * fail returns a pireg_status and leaves a message for pireg_last_error()
 * in the calling thread. */
#ifndef PIREG_PIREG_H
#define PIREG_PIREG_H

#include <stddef.h>

#if defined(_WIN32)
#define PIREG_API __declspec(dllexport)
#else
#define PIREG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pireg_status {
  PIREG_OK = 0,
  PIREG_E_INVALID_ARGUMENT = 1,
  PIREG_E_INVALID_OPERAND = 2,
  PIREG_E_ARITY_MISMATCH = 3,
  PIREG_E_ROOT_NOT_ON_TAPE = 4,
  PIREG_E_UNSUPPORTED_ACTIVATION = 5,
  PIREG_E_EMPTY_ARCHITECTURE = 6,
  PIREG_E_DIMENSION_MISMATCH = 7,
  PIREG_E_PROBABILITY_OUT_OF_RANGE = 8,
  PIREG_E_EMPTY_BATCH = 9,
  PIREG_E_MISSING_DERIVATIVE_ENTRY = 10,
  PIREG_E_MISSING_GRADIENT_ENTRY = 11,
  PIREG_E_SHAPE_MISMATCH = 12,
  PIREG_E_INSTABILITY_DETECTED = 13,
  PIREG_E_EMPTY_TRAINING_ROWS = 14,
  PIREG_E_INSUFFICIENT_POINTS = 15,
  PIREG_E_IO = 16,
  PIREG_E_FORMAT = 17,
  PIREG_E_VERSION_MISMATCH = 18,
  PIREG_E_ZERO_DENOMINATOR = 19,
  PIREG_E_DIVERGED = 20,
  PIREG_E_ALL_TRIALS_DIVERGED = 21,
  PIREG_E_SLICE_OUTSIDE_DOMAIN = 22,
  PIREG_E_CONFIG = 23,
  PIREG_E_MISSING_CHECKPOINT = 24,
  PIREG_E_INTERNAL = 100
} pireg_status;

typedef enum pireg_split { PIREG_SPLIT_TRAIN = 0, PIREG_SPLIT_EVAL = 1, PIREG_SPLIT_TEST = 2 } pireg_split;

typedef struct pireg_config pireg_config;
typedef struct pireg_dataset pireg_dataset;
typedef struct pireg_model pireg_model;

PIREG_API const char* pireg_version(void);
PIREG_API const char* pireg_status_name(int status);
/* Message of the last failure in this thread; "" if none. */
PIREG_API const char* pireg_last_error(void);

/* ---- configuration ---- */

PIREG_API size_t pireg_config_key_count(void);
PIREG_API const char* pireg_config_key_name(size_t index);
PIREG_API const char* pireg_config_key_default(size_t index);
PIREG_API const char* pireg_config_key_help(size_t index);

PIREG_API pireg_status pireg_config_create(pireg_config** out);
/* preset < file < flags. path may be NULL; keys use '_' or '-'. */
PIREG_API pireg_status pireg_config_resolve(const char* path, const char* const* flag_keys,
                                            const char* const* flag_values, size_t n_flags, pireg_config** out);
PIREG_API void pireg_config_free(pireg_config* cfg);
PIREG_API pireg_status pireg_config_set(pireg_config* cfg, const char* key, const char* value);
PIREG_API pireg_status pireg_config_apply_preset(pireg_config* cfg, const char* name);
/* Copies the value including the terminator; *needed receives the full size. */
PIREG_API pireg_status pireg_config_get(const pireg_config* cfg, const char* key, char* buf, size_t cap,
                                        size_t* needed);

/* ---- datasets ---- */

PIREG_API pireg_status pireg_dataset_load(const char* path, pireg_dataset** out);
PIREG_API pireg_status pireg_dataset_save(const pireg_dataset* ds, const char* path);
PIREG_API pireg_status pireg_dataset_shape(const pireg_dataset* ds, size_t* rows, size_t* inputs, size_t* outputs);
PIREG_API pireg_status pireg_dataset_split_rows(const pireg_dataset* ds, pireg_split split, size_t* rows);
PIREG_API void pireg_dataset_free(pireg_dataset* ds);

/* ---- models ---- */

PIREG_API pireg_status pireg_model_load(const char* path, pireg_model** out);
PIREG_API pireg_status pireg_model_save(const pireg_model* model, const char* path);
PIREG_API pireg_status pireg_model_shape(const pireg_model* model, size_t* inputs, size_t* outputs);
/* x: rows x inputs row-major; y: rows x outputs row-major. */
PIREG_API pireg_status pireg_model_predict(const pireg_model* model, const double* x, size_t rows, double* y);
PIREG_API pireg_status pireg_model_relative_l2(const pireg_model* model, const pireg_dataset* ds, pireg_split split,
                                               double* out);
PIREG_API void pireg_model_free(pireg_model* model);

/* ---- commands ---- */

/* Runs gen-data | train | search | report. command NULL uses the config's
 * "command" key. *exit_code is the process exit status the run asks for
 * (nonzero e.g. for divergence under strict). */
PIREG_API pireg_status pireg_run(const pireg_config* cfg, const char* command, const char* config_file,
                                 int* exit_code);

#ifdef __cplusplus
}
#endif

#endif
