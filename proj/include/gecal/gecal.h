// Copyright 2026 The gecal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GECAL_GECAL_H
#define GECAL_GECAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GECAL_API __declspec(dllexport)
#else
#define GECAL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status values double as process exit codes in the command-line tool. */
typedef enum gecal_status {
  GECAL_OK = 0,
  GECAL_ERR_INTERNAL = 1,
  GECAL_ERR_CONFIG = 2,
  GECAL_ERR_DATA = 3,
  GECAL_ERR_NUMERICAL = 4,
  GECAL_ERR_IO = 5
} gecal_status;

typedef struct gecal_options gecal_options;
typedef struct gecal_dataset gecal_dataset;
typedef struct gecal_result gecal_result;
typedef struct gecal_simulation gecal_simulation;
typedef struct gecal_weights gecal_weights;

GECAL_API const char* gecal_version(void);

/* Message and error name of the last failure on the calling thread. */
GECAL_API const char* gecal_last_error(void);
GECAL_API const char* gecal_last_error_name(void);

/*
 * Options are string key/value pairs. Keys:
 *   entropy, folds, seed, se, bootstrap_b, family, spline_knots, ps_trunc,
 *   normalize, mechanism, ps_uses_outcome, ci_level, precision, format,
 *   outcome, treatment, delta, x2, covariates, x1, methods, n, n_labeled
 * Lists are comma separated.
 */
GECAL_API gecal_status gecal_options_create(gecal_options** out);
GECAL_API void gecal_options_destroy(gecal_options* opts);
GECAL_API gecal_status gecal_options_set(gecal_options* opts, const char* key, const char* value);
GECAL_API gecal_status gecal_options_validate(const gecal_options* opts);

/* Dataset loading. analysis is "ate", "ssl", "misscov" or "weights"; it decides which
 * column carries missingness when no delta column is given. */
GECAL_API gecal_status gecal_dataset_read(const char* path, const char* analysis,
                                          const gecal_options* opts, gecal_dataset** out);
/* In-memory construction from column-major values; NaN marks a missing cell. */
GECAL_API gecal_status gecal_dataset_from_columns(size_t rows, size_t cols,
                                                  const char* const* names,
                                                  const double* values, const char* analysis,
                                                  const gecal_options* opts, gecal_dataset** out);
GECAL_API void gecal_dataset_destroy(gecal_dataset* ds);
GECAL_API size_t gecal_dataset_rows(const gecal_dataset* ds);
GECAL_API size_t gecal_dataset_respondents(const gecal_dataset* ds);
GECAL_API size_t gecal_dataset_column_count(const gecal_dataset* ds);
GECAL_API const char* gecal_dataset_column_name(const gecal_dataset* ds, size_t j);
GECAL_API double gecal_dataset_missing_rate(const gecal_dataset* ds, size_t j);

/* analysis: "ate", "ssl" or "misscov". */
GECAL_API gecal_status gecal_estimate(const char* analysis, const gecal_dataset* ds,
                                      const gecal_options* opts, gecal_result** out);
GECAL_API void gecal_result_destroy(gecal_result* r);
GECAL_API size_t gecal_result_size(const gecal_result* r);
GECAL_API const char* gecal_result_coef(const gecal_result* r, size_t j);
GECAL_API double gecal_result_estimate(const gecal_result* r, size_t j);
GECAL_API double gecal_result_se(const gecal_result* r, size_t j);
GECAL_API size_t gecal_result_n(const gecal_result* r);
GECAL_API size_t gecal_result_respondents(const gecal_result* r);
/* Writes the formatted output (csv or json-lines per the options) to path; "-" is stdout. */
GECAL_API gecal_status gecal_result_write(const gecal_result* r, const gecal_options* opts,
                                          const char* path);

/* setting: "causal", "ssl" or "misscov". */
GECAL_API gecal_status gecal_simulate(const char* setting, int or_model, int ps_model, int reps,
                                      uint64_t seed, const gecal_options* opts,
                                      gecal_simulation** out);
GECAL_API void gecal_simulation_destroy(gecal_simulation* s);
GECAL_API size_t gecal_simulation_rows(const gecal_simulation* s);
GECAL_API const char* gecal_simulation_method(const gecal_simulation* s, size_t row);
GECAL_API const char* gecal_simulation_coef(const gecal_simulation* s, size_t row);
/* field: "truth", "mean", "bias", "se", "rmse", "mc_se", "successes", "failures" */
GECAL_API double gecal_simulation_value(const gecal_simulation* s, size_t row, const char* field);
GECAL_API gecal_status gecal_simulation_write_table(const gecal_simulation* s,
                                                    const gecal_options* opts, const char* path);
GECAL_API gecal_status gecal_simulation_write_replicates(const gecal_simulation* s,
                                                         const char* path);

GECAL_API gecal_status gecal_weights_compute(const gecal_dataset* ds, const gecal_options* opts,
                                             gecal_weights** out);
GECAL_API void gecal_weights_destroy(gecal_weights* w);
GECAL_API size_t gecal_weights_size(const gecal_weights* w);
GECAL_API double gecal_weights_value(const gecal_weights* w, size_t i);
GECAL_API double gecal_weights_pi_hat(const gecal_weights* w, size_t i);
GECAL_API gecal_status gecal_weights_write(const gecal_weights* w, const gecal_options* opts,
                                           const char* path);

#ifdef __cplusplus
}
#endif

#endif /* GECAL_GECAL_H */
