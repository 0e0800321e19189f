// Copyright 2026 The dpsum Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/* C interface to the dpsum library.
 *
 * Objects are opaque handles created by *_create / *_load / *_run functions
 * and released with the matching *_free. Fallible calls return a
 * dpsum_status; on failure dpsum_last_error() describes the problem for the
 * calling thread until its next failing call. Strings handed out through a
 * char** must be released with dpsum_string_free. Other returned pointers
 * are owned by the handle they came from.
 */

#ifndef DPSUM_DPSUM_H_
#define DPSUM_DPSUM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(DPSUM_BUILDING_LIBRARY)
#define DPSUM_API __attribute__((visibility("default")))
#else
#define DPSUM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dpsum_status {
  DPSUM_OK = 0,
  /* Bad argument or configuration field. */
  DPSUM_ERR_INVALID_ARGUMENT = 1,
  /* A record lies outside the bucket domain. */
  DPSUM_ERR_OUT_OF_DOMAIN = 2,
  /* A workload threshold is not a bucket boundary. */
  DPSUM_ERR_MISALIGNED = 3,
  /* Malformed input data or document. */
  DPSUM_ERR_PARSE = 4,
  DPSUM_ERR_IO = 5,
  DPSUM_ERR_RUNTIME = 6
} dpsum_status;

typedef struct dpsum_dataset dpsum_dataset;
typedef struct dpsum_config dpsum_config;
typedef struct dpsum_report dpsum_report;

typedef struct dpsum_query_row {
  double query_threshold;
  double true_answer;
  double mean_answer;
  double p5_answer;
  double p95_answer;
  double mean_rel_err;
  double p5_rel_err;
  double p95_rel_err;
} dpsum_query_row;

DPSUM_API const char* dpsum_version(void);
DPSUM_API const char* dpsum_last_error(void);
DPSUM_API const char* dpsum_status_name(dpsum_status status);
DPSUM_API void dpsum_string_free(char* s);

/* Datasets. Values are kept sorted ascending. */
DPSUM_API dpsum_status dpsum_dataset_from_values(const double* values,
                                                 size_t n,
                                                 dpsum_dataset** out);
DPSUM_API dpsum_status dpsum_dataset_load_csv(const char* path,
                                              dpsum_dataset** out);
/* Heavy-tailed synthetic data clipped to domain_top. */
DPSUM_API dpsum_status dpsum_dataset_generate(size_t n, uint64_t seed,
                                              double domain_top,
                                              dpsum_dataset** out);
DPSUM_API dpsum_status dpsum_dataset_write_csv(const dpsum_dataset* d,
                                               const char* path);
DPSUM_API size_t dpsum_dataset_size(const dpsum_dataset* d);
DPSUM_API const double* dpsum_dataset_values(const dpsum_dataset* d);
DPSUM_API void dpsum_dataset_free(dpsum_dataset* d);

/* Experiment configuration; starts from the library defaults. */
DPSUM_API dpsum_status dpsum_config_create(dpsum_config** out);
/* Sets one field from text, e.g. ("epsilon", "0.5") or
 * ("mechanisms", "identity,tamm"). */
DPSUM_API dpsum_status dpsum_config_set(dpsum_config* c, const char* key,
                                        const char* value);
/* Overlays fields from a JSON object (or a run manifest's "config"). */
DPSUM_API dpsum_status dpsum_config_load_json(dpsum_config* c,
                                              const char* json_text);
DPSUM_API dpsum_status dpsum_config_validate(const dpsum_config* c);
DPSUM_API dpsum_status dpsum_config_to_json(const dpsum_config* c,
                                            char** out);
DPSUM_API void dpsum_config_free(dpsum_config* c);

/* Runs the configured trials on `d`. */
DPSUM_API dpsum_status dpsum_experiment_run(const dpsum_config* c,
                                            const dpsum_dataset* d,
                                            dpsum_report** out);
DPSUM_API size_t dpsum_report_mechanism_count(const dpsum_report* r);
/* NULL when mech is out of range. */
DPSUM_API const char* dpsum_report_mechanism_name(const dpsum_report* r,
                                                  size_t mech);
DPSUM_API size_t dpsum_report_query_count(const dpsum_report* r);
DPSUM_API dpsum_status dpsum_report_get_row(const dpsum_report* r,
                                            size_t mech, size_t query,
                                            dpsum_query_row* out);
/* mean_threshold is NaN when the mechanism ran without truncation. Any
 * output pointer may be NULL. */
DPSUM_API dpsum_status dpsum_report_mechanism_info(const dpsum_report* r,
                                                   size_t mech,
                                                   int* trials_ok,
                                                   int* trials_failed,
                                                   double* mean_threshold,
                                                   size_t* warning_count);
DPSUM_API size_t dpsum_report_failure_count(const dpsum_report* r);
DPSUM_API dpsum_status dpsum_report_csv(const dpsum_report* r, size_t mech,
                                        char** out);
DPSUM_API dpsum_status dpsum_report_write_csv(const dpsum_report* r,
                                              size_t mech, const char* path);
DPSUM_API void dpsum_report_free(dpsum_report* r);

/* Stateless helpers over raw value arrays. */
DPSUM_API dpsum_status dpsum_prefix_sum(const double* values, size_t n,
                                        double threshold, double* out);
DPSUM_API dpsum_status dpsum_trunc_query(const double* values, size_t n,
                                         double threshold, double theta,
                                         double* out);
/* Writes n values to out; out may alias y. */
DPSUM_API dpsum_status dpsum_isotonic_l2(const double* y, size_t n,
                                         double* out);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* DPSUM_DPSUM_H_ */
