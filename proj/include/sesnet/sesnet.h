/*
 * Copyright 2026 The Sesnet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the sesnet library. All handles are opaque. Functions
 * return a sesnet_status; on failure sesnet_last_error() describes the
 * problem. Strings returned through out-parameters are owned by the caller
 * and released with sesnet_string_free(). Options and reports are JSON. */

#ifndef SESNET_SESNET_H_
#define SESNET_SESNET_H_

#ifdef __cplusplus
extern "C" {
#endif

#if defined(SESNET_BUILDING_LIBRARY)
#define SESNET_API __attribute__((visibility("default")))
#else
#define SESNET_API
#endif

typedef enum sesnet_status {
  SESNET_OK = 0,
  SESNET_ERR_VALIDATION = 1,
  SESNET_ERR_NUMERICAL = 2,
  SESNET_ERR_IO = 3,
  SESNET_ERR_INVALID_ARGUMENT = 4,
  SESNET_ERR_INTERNAL = 5
} sesnet_status;

typedef struct sesnet_dataset sesnet_dataset;
typedef struct sesnet_classifier sesnet_classifier;
typedef struct sesnet_attribution sesnet_attribution;

SESNET_API const char* sesnet_version(void);
/* Message of the last failed call on this thread ("" when none). */
SESNET_API const char* sesnet_last_error(void);
SESNET_API void sesnet_string_free(char* s);

/* Datasets: a schema, building features and daily case counts. */
SESNET_API sesnet_status sesnet_synth(const char* options_json, sesnet_dataset** out,
                                      char** manifest_json);
SESNET_API sesnet_status sesnet_dataset_load(const char* schema_path, const char* features_path,
                                             const char* cases_path, sesnet_dataset** out);
/* Writes schema.json, features.csv and cases.csv into dir. */
SESNET_API sesnet_status sesnet_dataset_write(const sesnet_dataset* ds, const char* dir);
SESNET_API sesnet_status sesnet_dataset_summary(const sesnet_dataset* ds, char** summary_json);
SESNET_API void sesnet_dataset_free(sesnet_dataset* ds);

/* Classifier. Options: {"model": {...}, "cutoff": n, "label_window": {"start", "end"}}. */
SESNET_API sesnet_status sesnet_classifier_train(const sesnet_dataset* ds, const char* options_json,
                                                 sesnet_classifier** out, char** report_json);
SESNET_API sesnet_status sesnet_classifier_save(const sesnet_classifier* clf, const char* path);
SESNET_API sesnet_status sesnet_classifier_load(const sesnet_dataset* ds, const char* path,
                                                sesnet_classifier** out);
/* Probabilities for every building of ds, as a JSON object keyed by id. */
SESNET_API sesnet_status sesnet_classifier_predict(const sesnet_classifier* clf,
                                                   const sesnet_dataset* ds, char** json);
SESNET_API void sesnet_classifier_free(sesnet_classifier* clf);

/* Options as for training plus "k". */
SESNET_API sesnet_status sesnet_cross_validate(const sesnet_dataset* ds, const char* options_json,
                                               char** report_json);
/* Options as for training plus "grid". */
SESNET_API sesnet_status sesnet_select_cutoff(const sesnet_dataset* ds, const char* options_json,
                                              char** report_json);

/* Shapley attribution. Options: {"n_perm", "seed", "mode", "top_k"}. */
SESNET_API sesnet_status sesnet_explain(const sesnet_classifier* clf, const sesnet_dataset* ds,
                                        const char* options_json, sesnet_attribution** out,
                                        char** report_json);
/* Writes shapley.csv, ranking_<district>.csv and composite_scores.csv. */
SESNET_API sesnet_status sesnet_attribution_write(const sesnet_attribution* attr, const char* dir);
SESNET_API void sesnet_attribution_free(sesnet_attribution* attr);

/* Forward-chaining forecast comparison. Reads per-building composites from
 * shapley_csv_path; writes forecast_report.json and forecast_summary.csv
 * into out_dir. Options: {"forecast": {...}, "horizons": [..], "chains": n}. */
SESNET_API sesnet_status sesnet_forward_chain(const sesnet_dataset* ds,
                                              const char* shapley_csv_path,
                                              const char* options_json, const char* out_dir,
                                              char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* SESNET_SESNET_H_ */
