/*
 * Copyright 2026 The UNN Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of libunn: leveraged k-nearest-neighbour training, prototype
 * filtering, prediction and evaluation.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_free function (NULL is accepted). Every fallible call returns a
 * unn_status; on failure unn_last_error() describes the problem for the
 * calling thread. Strings returned through char** are heap allocated and
 * must be released with unn_string_free. Output handles are only written on
 * success.
 */
#ifndef UNN_UNN_H
#define UNN_UNN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define UNN_API __declspec(dllexport)
#else
#define UNN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define UNN_ABI_VERSION 1

typedef enum unn_status {
    UNN_OK = 0,
    UNN_ERR_DOMAIN = 1,     /* invalid argument or data outside the contract */
    UNN_ERR_PARSE = 2,      /* malformed input file */
    UNN_ERR_IO = 3,         /* file cannot be read or written */
    UNN_ERR_VERSION = 4,    /* file format version or cache key mismatch */
    UNN_ERR_DIVERGENCE = 5, /* a step could not be made finite */
    UNN_ERR_INTERNAL = 6,
    UNN_ERR_NULL = 7        /* required pointer argument was NULL */
} unn_status;

typedef enum unn_loss { UNN_LOSS_EXP = 0, UNN_LOSS_SQUARED = 1, UNN_LOSS_LOGISTIC = 2 } unn_loss;
typedef enum unn_oracle {
    UNN_ORACLE_BOOSTING = 0,
    UNN_ORACLE_LAZY_RANDOM = 1,
    UNN_ORACLE_LAZY_ORDERED = 2,
    UNN_ORACLE_BOOSTING_ONCE = 3
} unn_oracle;
typedef enum unn_smoothing { UNN_SMOOTHING_ON_ZERO = 0, UNN_SMOOTHING_ALWAYS = 1 } unn_smoothing;
typedef enum unn_delta_mode { UNN_DELTA_AUTO = 0, UNN_DELTA_CLOSED = 1, UNN_DELTA_EXACT = 2 } unn_delta_mode;
typedef enum unn_backend { UNN_BACKEND_KDTREE = 0, UNN_BACKEND_EXHAUSTIVE = 1 } unn_backend;
typedef enum unn_rule { UNN_RULE_LEVERAGED = 0, UNN_RULE_CLASSIC = 1 } unn_rule;
typedef enum unn_filter_mode { UNN_FILTER_FRACTION = 0, UNN_FILTER_THRESHOLD = 1 } unn_filter_mode;

typedef struct unn_dataset unn_dataset;
typedef struct unn_graph unn_graph;
typedef struct unn_model unn_model;
typedef struct unn_diagnostics unn_diagnostics;
typedef struct unn_predictions unn_predictions;

/* ---- library ---------------------------------------------------------- */

UNN_API const char* unn_version(void);
UNN_API int unn_abi_version(void);
UNN_API const char* unn_status_name(unn_status status);
/* Message of the last failure on this thread; empty after a success. */
UNN_API const char* unn_last_error(void);
UNN_API void unn_string_free(char* s);

/* Worker threads for parallel loops; 0 means all hardware threads. */
UNN_API void unn_set_threads(unsigned n);
UNN_API unsigned unn_get_threads(void);

/* Warnings are delivered to `fn`; NULL restores printing to stderr. */
typedef void (*unn_warning_fn)(const char* message, void* user);
UNN_API void unn_set_warning_handler(unn_warning_fn fn, void* user);

/* ---- datasets --------------------------------------------------------- */

UNN_API unn_status unn_dataset_load_csv(const char* path, const char* label_column, unn_dataset** out);
UNN_API unn_status unn_dataset_save_csv(const unn_dataset* data, const char* path);
/* features is m x dim row-major; labels index class_names. */
UNN_API unn_status unn_dataset_create(size_t m, size_t dim, const double* features, const int* labels,
                                      const char* const* class_names, int num_classes, unn_dataset** out);
UNN_API unn_status unn_gen_ripley(size_t m_train, size_t m_test, uint64_t seed, unn_dataset** train,
                                  unn_dataset** test);
UNN_API unn_status unn_gen_blobs(int num_classes, size_t per_class, size_t dim, double spread, uint64_t seed,
                                 unn_dataset** out);
UNN_API unn_status unn_dataset_normalize(const unn_dataset* data, unn_dataset** out);
UNN_API unn_status unn_dataset_subset(const unn_dataset* data, const size_t* ids, size_t count,
                                      unn_dataset** out);
UNN_API size_t unn_dataset_size(const unn_dataset* data);
UNN_API size_t unn_dataset_dim(const unn_dataset* data);
UNN_API int unn_dataset_num_classes(const unn_dataset* data);
/* Borrowed pointers, valid while the dataset lives. */
UNN_API const char* unn_dataset_class_name(const unn_dataset* data, int c);
UNN_API const double* unn_dataset_row(const unn_dataset* data, size_t i);
UNN_API int unn_dataset_label(const unn_dataset* data, size_t i);
UNN_API uint64_t unn_dataset_hash(const unn_dataset* data);
/* Provenance JSON object ("{}" when none). */
UNN_API unn_status unn_dataset_metadata(const unn_dataset* data, char** json);
UNN_API void unn_dataset_free(unn_dataset* data);

/* ---- neighbour graphs -------------------------------------------------- */

UNN_API unn_status unn_graph_build(const unn_dataset* data, size_t k, unn_backend backend, unn_graph** out);
UNN_API unn_status unn_graph_save(const unn_graph* graph, const char* path);
/* Fails with UNN_ERR_VERSION when the cache was built for other data or k. */
UNN_API unn_status unn_graph_load(const char* path, const unn_dataset* data, size_t k, unn_graph** out);
UNN_API size_t unn_graph_size(const unn_graph* graph);
UNN_API size_t unn_graph_k(const unn_graph* graph);
UNN_API unn_status unn_graph_direct(const unn_graph* graph, size_t i, const size_t** ids, size_t* count);
UNN_API unn_status unn_graph_reciprocal(const unn_graph* graph, size_t j, const size_t** ids, size_t* count);
UNN_API void unn_graph_free(unn_graph* graph);

/* ---- training ------------------------------------------------------------ */

typedef struct unn_train_config {
    unn_loss loss;
    size_t k;
    size_t iterations; /* per class; 0 means m */
    unn_oracle oracle;
    unn_smoothing smoothing;
    unn_delta_mode delta_mode;
    double convergence_tol;
    uint64_t seed;
    size_t drift_check_every; /* 0 disables */
} unn_train_config;

UNN_API void unn_train_config_init(unn_train_config* config);

/* `graph` may be NULL, in which case it is built with config->k. `diagnostics`
 * may be NULL. */
UNN_API unn_status unn_train(const unn_dataset* data, const unn_graph* graph, const unn_train_config* config,
                             unn_model** model, unn_diagnostics** diagnostics);

typedef struct unn_iteration_record {
    size_t t;
    size_t j; /* SIZE_MAX for a no-op */
    double delta;
    double surrogate;
    double gamma;
    double eta;
    double bound;
    double bregman_residual; /* NaN when not computed */
    double risk01;
    double normalizer;
    int smoothed;
    int wia;
} unn_iteration_record;

UNN_API int unn_diagnostics_num_classes(const unn_diagnostics* d);
UNN_API size_t unn_diagnostics_iterations(const unn_diagnostics* d, int c);
UNN_API double unn_diagnostics_initial_surrogate(const unn_diagnostics* d, int c);
UNN_API int unn_diagnostics_stopped_early(const unn_diagnostics* d, int c);
UNN_API unn_status unn_diagnostics_record(const unn_diagnostics* d, int c, size_t t, unn_iteration_record* out);
UNN_API unn_status unn_diagnostics_csv(const unn_diagnostics* d, char** csv);
UNN_API unn_status unn_diagnostics_save_csv(const unn_diagnostics* d, const char* path);
/* Rate-bound check; `violations` (nullable) receives the total count. */
UNN_API unn_status unn_diagnostics_rate_bound(const unn_diagnostics* d, char** json, size_t* violations);
UNN_API void unn_diagnostics_free(unn_diagnostics* d);

/* ---- models ---------------------------------------------------------------- */

UNN_API unn_status unn_model_save(const unn_model* model, const char* path);
UNN_API unn_status unn_model_load(const char* path, unn_model** out);
UNN_API unn_status unn_model_serialize(const unn_model* model, char** text);
/* Untrained model (all coefficients zero) over every row of `data`. */
UNN_API unn_status unn_model_from_dataset(const unn_dataset* data, size_t k, unn_model** out);
UNN_API size_t unn_model_size(const unn_model* model);
UNN_API size_t unn_model_k(const unn_model* model);
UNN_API int unn_model_num_classes(const unn_model* model);
UNN_API double unn_model_coeff(const unn_model* model, size_t j, int c);
UNN_API size_t unn_model_original_id(const unn_model* model, size_t j);
UNN_API int unn_model_per_class(const unn_model* model);
UNN_API void unn_model_free(unn_model* model);

typedef struct unn_filter_spec {
    unn_filter_mode mode;
    double alpha_tilde; /* threshold mode: keep j iff max_c alpha_jc > alpha_tilde */
    double theta;       /* fraction mode: keep ceil(theta m) largest ||alpha_j||^2 */
    int per_class;
    int exclude_nonpositive;
} unn_filter_spec;

UNN_API void unn_filter_spec_init(unn_filter_spec* spec);
UNN_API unn_status unn_model_filter(const unn_model* model, const unn_filter_spec* spec, unn_model** out);

/* ---- prediction ------------------------------------------------------------ */

/* k = 0 uses the model's k. */
UNN_API unn_status unn_predict(const unn_model* model, const unn_dataset* queries, unn_rule rule, size_t k,
                               unn_backend backend, int with_contributions, unn_predictions** out);
UNN_API size_t unn_predictions_count(const unn_predictions* p);
UNN_API int unn_predictions_label(const unn_predictions* p, size_t q);
UNN_API int unn_predictions_tie(const unn_predictions* p, size_t q);
/* Borrowed array of C scores. */
UNN_API const double* unn_predictions_scores(const unn_predictions* p, size_t q);
/* query,label,score_<class>... */
UNN_API unn_status unn_predictions_csv(const unn_predictions* p, char** csv);
/* query,prototype,class,value; empty body unless requested at prediction. */
UNN_API unn_status unn_predictions_contributions_csv(const unn_predictions* p, char** csv);
UNN_API void unn_predictions_free(unn_predictions* p);

/* ---- evaluation ------------------------------------------------------------ */

typedef struct unn_eval_summary {
    double map; /* mean per-class accuracy */
    double error_rate;
    double empirical_risk;
    double surrogate_risk; /* NaN unless evaluated on the training set */
    size_t queries;
    size_t ties;
} unn_eval_summary;

/* Any of summary, json, text may be NULL. */
UNN_API unn_status unn_evaluate(const unn_model* model, const unn_dataset* test, unn_rule rule, size_t k,
                                unn_backend backend, unn_eval_summary* summary, char** json, char** text);

typedef struct unn_cv_config {
    size_t folds;
    unn_train_config train;
    unn_filter_spec filter;
    size_t eval_k; /* 0 uses train.k */
    uint64_t seed;
    double baseline_fraction; /* 1 = whole training fold, 0 = match retained fraction */
    unn_backend backend;
} unn_cv_config;

typedef struct unn_cv_summary {
    double map_leveraged;
    double map_classic;
    double error_leveraged;
    double error_classic;
    double retained_fraction;
} unn_cv_summary;

UNN_API void unn_cv_config_init(unn_cv_config* config);
UNN_API unn_status unn_cross_validate(const unn_dataset* data, const unn_cv_config* config,
                                      unn_cv_summary* summary, char** json, char** text, char** folds_csv);

/* Normalised training-set edges of `model` (possibly filtered) on `train`. */
UNN_API unn_status unn_margin_stats(const unn_model* model, const unn_dataset* train, double* min_positive,
                                    char** json, char** text);

typedef struct unn_repro_config {
    size_t m_train;
    size_t m_test;
    uint64_t seed;
    size_t k;
} unn_repro_config;

UNN_API void unn_repro_config_init(unn_repro_config* config);
UNN_API unn_status unn_repro_ripley(const unn_repro_config* config, char** surrogate_csv, char** error_csv,
                                    char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* UNN_UNN_H */
