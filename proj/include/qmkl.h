/*
 * C interface to the quantum-classical multiple kernel learning library.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns a qmkl_status; on
 * failure, qmkl_last_error_message() describes the problem for the calling
 * thread. Strings returned through char** are released with qmkl_string_free.
 */
#ifndef QMKL_H
#define QMKL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(QMKL_BUILDING_LIBRARY)
#    define QMKL_API __declspec(dllexport)
#  else
#    define QMKL_API __declspec(dllimport)
#  endif
#else
#  define QMKL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qmkl_status {
    QMKL_OK = 0,
    QMKL_ERR_SIZE = 1,
    QMKL_ERR_INDEX = 2,
    QMKL_ERR_ARGUMENT = 3,
    QMKL_ERR_DIMENSION = 4,
    QMKL_ERR_KIND = 5,
    QMKL_ERR_DEGENERATE = 6,
    QMKL_ERR_WEIGHT = 7,
    QMKL_ERR_LABEL = 8,
    QMKL_ERR_PARSE = 9,
    QMKL_ERR_IO = 10,
    QMKL_ERR_UNDEFINED_METRIC = 11,
    QMKL_ERR_PLACEMENT = 12,
    QMKL_ERR_AGGREGATION = 13,
    QMKL_ERR_INTERNAL = 14,
    QMKL_ERR_NULL_ARGUMENT = 15,
    QMKL_ERR_BUFFER_TOO_SMALL = 16
} qmkl_status;

typedef enum qmkl_partition {
    QMKL_PARTITION_TRAIN = 0,
    QMKL_PARTITION_TEST = 1,
    QMKL_PARTITION_ALL = 2
} qmkl_partition;

typedef enum qmkl_gram_format {
    QMKL_GRAM_CSV = 0,
    QMKL_GRAM_BINARY = 1 /* "QGRM", u32 M, M*M f64, little-endian, row-major */
} qmkl_gram_format;

typedef struct qmkl_dataset qmkl_dataset;
typedef struct qmkl_kernel qmkl_kernel;
typedef struct qmkl_gram qmkl_gram;
typedef struct qmkl_svm qmkl_svm;

QMKL_API const char *qmkl_version(void);
QMKL_API const char *qmkl_status_string(qmkl_status status);
QMKL_API const char *qmkl_last_error_message(void);
QMKL_API void qmkl_string_free(char *s);

/* ---- datasets ---------------------------------------------------------- */

/* Generate, scale to [0, 2pi] and split one synthetic instance. */
QMKL_API qmkl_status qmkl_dataset_generate(size_t n_features, size_t n_samples, double class_sep,
                                           size_t clusters_per_class, uint64_t seed,
                                           double train_ratio, int scale_on_train_only,
                                           qmkl_dataset **out);
QMKL_API qmkl_status qmkl_dataset_load_csv(const char *path, qmkl_dataset **out);
QMKL_API qmkl_status qmkl_dataset_save_csv(const qmkl_dataset *ds, const char *path);
QMKL_API qmkl_status qmkl_dataset_shape(const qmkl_dataset *ds, size_t *n_samples,
                                        size_t *n_features, size_t *n_train, size_t *n_test);
/* Labels of a partition; *count receives the required length. */
QMKL_API qmkl_status qmkl_dataset_labels(const qmkl_dataset *ds, qmkl_partition part, int *buffer,
                                         size_t capacity, size_t *count);
QMKL_API void qmkl_dataset_free(qmkl_dataset *ds);

/* ---- kernels ----------------------------------------------------------- */

/* kind: linear | polynomial | rbf | rx | iqp | qaoa; topology: all_pairs | ring
 * (NULL means all_pairs). theta may be NULL only when n_theta is 0. */
QMKL_API qmkl_status qmkl_kernel_create(const char *kind, size_t n_features, const double *theta,
                                        size_t n_theta, const char *topology, qmkl_kernel **out);
/* Default parameters; QAOA angles are drawn from seed. */
QMKL_API qmkl_status qmkl_kernel_create_default(const char *kind, size_t n_features, uint64_t seed,
                                                const char *topology, qmkl_kernel **out);
QMKL_API qmkl_status qmkl_kernel_theta(const qmkl_kernel *k, double *buffer, size_t capacity,
                                       size_t *count);
QMKL_API qmkl_status qmkl_kernel_eval(const qmkl_kernel *k, const double *x, const double *y,
                                      size_t n_features, double *out);
QMKL_API void qmkl_kernel_free(qmkl_kernel *k);

/* ---- Gram matrices ----------------------------------------------------- */

/* normalize != 0 divides unbounded kernels by sqrt(K_ii K_jj). */
QMKL_API qmkl_status qmkl_gram_compute(const qmkl_kernel *k, const qmkl_dataset *ds,
                                       qmkl_partition part, int normalize, qmkl_gram **out);
QMKL_API qmkl_status qmkl_gram_from_entries(const double *entries, size_t m, qmkl_gram **out);
/* Format detected from the QGRM magic. */
QMKL_API qmkl_status qmkl_gram_load(const char *path, qmkl_gram **out);
QMKL_API qmkl_status qmkl_gram_save(const qmkl_gram *g, const char *path, qmkl_gram_format format);
QMKL_API qmkl_status qmkl_gram_size(const qmkl_gram *g, size_t *m);
/* Row-major copy into buffer of capacity >= m*m. */
QMKL_API qmkl_status qmkl_gram_entries(const qmkl_gram *g, double *buffer, size_t capacity);
QMKL_API qmkl_status qmkl_gram_min_eigenvalue(const qmkl_gram *g, double *out);
QMKL_API void qmkl_gram_free(qmkl_gram *g);

/* ---- EasyMKL ----------------------------------------------------------- */

/* JSON: {"phi":[..],"gamma_l2":[..],"gamma_l1":[..],"loss":x,"iterations":n,"converged":b} */
QMKL_API qmkl_status qmkl_mkl_fit(const qmkl_gram *const *grams, size_t n_grams, const int *labels,
                                  size_t m, double lambda, char **solution_json);

/* ---- SVM --------------------------------------------------------------- */

QMKL_API qmkl_status qmkl_svm_train(const qmkl_gram *g, const int *labels, size_t m, double C,
                                    qmkl_svm **out);
/* Row-major T x M cross Gram in, T decision values out. */
QMKL_API qmkl_status qmkl_svm_decision(const qmkl_svm *model, const double *k_cross, size_t t,
                                       size_t m, double *out);
/* JSON: {"alpha":[..],"bias":b,"support_indices":[..],"C":c} */
QMKL_API qmkl_status qmkl_svm_to_json(const qmkl_svm *model, char **json);
QMKL_API void qmkl_svm_free(qmkl_svm *model);

/* ---- pipelines (JSON requests) ----------------------------------------- */

/* request: {"kernels":[{"kind":..,"theta":[..],"topology":..}], "seed":n, "lambda":x,
 *           "qccnet":{...}}
 * result:  {"theta":[[..]], "gamma_l2":[..], "gamma_l1":[..], "loss":x,
 *           "best_iteration":n, "trained":b}
 * trace:   one JSON object per outer iteration, newline separated. */
QMKL_API qmkl_status qmkl_train(const qmkl_dataset *ds, const char *request_json,
                                char **result_json, char **trace_jsonl);

/* request: as qmkl_train plus "result_type" (I | II | III) and "svm_C".
 * result:  metrics, weights and parameters for the testing partition. */
QMKL_API qmkl_status qmkl_evaluate(const qmkl_dataset *ds, const char *request_json,
                                   char **result_json);

/* Runs the experiment grid and writes rows.jsonl, rows.csv, timings.csv and
 * config.json into out_dir. config_json may be NULL for the defaults; full
 * selects d = 2..13. threads 0 keeps the config value. */
QMKL_API qmkl_status qmkl_experiment_run(const char *config_json, const char *out_dir, int full,
                                         unsigned threads, int verbose, char **summary_json);

/* Reads rows.jsonl and writes medians.csv, weights_density.csv, difference.csv. */
QMKL_API qmkl_status qmkl_aggregate(const char *rows_path, const char *out_dir);

/* Two-feature datasets only: fits the SVM for the request (as qmkl_evaluate;
 * "gamma" may fix the weights) and writes x,y,score rows to out_path. */
QMKL_API qmkl_status qmkl_decision_grid(const qmkl_dataset *ds, const char *request_json,
                                        size_t resolution, const char *out_path);

#ifdef __cplusplus
}
#endif

#endif /* QMKL_H */
