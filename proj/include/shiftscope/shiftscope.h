/* C interface of the shiftscope library.
 *
 * Every fallible call returns a shiftscope_status. On failure the message of
 * the last error on the calling thread is available from
 * shiftscope_last_error(). Handles are opaque and owned by the caller; free
 * them with the matching *_free function. Strings returned through char**
 * out-parameters are released with shiftscope_string_free().
 */
#ifndef SHIFTSCOPE_SHIFTSCOPE_H
#define SHIFTSCOPE_SHIFTSCOPE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SHIFTSCOPE_API __declspec(dllexport)
#else
#define SHIFTSCOPE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define SHIFTSCOPE_API_VERSION 1u

typedef enum shiftscope_status {
  SHIFTSCOPE_OK = 0,
  SHIFTSCOPE_FORMAT_ERROR = 1,
  SHIFTSCOPE_UNSUPPORTED_ARRAY = 2,
  SHIFTSCOPE_PARSE_ERROR = 3,
  SHIFTSCOPE_IO_ERROR = 4,
  SHIFTSCOPE_SAMPLE_TOO_LARGE = 5,
  SHIFTSCOPE_LABELS_REQUIRED = 6,
  SHIFTSCOPE_INVALID_SPLIT = 7,
  SHIFTSCOPE_DIM_ERROR = 8,
  SHIFTSCOPE_K_TOO_LARGE = 9,
  SHIFTSCOPE_INDEX_PAIRING_ERROR = 10,
  SHIFTSCOPE_INFINITE_BAR = 11,
  SHIFTSCOPE_INSUFFICIENT_SAMPLES = 12,
  SHIFTSCOPE_CONFIG_ERROR = 13,
  SHIFTSCOPE_INVALID_ARGUMENT = 14,
  SHIFTSCOPE_INTERNAL_ERROR = 99
} shiftscope_status;

typedef enum shiftscope_metric {
  SHIFTSCOPE_METRIC_ENERGY = 0,
  SHIFTSCOPE_METRIC_LOCAL_ENERGY = 1,
  SHIFTSCOPE_METRIC_SWP = 2
} shiftscope_metric;

typedef enum shiftscope_format {
  SHIFTSCOPE_FORMAT_JSON = 0,
  SHIFTSCOPE_FORMAT_TABLE = 1,
  SHIFTSCOPE_FORMAT_CSV = 2
} shiftscope_format;

typedef struct shiftscope_embedding shiftscope_embedding;
typedef struct shiftscope_report shiftscope_report;

typedef struct shiftscope_metric_options {
  shiftscope_metric metric;
  size_t k;               /* local energy neighborhood */
  int all_local;          /* nonzero: within-set terms restricted too */
  int max_dim;            /* 0 or 1 */
  double max_edge_length; /* <= 0 means enclosing radius */
  size_t h1_point_cap;
  size_t slices;
} shiftscope_metric_options;

typedef struct shiftscope_subsample_options {
  shiftscope_metric_options metric;
  size_t subsample_size;
  size_t samples_per_run;
  size_t runs;
  double alpha;
  uint64_t seed;
  size_t threads; /* 0 = hardware concurrency */
} shiftscope_subsample_options;

typedef struct shiftscope_perturb_options {
  shiftscope_metric_options metric;
  const double* grid; /* NULL selects the default grid */
  size_t grid_size;
  size_t criterion_k;
  double threshold;
  size_t samples_per_level;
  int use_mean; /* nonzero: mean instead of median for D* */
  int full_curve;
  uint64_t seed;
  size_t threads;
} shiftscope_perturb_options;

typedef struct shiftscope_ablation_options {
  shiftscope_metric_options metric;
  const size_t* sample_sizes; /* NULL selects {25, 50, 100} */
  size_t sample_sizes_count;
  const double* concentrations; /* NULL selects the default sweep */
  size_t concentrations_count;
  size_t reps;
  size_t samples_per_run;
  double alpha;
  uint64_t seed;
  size_t threads;
} shiftscope_ablation_options;

SHIFTSCOPE_API uint32_t shiftscope_api_version(void);
SHIFTSCOPE_API const char* shiftscope_last_error(void);
SHIFTSCOPE_API const char* shiftscope_status_name(int status);
SHIFTSCOPE_API void shiftscope_string_free(char* s);

/* Defaults match the library's C++ defaults. */
SHIFTSCOPE_API void shiftscope_metric_options_init(shiftscope_metric_options* opts);
SHIFTSCOPE_API void shiftscope_subsample_options_init(shiftscope_subsample_options* opts);
SHIFTSCOPE_API void shiftscope_perturb_options_init(shiftscope_perturb_options* opts);
SHIFTSCOPE_API void shiftscope_ablation_options_init(shiftscope_ablation_options* opts);
/* "energy", "local-energy" or "swp". */
SHIFTSCOPE_API int shiftscope_parse_metric(const char* name, shiftscope_metric* out);

/* Embeddings */
SHIFTSCOPE_API int shiftscope_embedding_load(const char* path, const char* label_column,
                                             shiftscope_embedding** out);
SHIFTSCOPE_API int shiftscope_embedding_from_array(const double* data, size_t rows, size_t dim,
                                                   const int64_t* labels,
                                                   shiftscope_embedding** out);
SHIFTSCOPE_API int shiftscope_embedding_save(const shiftscope_embedding* set, const char* path);
/* Replaces the labels with the 1-D integer NPY array at `path`. */
SHIFTSCOPE_API int shiftscope_embedding_attach_labels(shiftscope_embedding* set, const char* path);
SHIFTSCOPE_API int shiftscope_embedding_normalize(const shiftscope_embedding* set,
                                                  shiftscope_embedding** out,
                                                  size_t* zero_rows);
SHIFTSCOPE_API size_t shiftscope_embedding_rows(const shiftscope_embedding* set);
SHIFTSCOPE_API size_t shiftscope_embedding_dim(const shiftscope_embedding* set);
SHIFTSCOPE_API int shiftscope_embedding_has_labels(const shiftscope_embedding* set);
SHIFTSCOPE_API const double* shiftscope_embedding_data(const shiftscope_embedding* set);
SHIFTSCOPE_API const int64_t* shiftscope_embedding_labels(const shiftscope_embedding* set);
SHIFTSCOPE_API void shiftscope_embedding_free(shiftscope_embedding* set);

/* Synthetic data and shifts */
SHIFTSCOPE_API int shiftscope_gen_clusters(size_t classes, size_t per_class, size_t dim,
                                           double separation, uint64_t seed,
                                           shiftscope_embedding** out);
/* Random label halves; reference keeps group A at `fraction`, candidate
 * keeps group B at `fraction`. */
SHIFTSCOPE_API int shiftscope_gen_subpop(const shiftscope_embedding* set, double fraction,
                                         uint64_t seed, shiftscope_embedding** reference,
                                         shiftscope_embedding** candidate);
/* Explicit per-class keep fractions for each side. */
SHIFTSCOPE_API int shiftscope_gen_subpop_mixture(const shiftscope_embedding* set,
                                                 const double* fractions_a, size_t count_a,
                                                 const double* fractions_b, size_t count_b,
                                                 uint64_t seed, shiftscope_embedding** reference,
                                                 shiftscope_embedding** candidate);
SHIFTSCOPE_API int shiftscope_gen_domain(const shiftscope_embedding* set,
                                         const int64_t* classes_a, size_t count_a,
                                         const int64_t* classes_b, size_t count_b,
                                         shiftscope_embedding** reference,
                                         shiftscope_embedding** candidate);
/* Halves of the set; the candidate half gets a Dirichlet class mixture. */
SHIFTSCOPE_API int shiftscope_gen_dirichlet(const shiftscope_embedding* set,
                                            double concentration, uint64_t seed,
                                            shiftscope_embedding** reference,
                                            shiftscope_embedding** candidate);

/* Metrics */
SHIFTSCOPE_API int shiftscope_metric_distance(const shiftscope_embedding* x,
                                              const shiftscope_embedding* y,
                                              const shiftscope_metric_options* opts,
                                              uint64_t seed, double* out);
SHIFTSCOPE_API int shiftscope_knn_recall(const shiftscope_embedding* reference,
                                         const shiftscope_embedding* evaluation, size_t k,
                                         double* out);
/* Persistence diagrams as CSV (dimension,birth,death). */
SHIFTSCOPE_API int shiftscope_diagrams_csv(const shiftscope_embedding* set,
                                           const shiftscope_metric_options* opts, uint64_t seed,
                                           char** out);

/* Shift tests */
SHIFTSCOPE_API int shiftscope_detect_subsample(const shiftscope_embedding* reference,
                                               const shiftscope_embedding* candidate,
                                               const shiftscope_subsample_options* opts,
                                               shiftscope_report** out);
SHIFTSCOPE_API int shiftscope_detect_perturbation(const shiftscope_embedding* reference,
                                                  const shiftscope_embedding* candidate,
                                                  const shiftscope_perturb_options* opts,
                                                  shiftscope_report** out);
/* 1 for shift, 0 for no shift, -1 on a NULL handle. */
SHIFTSCOPE_API int shiftscope_report_decision(const shiftscope_report* report);
SHIFTSCOPE_API size_t shiftscope_report_warning_count(const shiftscope_report* report);
SHIFTSCOPE_API const char* shiftscope_report_warning(const shiftscope_report* report,
                                                     size_t index);
SHIFTSCOPE_API int shiftscope_report_render(const shiftscope_report* report,
                                            shiftscope_format format, char** out);
SHIFTSCOPE_API void shiftscope_report_free(shiftscope_report* report);

/* Label shift sweep; CSV rows of sample size x concentration. */
SHIFTSCOPE_API int shiftscope_ablate(const shiftscope_embedding* labeled,
                                     const shiftscope_ablation_options* opts, char** csv);

#ifdef __cplusplus
}
#endif

#endif /* SHIFTSCOPE_SHIFTSCOPE_H */
