#ifndef FUZZYIRT_H
#define FUZZYIRT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FZIRT_BUILDING_LIBRARY)
#    define FZIRT_API __declspec(dllexport)
#  else
#    define FZIRT_API __declspec(dllimport)
#  endif
#else
#  define FZIRT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as exit codes of the fuzzyirt command. */
typedef enum fzirt_status {
  FZIRT_OK = 0,
  FZIRT_E_INVALID_ARGUMENT = 1,
  FZIRT_E_DUPLICATE_PATH = 2,
  FZIRT_E_EMPTY_ROW = 3,
  FZIRT_E_BAD_ENTRY = 4,
  FZIRT_E_INCOMPLETE_TREE = 5,
  FZIRT_E_OUT_OF_RANGE_CATEGORY = 6,
  FZIRT_E_NONFINITE_LIKELIHOOD = 7,
  FZIRT_E_NO_CONVERGENCE = 8,
  FZIRT_E_DOMAIN = 9,
  FZIRT_E_NEGATIVE_DISCRIMINANT = 10,
  FZIRT_E_ALL_BELOW_THRESHOLD = 11,
  FZIRT_E_DEGENERATE_OUTCOME = 12,
  FZIRT_E_SCHEMA = 13,
  FZIRT_E_IO = 14,
  FZIRT_E_EMPTY_INPUT = 15,
  FZIRT_E_INTERNAL = 16
} fzirt_status;

typedef struct fzirt_tree fzirt_tree;
typedef struct fzirt_ratings fzirt_ratings;
typedef struct fzirt_fit fzirt_fit;

FZIRT_API const char* fzirt_version(void);
/* "E_DUPLICATE_PATH" etc.; "OK" for FZIRT_OK. */
FZIRT_API const char* fzirt_status_name(fzirt_status status);
/* Message of the last failed call on this thread ("" if none). */
FZIRT_API const char* fzirt_last_error(void);

/* Pipeline commands. The argument is the JSON configuration text. */
FZIRT_API fzirt_status fzirt_cmd_simulate(const char* config_json);
FZIRT_API fzirt_status fzirt_cmd_fit(const char* config_json);
FZIRT_API fzirt_status fzirt_cmd_fuzzify(const char* config_json);
FZIRT_API fzirt_status fzirt_cmd_summarize(const char* config_json);
FZIRT_API fzirt_status fzirt_cmd_evaluate(const char* config_json);

/* Trees. map is row-major categories x nodes with -1 for "not visited". */
FZIRT_API fzirt_status fzirt_tree_builtin(const char* name, fzirt_tree** out);
FZIRT_API fzirt_status fzirt_tree_from_map(int categories, int nodes, const int* map, fzirt_tree** out);
FZIRT_API fzirt_status fzirt_tree_load(const char* ref, fzirt_tree** out);
FZIRT_API void fzirt_tree_free(fzirt_tree* tree);
FZIRT_API int fzirt_tree_categories(const fzirt_tree* tree);
FZIRT_API int fzirt_tree_nodes(const fzirt_tree* tree);
/* eta and alpha hold one value per node; out_p receives M probabilities. */
FZIRT_API fzirt_status fzirt_tree_probabilities(const fzirt_tree* tree, const double* eta, const double* alpha,
                                                double* out_p);

/* Ratings: row-major persons x items, categories 1..M, 0 = missing. */
FZIRT_API fzirt_status fzirt_ratings_load(const char* csv_path, fzirt_ratings** out);
FZIRT_API fzirt_status fzirt_ratings_from_array(int persons, int items, const int* values, fzirt_ratings** out);
FZIRT_API void fzirt_ratings_free(fzirt_ratings* ratings);
FZIRT_API fzirt_status fzirt_ratings_dims(const fzirt_ratings* ratings, int* persons, int* items);

typedef struct fzirt_fit_options {
  int quad_nodes;
  double rel_tol;
  double grad_tol;
  int max_iter;
  int threads;
  int standard_errors;
  const char* traits; /* "common", "per_node_independent", "per_node_correlated" */
  const char* items;  /* "common", "per_node" */
} fzirt_fit_options;

FZIRT_API void fzirt_fit_options_default(fzirt_fit_options* opts);
/* On FZIRT_E_NO_CONVERGENCE *out still holds the (unconverged) fit. */
FZIRT_API fzirt_status fzirt_fit_run(const fzirt_ratings* ratings, const fzirt_tree* tree,
                                     const fzirt_fit_options* opts, fzirt_fit** out);
FZIRT_API void fzirt_fit_free(fzirt_fit* fit);
FZIRT_API double fzirt_fit_loglik(const fzirt_fit* fit);
FZIRT_API double fzirt_fit_aic(const fzirt_fit* fit);
FZIRT_API int fzirt_fit_converged(const fzirt_fit* fit);
FZIRT_API int fzirt_fit_alpha_count(const fzirt_fit* fit);
FZIRT_API int fzirt_fit_dimensions(const fzirt_fit* fit);
FZIRT_API fzirt_status fzirt_fit_alpha(const fzirt_fit* fit, double* out, size_t n);
/* persons x D, row-major. */
FZIRT_API fzirt_status fzirt_fit_eta(const fzirt_fit* fit, double* out, size_t n);
/* D x D, row-major. */
FZIRT_API fzirt_status fzirt_fit_sigma(const fzirt_fit* fit, double* out, size_t n);
FZIRT_API fzirt_status fzirt_fit_save(const fzirt_fit* fit, const char* json_path);

typedef struct fzirt_beta {
  int categories;
  double c_raw;
  double v_raw;
  double s;
  double c01;
  double a;
  double b;
} fzirt_beta;

typedef struct fzirt_triangle {
  double y_l;
  double c;
  double y_u;
} fzirt_triangle;

FZIRT_API fzirt_status fzirt_fuzzify_distribution(const double* p, int categories, fzirt_beta* out);
FZIRT_API fzirt_status fzirt_beta_membership(const fzirt_beta* f, double y, double* out);
/* raw_domain: 0 for [0, 1], nonzero for [1, M]. */
FZIRT_API fzirt_status fzirt_beta_cardinality(const fzirt_beta* f, int raw_domain, double* out);
FZIRT_API fzirt_status fzirt_beta_centroid(const fzirt_beta* f, int raw_domain, double* out);
FZIRT_API fzirt_status fzirt_beta_support_length(const fzirt_beta* f, int raw_domain, double kappa, double* out);
FZIRT_API fzirt_status fzirt_triangular_moments(const fzirt_beta* f, fzirt_triangle* out);
FZIRT_API fzirt_status fzirt_triangular_quantile(const double* p, int categories, double tau, fzirt_triangle* out);

FZIRT_API fzirt_status fzirt_auc(const double* scores, const uint8_t* labels, size_t n, double* out);
FZIRT_API fzirt_status fzirt_pcm_probabilities(double eta, double alpha, int categories, double* out_p);

#ifdef __cplusplus
}
#endif

#endif
