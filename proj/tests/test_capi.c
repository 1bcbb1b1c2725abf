/* Exercises the C interface from plain C. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "fuzzyirt.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

#define NEAR(a, b, tol) EXPECT(fabs((a) - (b)) <= (tol))

static void test_status(void) {
  EXPECT(strcmp(fzirt_status_name(FZIRT_OK), "OK") == 0);
  EXPECT(strcmp(fzirt_status_name(FZIRT_E_SCHEMA), "E_SCHEMA") == 0);
  EXPECT(strlen(fzirt_version()) > 0);
}

static void test_tree(void) {
  fzirt_tree* t = NULL;
  double eta[2] = {0.0, 0.0}, alpha[2] = {0.0, 0.0}, p[3];
  int dup[2] = {1, 1};
  EXPECT(fzirt_tree_builtin("linear3", &t) == FZIRT_OK);
  EXPECT(fzirt_tree_categories(t) == 3);
  EXPECT(fzirt_tree_nodes(t) == 2);
  EXPECT(fzirt_tree_probabilities(t, eta, alpha, p) == FZIRT_OK);
  NEAR(p[0], 0.5, 1e-15);
  NEAR(p[1], 0.25, 1e-15);
  NEAR(p[2], 0.25, 1e-15);
  fzirt_tree_free(t);

  t = NULL;
  EXPECT(fzirt_tree_builtin("oak", &t) != FZIRT_OK);
  EXPECT(t == NULL);
  EXPECT(strlen(fzirt_last_error()) > 0);
  EXPECT(fzirt_tree_from_map(2, 1, dup, &t) == FZIRT_E_DUPLICATE_PATH);
  {
    int map[6] = {0, -1, 1, 0, 1, 1};
    EXPECT(fzirt_tree_from_map(3, 2, map, &t) == FZIRT_OK);
    EXPECT(fzirt_tree_nodes(t) == 2);
    fzirt_tree_free(t);
  }
  EXPECT(fzirt_tree_builtin(NULL, &t) == FZIRT_E_INVALID_ARGUMENT);
}

static void test_fuzzy(void) {
  double uniform[3] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  double skew[3] = {0.005, 0.995, 0.0};
  double bad[3] = {0.5, 0.5, 0.5};
  double v = 0.0;
  fzirt_beta b;
  fzirt_triangle tri;
  EXPECT(fzirt_fuzzify_distribution(uniform, 3, &b) == FZIRT_OK);
  NEAR(b.c_raw, 2.0, 1e-15);
  NEAR(b.s, 1.5, 1e-14);
  EXPECT(fzirt_beta_membership(&b, 2.0, &v) == FZIRT_OK);
  NEAR(v, 1.0, 1e-15);
  EXPECT(fzirt_beta_membership(&b, 4.0, &v) == FZIRT_E_DOMAIN);
  EXPECT(fzirt_beta_centroid(&b, 0, &v) == FZIRT_OK);
  NEAR(v, 0.5, 1e-15);
  EXPECT(fzirt_beta_cardinality(&b, 0, &v) == FZIRT_OK);
  EXPECT(v > 0.0 && v < 1.0);
  EXPECT(fzirt_beta_support_length(&b, 1, 1e-3, &v) == FZIRT_OK);
  EXPECT(v > 0.0 && v <= 2.0);
  EXPECT(fzirt_triangular_moments(&b, &tri) == FZIRT_OK);
  EXPECT(tri.y_l <= tri.c && tri.c <= tri.y_u);
  EXPECT(fzirt_triangular_quantile(skew, 3, 0.01, &tri) == FZIRT_OK);
  NEAR(tri.y_l, 1.995, 1e-14);
  NEAR(tri.y_u, 2.0, 1e-15);
  EXPECT(fzirt_fuzzify_distribution(bad, 3, &b) == FZIRT_E_INVALID_ARGUMENT);
}

static void test_auc_pcm(void) {
  double s[4] = {0.1, 0.4, 0.35, 0.8};
  uint8_t y[4] = {0, 0, 1, 1};
  uint8_t same[4] = {1, 1, 1, 1};
  double a = 0.0, p[3];
  EXPECT(fzirt_auc(s, y, 4, &a) == FZIRT_OK);
  NEAR(a, 0.75, 1e-15);
  EXPECT(fzirt_auc(s, same, 4, &a) == FZIRT_E_DEGENERATE_OUTCOME);
  EXPECT(fzirt_pcm_probabilities(log(2.0), 0.0, 3, p) == FZIRT_OK);
  NEAR(p[0], 1.0 / 7, 1e-14);
  NEAR(p[2], 4.0 / 7, 1e-14);
}

static void test_fit(void) {
  enum { I = 60, J = 4 };
  int values[I * J];
  int i, j;
  fzirt_ratings* r = NULL;
  fzirt_tree* t = NULL;
  fzirt_fit* f = NULL;
  fzirt_fit_options opts;
  double alpha[J], eta[I], sigma[1];
  int persons = 0, items = 0;
  unsigned state = 12345u;
  for (i = 0; i < I; ++i)
    for (j = 0; j < J; ++j) {
      state = state * 1103515245u + 12345u;
      values[i * J + j] = 1 + (int)((state >> 16) % 3u);
    }
  EXPECT(fzirt_ratings_from_array(I, J, values, &r) == FZIRT_OK);
  EXPECT(fzirt_ratings_dims(r, &persons, &items) == FZIRT_OK);
  EXPECT(persons == I && items == J);
  EXPECT(fzirt_tree_builtin("linear3", &t) == FZIRT_OK);
  fzirt_fit_options_default(&opts);
  EXPECT(opts.quad_nodes == 15);
  opts.standard_errors = 0;
  EXPECT(fzirt_fit_run(r, t, &opts, &f) == FZIRT_OK);
  EXPECT(fzirt_fit_converged(f));
  EXPECT(fzirt_fit_alpha_count(f) == J);
  EXPECT(fzirt_fit_dimensions(f) == 1);
  EXPECT(fzirt_fit_alpha(f, alpha, J) == FZIRT_OK);
  EXPECT(fzirt_fit_eta(f, eta, I) == FZIRT_OK);
  EXPECT(fzirt_fit_sigma(f, sigma, 1) == FZIRT_OK);
  EXPECT(sigma[0] >= 0.0);
  EXPECT(fzirt_fit_alpha(f, alpha, 1) == FZIRT_E_INVALID_ARGUMENT);
  NEAR(fzirt_fit_aic(f), 2.0 * (J + 1) - 2.0 * fzirt_fit_loglik(f), 1e-9);
  fzirt_fit_free(f);

  values[0] = 7;
  fzirt_ratings_free(r);
  EXPECT(fzirt_ratings_from_array(I, J, values, &r) == FZIRT_OK);
  f = NULL;
  EXPECT(fzirt_fit_run(r, t, &opts, &f) == FZIRT_E_SCHEMA);
  EXPECT(f == NULL);
  fzirt_ratings_free(r);
  fzirt_tree_free(t);
  fzirt_fit_free(NULL);
}

static void test_commands(void) {
  EXPECT(fzirt_cmd_fit("{not json") == FZIRT_E_SCHEMA);
  EXPECT(fzirt_cmd_evaluate("{}") == FZIRT_E_INVALID_ARGUMENT);
  EXPECT(fzirt_cmd_summarize("{\"paths\": {\"fuzzy\": \"/nonexistent/fuzzy.csv\"}}") == FZIRT_E_IO);
}

int main(void) {
  test_status();
  test_tree();
  test_fuzzy();
  test_auc_pcm();
  test_fit();
  test_commands();
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  printf("c api: all checks passed\n");
  return 0;
}
