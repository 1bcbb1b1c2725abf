#include "fuzzyirt.h"

#include <cmath>
#include <cstring>
#include <new>
#include <string>

#include "fuzzyirt/error.hpp"
#include "fuzzyirt/eval.hpp"
#include "fuzzyirt/fuzzy.hpp"
#include "fuzzyirt/io.hpp"
#include "fuzzyirt/pipeline.hpp"
#include "fuzzyirt/simgen.hpp"

struct fzirt_tree {
  fzirt::TreeSpec spec;
};

struct fzirt_ratings {
  fzirt::RatingsData data;
};

struct fzirt_fit {
  fzirt::FitResult result;
  fzirt::TreeSpec tree;
  fzirt::RatingsData data;
};

namespace {

thread_local std::string last_error;

fzirt_status fail(fzirt::ErrorCode code, const std::string& message) {
  last_error = message;
  return static_cast<fzirt_status>(code);
}

template <class F>
fzirt_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return FZIRT_OK;
  } catch (const fzirt::Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::bad_alloc&) {
    return fail(fzirt::ErrorCode::internal, "out of memory");
  } catch (const std::exception& e) {
    return fail(fzirt::ErrorCode::internal, e.what());
  } catch (...) {
    return fail(fzirt::ErrorCode::internal, "unknown exception");
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw fzirt::Error(fzirt::ErrorCode::invalid_argument, std::string(what) + " is NULL");
}

fzirt_status run_command(const char* config_json, void (*cmd)(const fzirt::PipelineConfig&)) {
  return guarded([&] {
    need(config_json, "config_json");
    fzirt::json j;
    try {
      j = fzirt::json::parse(config_json);
    } catch (const fzirt::json::parse_error& e) {
      throw fzirt::Error(fzirt::ErrorCode::schema, std::string("config: ") + e.what());
    }
    cmd(fzirt::config_from_json(j));
  });
}

fzirt::BetaFuzzyNumber to_beta(const fzirt_beta* f) {
  need(f, "beta");
  return fzirt::BetaFuzzyNumber::from_mode_precision(f->c_raw, f->s, f->categories);
}

void from_beta(const fzirt::BetaFuzzyNumber& b, fzirt_beta* out) {
  out->categories = b.categories();
  out->c_raw = b.c_raw();
  out->v_raw = b.v_raw();
  out->s = b.s();
  out->c01 = b.c01();
  out->a = b.a();
  out->b = b.b();
}

fzirt::CategoryDistribution to_distribution(const double* p, int categories) {
  need(p, "p");
  if (categories < 2) throw fzirt::Error(fzirt::ErrorCode::invalid_argument, "categories must be at least 2");
  return fzirt::CategoryDistribution(std::vector<double>(p, p + categories));
}

void copy_out(const double* src, size_t count, double* out, size_t n) {
  need(out, "out");
  if (n < count)
    throw fzirt::Error(fzirt::ErrorCode::invalid_argument,
                       "output buffer holds " + std::to_string(n) + " values, need " + std::to_string(count));
  std::memcpy(out, src, count * sizeof(double));
}

}  // namespace

extern "C" {

FZIRT_API const char* fzirt_version(void) { return "0.1.0"; }

FZIRT_API const char* fzirt_status_name(fzirt_status status) {
  return fzirt::error_code_name(static_cast<fzirt::ErrorCode>(status)).data();
}

FZIRT_API const char* fzirt_last_error(void) { return last_error.c_str(); }

FZIRT_API fzirt_status fzirt_cmd_simulate(const char* config_json) { return run_command(config_json, fzirt::cmd_simulate); }
FZIRT_API fzirt_status fzirt_cmd_fit(const char* config_json) { return run_command(config_json, fzirt::cmd_fit); }
FZIRT_API fzirt_status fzirt_cmd_fuzzify(const char* config_json) { return run_command(config_json, fzirt::cmd_fuzzify); }
FZIRT_API fzirt_status fzirt_cmd_summarize(const char* config_json) {
  return run_command(config_json, fzirt::cmd_summarize);
}
FZIRT_API fzirt_status fzirt_cmd_evaluate(const char* config_json) { return run_command(config_json, fzirt::cmd_evaluate); }

FZIRT_API fzirt_status fzirt_tree_builtin(const char* name, fzirt_tree** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    auto spec = fzirt::builtin_tree_by_name(name);
    if (!spec) throw fzirt::Error(fzirt::ErrorCode::invalid_argument, std::string("unknown built-in tree '") + name + "'");
    *out = new fzirt_tree{std::move(*spec)};
  });
}

FZIRT_API fzirt_status fzirt_tree_from_map(int categories, int nodes, const int* map, fzirt_tree** out) {
  return guarded([&] {
    need(map, "map");
    need(out, "out");
    if (categories < 1 || nodes < 1) throw fzirt::Error(fzirt::ErrorCode::invalid_argument, "tree dimensions must be positive");
    fzirt::RawTree raw;
    raw.categories = categories;
    raw.nodes = nodes;
    for (int k = 0; k < categories * nodes; ++k) {
      if (map[k] == -1)
        raw.entries.emplace_back(std::nullopt);
      else
        raw.entries.emplace_back(map[k]);
    }
    *out = new fzirt_tree{fzirt::validate_tree(std::move(raw))};
  });
}

FZIRT_API fzirt_status fzirt_tree_load(const char* ref, fzirt_tree** out) {
  return guarded([&] {
    need(ref, "ref");
    need(out, "out");
    *out = new fzirt_tree{fzirt::load_tree(ref)};
  });
}

FZIRT_API void fzirt_tree_free(fzirt_tree* tree) { delete tree; }
FZIRT_API int fzirt_tree_categories(const fzirt_tree* tree) { return tree ? tree->spec.categories() : 0; }
FZIRT_API int fzirt_tree_nodes(const fzirt_tree* tree) { return tree ? tree->spec.nodes() : 0; }

FZIRT_API fzirt_status fzirt_tree_probabilities(const fzirt_tree* tree, const double* eta, const double* alpha,
                                                double* out_p) {
  return guarded([&] {
    need(tree, "tree");
    need(eta, "eta");
    need(alpha, "alpha");
    need(out_p, "out_p");
    const size_t n = static_cast<size_t>(tree->spec.nodes());
    const auto p = fzirt::category_probabilities(tree->spec, {eta, n}, {alpha, n});
    std::memcpy(out_p, p.data(), p.size() * sizeof(double));
  });
}

FZIRT_API fzirt_status fzirt_ratings_load(const char* csv_path, fzirt_ratings** out) {
  return guarded([&] {
    need(csv_path, "csv_path");
    need(out, "out");
    *out = new fzirt_ratings{fzirt::read_ratings_csv(csv_path)};
  });
}

FZIRT_API fzirt_status fzirt_ratings_from_array(int persons, int items, const int* values, fzirt_ratings** out) {
  return guarded([&] {
    need(values, "values");
    need(out, "out");
    if (persons < 1 || items < 1) throw fzirt::Error(fzirt::ErrorCode::invalid_argument, "dimensions must be positive");
    fzirt::RatingsData data;
    data.ratings = fzirt::RatingMatrix(persons, items);
    for (int i = 0; i < persons; ++i) data.person_ids.push_back("p" + std::to_string(i + 1));
    for (int j = 0; j < items; ++j) data.item_names.push_back("item" + std::to_string(j + 1));
    for (size_t k = 0; k < data.ratings.values.size(); ++k) {
      if (values[k] < 0)
        throw fzirt::Error(fzirt::ErrorCode::out_of_range_category, "negative category at index " + std::to_string(k));
      data.ratings.values[k] = values[k];
    }
    *out = new fzirt_ratings{std::move(data)};
  });
}

FZIRT_API void fzirt_ratings_free(fzirt_ratings* ratings) { delete ratings; }

FZIRT_API fzirt_status fzirt_ratings_dims(const fzirt_ratings* ratings, int* persons, int* items) {
  return guarded([&] {
    need(ratings, "ratings");
    if (persons) *persons = ratings->data.ratings.persons;
    if (items) *items = ratings->data.ratings.items;
  });
}

FZIRT_API void fzirt_fit_options_default(fzirt_fit_options* opts) {
  if (!opts) return;
  const fzirt::FitOptions d;
  opts->quad_nodes = d.quad_nodes;
  opts->rel_tol = d.rel_tol;
  opts->grad_tol = d.grad_tol;
  opts->max_iter = d.max_iter;
  opts->threads = d.threads;
  opts->standard_errors = d.standard_errors ? 1 : 0;
  opts->traits = "common";
  opts->items = "common";
}

FZIRT_API fzirt_status fzirt_fit_run(const fzirt_ratings* ratings, const fzirt_tree* tree,
                                     const fzirt_fit_options* opts, fzirt_fit** out) {
  bool converged = true;
  const fzirt_status st = guarded([&] {
    need(ratings, "ratings");
    need(tree, "tree");
    need(out, "out");
    *out = nullptr;
    fzirt_fit_options o;
    fzirt_fit_options_default(&o);
    if (opts) o = *opts;
    fzirt::FitOptions fo;
    fo.quad_nodes = o.quad_nodes;
    fo.rel_tol = o.rel_tol;
    fo.grad_tol = o.grad_tol;
    fo.max_iter = o.max_iter;
    fo.threads = o.threads < 1 ? 1 : o.threads;
    fo.standard_errors = o.standard_errors != 0;
    const auto spec = fzirt::make_model_spec(fzirt::trait_structure_from_string(o.traits ? o.traits : "common"),
                                             fzirt::item_structure_from_string(o.items ? o.items : "common"),
                                             tree->spec.nodes());
    fzirt::check_ratings_against_tree(ratings->data, tree->spec);
    auto result = fzirt::fit(fzirt::expand(ratings->data.ratings, tree->spec), spec, fo);
    converged = result.converged();
    *out = new fzirt_fit{std::move(result), tree->spec, ratings->data};
  });
  if (st == FZIRT_OK && !converged)
    return fail(fzirt::ErrorCode::no_convergence,
                "optimizer stopped without convergence (" + fzirt::to_string((*out)->result.convergence.status) + ")");
  return st;
}

FZIRT_API void fzirt_fit_free(fzirt_fit* fit) { delete fit; }
FZIRT_API double fzirt_fit_loglik(const fzirt_fit* fit) { return fit ? fit->result.loglik : 0.0; }
FZIRT_API double fzirt_fit_aic(const fzirt_fit* fit) { return fit ? fit->result.aic : 0.0; }
FZIRT_API int fzirt_fit_converged(const fzirt_fit* fit) { return fit && fit->result.converged() ? 1 : 0; }
FZIRT_API int fzirt_fit_alpha_count(const fzirt_fit* fit) { return fit ? static_cast<int>(fit->result.alpha.size()) : 0; }
FZIRT_API int fzirt_fit_dimensions(const fzirt_fit* fit) { return fit ? static_cast<int>(fit->result.eta.cols()) : 0; }

FZIRT_API fzirt_status fzirt_fit_alpha(const fzirt_fit* fit, double* out, size_t n) {
  return guarded([&] {
    need(fit, "fit");
    copy_out(fit->result.alpha.data(), static_cast<size_t>(fit->result.alpha.size()), out, n);
  });
}

FZIRT_API fzirt_status fzirt_fit_eta(const fzirt_fit* fit, double* out, size_t n) {
  return guarded([&] {
    need(fit, "fit");
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> eta = fit->result.eta;
    copy_out(eta.data(), static_cast<size_t>(eta.size()), out, n);
  });
}

FZIRT_API fzirt_status fzirt_fit_sigma(const fzirt_fit* fit, double* out, size_t n) {
  return guarded([&] {
    need(fit, "fit");
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> sigma = fit->result.sigma;
    copy_out(sigma.data(), static_cast<size_t>(sigma.size()), out, n);
  });
}

FZIRT_API fzirt_status fzirt_fit_save(const fzirt_fit* fit, const char* json_path) {
  return guarded([&] {
    need(fit, "fit");
    need(json_path, "json_path");
    fzirt::write_text_file(json_path, fzirt::fit_to_json(fit->result, fit->tree, fit->data).dump(2) + "\n");
  });
}

FZIRT_API fzirt_status fzirt_fuzzify_distribution(const double* p, int categories, fzirt_beta* out) {
  return guarded([&] {
    need(out, "out");
    from_beta(fzirt::fuzzify(to_distribution(p, categories)), out);
  });
}

FZIRT_API fzirt_status fzirt_beta_membership(const fzirt_beta* f, double y, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = fzirt::membership(to_beta(f), y);
  });
}

FZIRT_API fzirt_status fzirt_beta_cardinality(const fzirt_beta* f, int raw_domain, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = fzirt::cardinality(to_beta(f), raw_domain ? fzirt::Domain::raw : fzirt::Domain::normalized);
  });
}

FZIRT_API fzirt_status fzirt_beta_centroid(const fzirt_beta* f, int raw_domain, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = fzirt::centroid(to_beta(f), raw_domain ? fzirt::Domain::raw : fzirt::Domain::normalized);
  });
}

FZIRT_API fzirt_status fzirt_beta_support_length(const fzirt_beta* f, int raw_domain, double kappa, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = fzirt::support_length(to_beta(f), raw_domain ? fzirt::Domain::raw : fzirt::Domain::normalized, kappa);
  });
}

FZIRT_API fzirt_status fzirt_triangular_moments(const fzirt_beta* f, fzirt_triangle* out) {
  return guarded([&] {
    need(out, "out");
    const auto t = fzirt::to_triangular_moments(to_beta(f));
    *out = {t.y_l, t.c, t.y_u};
  });
}

FZIRT_API fzirt_status fzirt_triangular_quantile(const double* p, int categories, double tau, fzirt_triangle* out) {
  return guarded([&] {
    need(out, "out");
    const auto t = fzirt::to_triangular_quantile(to_distribution(p, categories), tau);
    *out = {t.y_l, t.c, t.y_u};
  });
}

FZIRT_API fzirt_status fzirt_auc(const double* scores, const uint8_t* labels, size_t n, double* out) {
  return guarded([&] {
    need(scores, "scores");
    need(labels, "labels");
    need(out, "out");
    *out = fzirt::auc({scores, n}, {labels, n});
  });
}

FZIRT_API fzirt_status fzirt_pcm_probabilities(double eta, double alpha, int categories, double* out_p) {
  return guarded([&] {
    need(out_p, "out_p");
    if (!std::isfinite(eta) || !std::isfinite(alpha))
      throw fzirt::Error(fzirt::ErrorCode::invalid_argument, "eta and alpha must be finite");
    const auto p = fzirt::pcm_probabilities(eta, alpha, categories);
    std::memcpy(out_p, p.data(), p.size() * sizeof(double));
  });
}

}  // extern "C"
