#include "fuzzyirt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <set>

#include "fuzzyirt/error.hpp"

namespace fzirt {

namespace fs = std::filesystem;

namespace {

constexpr int kCurvePoints = 201;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::schema, where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
      throw Error(ErrorCode::schema, "unknown key '" + key + "' in " + where);
  }
}

std::string get_string(const json& j, const std::string& what) {
  if (!j.is_string()) throw Error(ErrorCode::schema, what + " must be a string");
  return j.get<std::string>();
}

double get_double(const json& j, const std::string& what) {
  if (!j.is_number()) throw Error(ErrorCode::schema, what + " must be a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw Error(ErrorCode::schema, what + " must be an integer");
  return j.get<int>();
}

bool get_bool(const json& j, const std::string& what) {
  if (!j.is_boolean()) throw Error(ErrorCode::schema, what + " must be true or false");
  return j.get<bool>();
}

void check_range(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::schema, message);
}

json parse_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::schema, path + ": " + e.what());
  }
}

void log(const PipelineConfig& cfg, const std::string& line) {
  if (cfg.verbosity > 0) std::cerr << line << '\n';
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

ModelSpec load_model(const PipelineConfig& cfg, int nodes) {
  if (!cfg.paths.model.empty()) return model_from_json(parse_json_file(cfg.paths.model), nodes);
  if (cfg.model) return model_from_json(*cfg.model, nodes);
  return make_model_spec(TraitStructure::common, ItemStructure::common, nodes);
}

struct Triangle {
  TriangularFuzzyNumber t;
  std::string source;
};

std::vector<double> column(const std::vector<std::vector<double>>& rows, size_t k) {
  std::vector<double> out;
  for (const auto& r : rows)
    if (std::isfinite(r[k])) out.push_back(r[k]);
  return out;
}

}  // namespace

FuzzyShape fuzzy_shape_from_string(const std::string& s) {
  if (s == "beta") return FuzzyShape::beta;
  if (s == "tri-moment") return FuzzyShape::tri_moment;
  if (s == "tri-quantile") return FuzzyShape::tri_quantile;
  throw Error(ErrorCode::schema, "unknown fuzzy shape '" + s + "' (beta, tri-moment, tri-quantile)");
}

std::string to_string(FuzzyShape s) {
  switch (s) {
    case FuzzyShape::beta: return "beta";
    case FuzzyShape::tri_moment: return "tri-moment";
    case FuzzyShape::tri_quantile: return "tri-quantile";
  }
  return "?";
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig cfg;
  only_keys(j, {"paths", "model", "fit", "fuzzify", "scenario", "evaluate", "seed", "verbosity"}, "config");

  if (j.contains("paths")) {
    const json& p = j.at("paths");
    only_keys(p, {"data", "tree", "model", "fit", "fuzzy", "scenario", "out"}, "paths");
    auto set = [&](const char* key, std::string& dst) {
      if (p.contains(key)) dst = get_string(p.at(key), std::string("paths.") + key);
    };
    set("data", cfg.paths.data);
    set("tree", cfg.paths.tree);
    set("model", cfg.paths.model);
    set("fit", cfg.paths.fit);
    set("fuzzy", cfg.paths.fuzzy);
    set("scenario", cfg.paths.scenario);
    set("out", cfg.paths.out);
    check_range(!cfg.paths.out.empty(), "paths.out must not be empty");
  }
  if (j.contains("model")) cfg.model = j.at("model");

  if (j.contains("fit")) {
    const json& f = j.at("fit");
    only_keys(f, {"quad_nodes", "rel_tol", "grad_tol", "max_iter", "threads", "standard_errors"}, "fit");
    if (f.contains("quad_nodes")) cfg.fit.quad_nodes = get_int(f.at("quad_nodes"), "fit.quad_nodes");
    if (f.contains("rel_tol")) cfg.fit.rel_tol = get_double(f.at("rel_tol"), "fit.rel_tol");
    if (f.contains("grad_tol")) cfg.fit.grad_tol = get_double(f.at("grad_tol"), "fit.grad_tol");
    if (f.contains("max_iter")) cfg.fit.max_iter = get_int(f.at("max_iter"), "fit.max_iter");
    if (f.contains("threads")) cfg.fit.threads = get_int(f.at("threads"), "fit.threads");
    if (f.contains("standard_errors"))
      cfg.fit.standard_errors = get_bool(f.at("standard_errors"), "fit.standard_errors");
  }
  check_range(cfg.fit.quad_nodes >= 1 && cfg.fit.quad_nodes <= 200, "fit.quad_nodes must be in 1..200");
  check_range(cfg.fit.rel_tol > 0.0 && cfg.fit.grad_tol > 0.0, "fit tolerances must be positive");
  check_range(cfg.fit.max_iter >= 1, "fit.max_iter must be at least 1");
  check_range(cfg.fit.threads >= 1, "fit.threads must be at least 1");

  if (j.contains("fuzzify")) {
    const json& f = j.at("fuzzify");
    only_keys(f, {"shape", "tau", "domain", "curves", "kappa"}, "fuzzify");
    if (f.contains("shape")) cfg.fuzzify.shape = fuzzy_shape_from_string(get_string(f.at("shape"), "fuzzify.shape"));
    if (f.contains("tau")) cfg.fuzzify.tau = get_double(f.at("tau"), "fuzzify.tau");
    if (f.contains("domain")) {
      const std::string d = get_string(f.at("domain"), "fuzzify.domain");
      if (d == "normalized")
        cfg.fuzzify.domain = Domain::normalized;
      else if (d == "raw")
        cfg.fuzzify.domain = Domain::raw;
      else
        throw Error(ErrorCode::schema, "fuzzify.domain must be 'normalized' or 'raw'");
    }
    if (f.contains("curves")) cfg.fuzzify.curves = get_bool(f.at("curves"), "fuzzify.curves");
    if (f.contains("kappa")) cfg.fuzzify.kappa = get_double(f.at("kappa"), "fuzzify.kappa");
  }
  check_range(cfg.fuzzify.tau >= 0.0 && cfg.fuzzify.tau < 1.0, "fuzzify.tau must be in [0, 1)");
  check_range(cfg.fuzzify.kappa >= 0.0 && cfg.fuzzify.kappa < 1.0, "fuzzify.kappa must be in [0, 1)");

  if (j.contains("scenario")) cfg.scenario = j.at("scenario");

  if (j.contains("evaluate")) {
    const json& e = j.at("evaluate");
    only_keys(e, {"reps", "threads", "scenarios", "grid", "zero_time_intensity"}, "evaluate");
    if (e.contains("reps")) cfg.evaluate.reps = get_int(e.at("reps"), "evaluate.reps");
    if (e.contains("threads")) cfg.evaluate.threads = get_int(e.at("threads"), "evaluate.threads");
    if (e.contains("zero_time_intensity"))
      cfg.evaluate.zero_time_intensity = get_bool(e.at("zero_time_intensity"), "evaluate.zero_time_intensity");
    if (e.contains("scenarios")) {
      const json& list = e.at("scenarios");
      if (!list.is_array()) throw Error(ErrorCode::schema, "evaluate.scenarios must be an array");
      for (const auto& s : list) cfg.evaluate.scenarios.push_back(s);
    }
    if (e.contains("grid")) {
      const json& g = e.at("grid");
      only_keys(g, {"M", "I", "J", "beta0"}, "evaluate.grid");
      for (const char* key : {"M", "I", "J", "beta0"})
        if (!g.contains(key) || !g.at(key).is_array() || g.at(key).empty())
          throw Error(ErrorCode::schema, std::string("evaluate.grid.") + key + " must be a non-empty array");
      for (const auto& m : g.at("M"))
        for (const auto& i : g.at("I"))
          for (const auto& jj : g.at("J"))
            for (const auto& b : g.at("beta0"))
              cfg.evaluate.scenarios.push_back({{"M", m}, {"I", i}, {"J", jj}, {"beta0", b}});
    }
  }
  check_range(cfg.evaluate.reps >= 0, "evaluate.reps must be non-negative");
  check_range(cfg.evaluate.threads >= 1, "evaluate.threads must be at least 1");

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer() || (j.at("seed").is_number_integer() && !j.at("seed").is_number_unsigned() &&
                                              j.at("seed").get<std::int64_t>() < 0))
      throw Error(ErrorCode::schema, "seed must be a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("verbosity")) cfg.verbosity = get_int(j.at("verbosity"), "verbosity");
  return cfg;
}

void cmd_simulate(const PipelineConfig& cfg) {
  json sj;
  if (!cfg.paths.scenario.empty())
    sj = parse_json_file(cfg.paths.scenario);
  else if (cfg.scenario)
    sj = *cfg.scenario;
  else
    throw Error(ErrorCode::invalid_argument, "simulate needs a scenario (paths.scenario or scenario)");
  SimScenario s = scenario_from_json(sj);
  if (cfg.seed)
    s.seed = *cfg.seed;
  else if (!sj.contains("seed"))
    s.seed = entropy_seed();
  if (cfg.evaluate.reps > 0) s.replications = cfg.evaluate.reps;
  if (cfg.evaluate.zero_time_intensity) s.zero_time_intensity = true;

  const fs::path out = cfg.paths.out;
  std::vector<std::string> persons, items;
  for (int i = 1; i <= s.persons; ++i) persons.push_back("p" + std::to_string(i));
  for (int j = 1; j <= s.items; ++j) items.push_back("item" + std::to_string(j));
  write_text_file(out / "scenario.json", dump(scenario_to_json(s)));
  for (int rep = 1; rep <= s.replications; ++rep) {
    const auto data = generate(s, rep);
    const fs::path dir = out / ("rep_" + std::to_string(rep));
    write_text_file(dir / "Y.csv", ratings_to_csv({persons, items, data.ratings}));
    write_text_file(dir / "R.csv", times_to_csv(data.times, persons, items));
    write_text_file(dir / "truth.json", dump(truth_to_json(data.truth)));
    log(cfg, "simulate: wrote " + dir.string());
  }
}

void cmd_fit(const PipelineConfig& cfg) {
  if (cfg.paths.data.empty()) throw Error(ErrorCode::invalid_argument, "fit needs paths.data");
  if (cfg.paths.tree.empty()) throw Error(ErrorCode::invalid_argument, "fit needs paths.tree");
  const TreeSpec tree = load_tree(cfg.paths.tree);
  const RatingsData data = read_ratings_csv(cfg.paths.data);
  check_ratings_against_tree(data, tree);
  const ModelSpec spec = load_model(cfg, tree.nodes());
  const auto expansion = expand(data.ratings, tree);
  const FitResult result = fit(expansion, spec, cfg.fit);
  const fs::path path = fs::path(cfg.paths.out) / "fit.json";
  write_text_file(path, dump(fit_to_json(result, tree, data)));
  log(cfg, "fit: loglik " + format_number(result.loglik) + ", AIC " + format_number(result.aic));
  for (const auto& w : result.warnings) log(cfg, "fit: warning: " + w);
  if (!result.converged())
    throw Error(ErrorCode::no_convergence, "optimizer stopped without convergence (" +
                                               to_string(result.convergence.status) + "); results in " +
                                               path.string());
}

std::string fuzzy_table(const StoredFit& stored, const TreeSpec& tree, const RatingsData& data,
                        const PipelineConfig::Fuzzify& opts, std::string* curves) {
  const FitResult& f = stored.fit;
  if (tree.categories() != stored.categories)
    throw Error(ErrorCode::schema, "tree and fit disagree on the number of categories");
  if (data.ratings.persons != f.persons || data.ratings.items != f.items)
    throw Error(ErrorCode::schema, "ratings and fit disagree on the number of persons or items");
  if (data.person_ids != stored.person_ids || data.item_names != stored.item_names)
    throw Error(ErrorCode::schema, "ratings and fit disagree on person ids or item names");

  const int m = tree.categories();
  const bool raw = opts.domain == Domain::raw;
  auto to_domain = [&](double y) { return raw ? y : (y - 1.0) / (m - 1); };

  std::string out =
      "person,item,observed,shape,c_raw,v_raw,s,c01,a,b,y_l,y_u,tri_source,cardinality,centroid,support_length\n";
  if (curves) *curves = "person,item,u,y,membership\n";
  for (int i = 0; i < f.persons; ++i) {
    for (int j = 0; j < f.items; ++j) {
      const int observed = data.ratings.at(i, j);
      if (observed == RatingMatrix::kMissing) continue;
      const CategoryDistribution dist(fitted_category_probabilities(tree, f, i, j));
      const BetaFuzzyNumber beta = fuzzify(dist);

      std::optional<Triangle> tri;
      if (opts.shape == FuzzyShape::tri_moment) {
        try {
          tri = Triangle{to_triangular_moments(beta), "moments"};
        } catch (const Error& e) {
          if (e.code() != ErrorCode::negative_discriminant) throw;
          tri = Triangle{to_triangular_quantile(dist, opts.tau), "quantile"};
        }
      } else if (opts.shape == FuzzyShape::tri_quantile) {
        tri = Triangle{to_triangular_quantile(dist, opts.tau), "quantile"};
      }

      double card, cent, supp;
      if (tri) {
        const auto& t = tri->t;
        const double scale = raw ? 1.0 : 1.0 / (m - 1);
        card = 0.5 * (t.y_u - t.y_l) * scale;
        cent = to_domain((t.y_l + t.c + t.y_u) / 3.0);
        supp = support_length(t, m, opts.domain);
      } else {
        card = cardinality(beta, opts.domain);
        cent = centroid(beta, opts.domain);
        supp = support_length(beta, opts.domain, opts.kappa);
      }

      const std::string& pid = stored.person_ids[static_cast<size_t>(i)];
      const std::string& iname = stored.item_names[static_cast<size_t>(j)];
      out += csv_field(pid) + ',' + csv_field(iname) + ',' + std::to_string(observed) + ',' +
             to_string(opts.shape) + ',' + format_number(beta.c_raw()) + ',' + format_number(beta.v_raw()) + ',' +
             format_number(beta.s()) + ',' + format_number(beta.c01()) + ',' + format_number(beta.a()) + ',' +
             format_number(beta.b()) + ',' + format_number(tri ? tri->t.y_l : kNaN) + ',' +
             format_number(tri ? tri->t.y_u : kNaN) + ',' + (tri ? tri->source : "NA") + ',' +
             format_number(card) + ',' + format_number(cent) + ',' + format_number(supp) + '\n';

      if (curves) {
        for (int k = 0; k < kCurvePoints; ++k) {
          const double u = static_cast<double>(k) / (kCurvePoints - 1);
          const double y = 1.0 + (m - 1) * u;
          const double mu = tri ? membership(tri->t, y) : beta.membership01(u);
          *curves += csv_field(pid) + ',' + csv_field(iname) + ',' + format_number(u) + ',' + format_number(y) +
                     ',' + format_number(mu) + '\n';
        }
      }
    }
  }
  return out;
}

void cmd_fuzzify(const PipelineConfig& cfg) {
  if (cfg.paths.data.empty()) throw Error(ErrorCode::invalid_argument, "fuzzify needs paths.data (the ratings)");
  const fs::path out = cfg.paths.out;
  const std::string fit_path = cfg.paths.fit.empty() ? (out / "fit.json").string() : cfg.paths.fit;
  const json fj = parse_json_file(fit_path);
  const StoredFit stored = fit_from_json(fj);
  const TreeSpec stored_tree = tree_from_json(fj.at("tree"));
  if (!cfg.paths.tree.empty() && !(load_tree(cfg.paths.tree) == stored_tree))
    throw Error(ErrorCode::schema, "paths.tree differs from the tree stored in " + fit_path);
  const RatingsData data = read_ratings_csv(cfg.paths.data);
  check_ratings_against_tree(data, stored_tree);

  std::string curves;
  const std::string table = fuzzy_table(stored, stored_tree, data, cfg.fuzzify, cfg.fuzzify.curves ? &curves : nullptr);
  write_text_file(out / "fuzzy.csv", table);
  if (cfg.fuzzify.curves) write_text_file(out / "curves.csv", curves);
  log(cfg, "fuzzify: wrote " + (out / "fuzzy.csv").string());
}

double quantile7(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return kNaN;
  const double h = (sorted.size() - 1) * p;
  const auto lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

std::string summary_table(std::string_view fuzzy_csv, const std::string& origin) {
  auto rows = parse_csv(fuzzy_csv);
  while (!rows.empty() && rows.back().size() == 1 && rows.back()[0].empty()) rows.pop_back();
  if (rows.empty()) throw Error(ErrorCode::empty_input, origin + ": no header row");
  const auto& header = rows[0];
  const std::vector<std::string> wanted = {"c_raw", "s", "cardinality", "centroid", "support_length"};
  auto find = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::schema, origin + ": missing column '" + name + "'");
    return static_cast<size_t>(it - header.begin());
  };
  const size_t person_col = find("person");
  std::vector<size_t> cols;
  for (const auto& w : wanted) cols.push_back(find(w));
  if (rows.size() < 2) throw Error(ErrorCode::empty_input, origin + ": no fuzzy numbers to summarize");

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::vector<double>>> by_person;
  std::vector<std::vector<double>> all;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw Error(ErrorCode::schema, origin + " line " + std::to_string(r + 1) + ": wrong number of fields");
    std::vector<double> v;
    for (size_t c : cols) {
      if (row[c] == "NA" || row[c].empty()) {
        v.push_back(kNaN);
        continue;
      }
      char* end = nullptr;
      const double x = std::strtod(row[c].c_str(), &end);
      if (end == row[c].c_str() || *end != '\0')
        throw Error(ErrorCode::schema, origin + " line " + std::to_string(r + 1) + ": '" + row[c] + "' is not a number");
      v.push_back(x);
    }
    const std::string& pid = row[person_col];
    if (!by_person.count(pid)) order.push_back(pid);
    by_person[pid].push_back(v);
    all.push_back(std::move(v));
  }

  std::string out = "scope,person,statistic,n,mode,precision,cardinality,centroid,support_length\n";
  for (const auto& pid : order) {
    const auto& prow = by_person[pid];
    out += "person," + csv_field(pid) + ",mean," + std::to_string(prow.size());
    for (size_t k = 0; k < cols.size(); ++k) {
      const auto c = column(prow, k);
      double s = 0.0;
      for (double x : c) s += x;
      out += ',' + format_number(c.empty() ? kNaN : s / c.size());
    }
    out += '\n';
  }

  std::vector<std::vector<double>> sorted(cols.size());
  for (size_t k = 0; k < cols.size(); ++k) {
    sorted[k] = column(all, k);
    std::sort(sorted[k].begin(), sorted[k].end());
  }
  const char* stats[] = {"mean", "sd", "min", "q1", "median", "q3", "max"};
  for (const char* stat : stats) {
    out += std::string("overall,,") + stat + ',' + std::to_string(all.size());
    for (size_t k = 0; k < cols.size(); ++k) {
      const auto& c = sorted[k];
      double v = kNaN;
      if (!c.empty()) {
        const std::string s = stat;
        double mean = 0.0;
        for (double x : c) mean += x;
        mean /= c.size();
        if (s == "mean") {
          v = mean;
        } else if (s == "sd") {
          double ss = 0.0;
          for (double x : c) ss += (x - mean) * (x - mean);
          v = c.size() > 1 ? std::sqrt(ss / (c.size() - 1)) : 0.0;
        } else if (s == "min") {
          v = c.front();
        } else if (s == "q1") {
          v = quantile7(c, 0.25);
        } else if (s == "median") {
          v = quantile7(c, 0.5);
        } else if (s == "q3") {
          v = quantile7(c, 0.75);
        } else {
          v = c.back();
        }
      }
      out += ',' + format_number(v);
    }
    out += '\n';
  }
  return out;
}

void cmd_summarize(const PipelineConfig& cfg) {
  const fs::path out = cfg.paths.out;
  const std::string in = cfg.paths.fuzzy.empty() ? (out / "fuzzy.csv").string() : cfg.paths.fuzzy;
  write_text_file(out / "summary.csv", summary_table(read_text_file(in), in));
  log(cfg, "summarize: wrote " + (out / "summary.csv").string());
}

namespace {

std::string cell_key(double beta0, int j) {
  return "beta0=" + format_number(beta0) + " J=" + std::to_string(j);
}

}  // namespace

std::string auc_table_csv(const std::vector<CellResult>& cells) {
  // Columns: beta0 in order of appearance, then J ascending; rows: M, then I.
  std::vector<double> betas;
  std::set<int> js;
  std::set<std::pair<int, int>> rows;
  for (const auto& c : cells) {
    if (std::find(betas.begin(), betas.end(), c.scenario.beta0) == betas.end()) betas.push_back(c.scenario.beta0);
    js.insert(c.scenario.items);
    rows.insert({c.scenario.categories, c.scenario.persons});
  }
  std::string out = "M,I";
  for (double b : betas)
    for (int j : js) out += ',' + cell_key(b, j);
  out += '\n';
  for (const auto& [m, i] : rows) {
    out += std::to_string(m) + ',' + std::to_string(i);
    for (double b : betas) {
      for (int j : js) {
        out += ',';
        for (const auto& c : cells) {
          const auto& s = c.scenario;
          if (s.categories == m && s.persons == i && s.items == j && s.beta0 == b && c.n_ok > 0) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.3f (%.3f)", c.mean, c.sd);
            out += buf;
            break;
          }
        }
      }
    }
    out += '\n';
  }
  return out;
}

std::string auc_long_csv(const std::vector<CellResult>& cells) {
  std::string out = "M,I,J,beta0,B,n_ok,n_failed,mean_auc,sd_auc\n";
  for (const auto& c : cells) {
    const auto& s = c.scenario;
    out += std::to_string(s.categories) + ',' + std::to_string(s.persons) + ',' + std::to_string(s.items) + ',' +
           format_number(s.beta0) + ',' + std::to_string(s.replications) + ',' + std::to_string(c.n_ok) + ',' +
           std::to_string(c.n_failed) + ',' + format_number(c.mean) + ',' + format_number(c.sd) + '\n';
  }
  return out;
}

std::string auc_items_csv(const std::vector<CellResult>& cells) {
  std::string out = "M,I,J,beta0,item,mean_auc\n";
  for (const auto& c : cells) {
    const auto& s = c.scenario;
    for (size_t j = 0; j < c.item_mean.size(); ++j) {
      out += std::to_string(s.categories) + ',' + std::to_string(s.persons) + ',' + std::to_string(s.items) + ',' +
             format_number(s.beta0) + ',' + std::to_string(j + 1) + ',' + format_number(c.item_mean[j]) + '\n';
    }
  }
  return out;
}

void cmd_evaluate(const PipelineConfig& cfg) {
  if (!cfg.seed) throw Error(ErrorCode::invalid_argument, "evaluate requires a seed (--seed or config seed)");
  std::vector<json> specs = cfg.evaluate.scenarios;
  if (!cfg.paths.scenario.empty()) specs.push_back(parse_json_file(cfg.paths.scenario));
  if (cfg.scenario) specs.push_back(*cfg.scenario);
  if (specs.empty())
    throw Error(ErrorCode::invalid_argument, "evaluate needs scenarios (evaluate.grid, evaluate.scenarios or a scenario)");

  EvalOptions opts;
  opts.fit = cfg.fit;
  opts.fit.standard_errors = false;
  opts.threads = cfg.evaluate.threads;

  std::vector<CellResult> cells;
  std::string log_text;
  for (const auto& sj : specs) {
    if (cfg.evaluate.reps == 0 && !(sj.is_object() && sj.contains("B")))
      throw Error(ErrorCode::invalid_argument, "evaluate needs a replication count (--reps or scenario B)");
    SimScenario s = scenario_from_json(sj);
    s.seed = *cfg.seed;
    if (cfg.evaluate.reps > 0) s.replications = cfg.evaluate.reps;
    if (cfg.evaluate.zero_time_intensity) s.zero_time_intensity = true;
    log(cfg, "evaluate: M=" + std::to_string(s.categories) + " I=" + std::to_string(s.persons) +
                 " J=" + std::to_string(s.items) + " beta0=" + format_number(s.beta0) +
                 " B=" + std::to_string(s.replications));
    cells.push_back(run_cell(s, opts));
    const auto& c = cells.back();
    log_text += "cell M=" + std::to_string(s.categories) + " I=" + std::to_string(s.persons) +
                " J=" + std::to_string(s.items) + " beta0=" + format_number(s.beta0) + ": " +
                std::to_string(c.n_ok) + " ok, " + std::to_string(c.n_failed) + " failed\n";
    for (const auto& r : c.replications) {
      if (!r.ok) log_text += "  replication " + std::to_string(r.replication) + ": " + r.message + "\n";
    }
  }
  const fs::path out = cfg.paths.out;
  write_text_file(out / "auc_table.csv", auc_table_csv(cells));
  write_text_file(out / "auc_long.csv", auc_long_csv(cells));
  write_text_file(out / "auc_items.csv", auc_items_csv(cells));
  write_text_file(out / "evaluate.log", log_text);
}

}  // namespace fzirt
