#include "fuzzyirt/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fuzzyirt/error.hpp"

namespace fzirt {

namespace fs = std::filesystem;

namespace {

const json& require(const json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::schema, what + " lacks '" + key + "'");
  return j.at(key);
}

double get_number(const json& j, const std::string& what) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw Error(ErrorCode::schema, what + " must be a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw Error(ErrorCode::schema, what + " must be an integer");
  return j.get<int>();
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(json_number(v[k]));
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(json_number(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorCode::schema, what + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = get_number(j[k], what);
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index cols, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorCode::schema, what + " must be an array of rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols)
      throw Error(ErrorCode::schema, what + " row " + std::to_string(r + 1) + " has the wrong length");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), c) = get_number(j[r][static_cast<size_t>(c)], what);
  }
  return m;
}

std::vector<std::string> strings_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorCode::schema, what + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw Error(ErrorCode::schema, what + " must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string format_number(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "': " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::io, "error reading '" + path.string() + "'");
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::io, "cannot create directory for '" + path.string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "': " + std::strerror(errno));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw Error(ErrorCode::io, "error writing '" + path.string() + "'");
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false;
  size_t k = 0;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  while (k < text.size()) {
    const char ch = text[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"' && !field_started) {
      quoted = field_started = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\n') {
      end_row();
    } else if (ch == '\r' && k + 1 < text.size() && text[k + 1] == '\n') {
      // dropped
    } else {
      field += ch;
      field_started = true;
    }
    ++k;
  }
  if (quoted) throw Error(ErrorCode::schema, "unterminated quoted CSV field");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

RatingsData parse_ratings_csv(std::string_view text, const std::string& origin) {
  auto rows = parse_csv(text);
  // Trailing blank lines.
  while (!rows.empty() && rows.back().size() == 1 && trim(rows.back()[0]).empty()) rows.pop_back();
  if (rows.empty()) throw Error(ErrorCode::empty_input, origin + ": no header row");
  const auto& header = rows[0];
  if (header.size() < 2) throw Error(ErrorCode::schema, origin + ": header needs a person column and at least one item");
  if (rows.size() < 2) throw Error(ErrorCode::empty_input, origin + ": no data rows");

  RatingsData out;
  for (size_t c = 1; c < header.size(); ++c) out.item_names.push_back(trim(header[c]));
  const int n_items = static_cast<int>(out.item_names.size());
  const int n_persons = static_cast<int>(rows.size()) - 1;
  out.ratings = RatingMatrix(n_persons, n_items);
  for (int i = 0; i < n_persons; ++i) {
    const auto& row = rows[static_cast<size_t>(i) + 1];
    const std::string where = origin + " line " + std::to_string(i + 2);
    if (row.size() != header.size())
      throw Error(ErrorCode::schema, where + ": expected " + std::to_string(header.size()) + " fields, found " +
                                         std::to_string(row.size()));
    out.person_ids.push_back(trim(row[0]));
    for (int j = 0; j < n_items; ++j) {
      const std::string cell = trim(row[static_cast<size_t>(j) + 1]);
      if (cell.empty()) continue;
      int value = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw Error(ErrorCode::schema, where + ": '" + cell + "' in column '" + out.item_names[j] +
                                           "' is not an integer category");
      if (value < 1)
        throw Error(ErrorCode::out_of_range_category,
                    where + ": category " + cell + " in column '" + out.item_names[j] + "' is below 1");
      out.ratings.at(i, j) = value;
    }
  }
  return out;
}

RatingsData read_ratings_csv(const fs::path& path) {
  return parse_ratings_csv(read_text_file(path), path.string());
}

std::string ratings_to_csv(const RatingsData& data) {
  std::string out = "person";
  for (const auto& name : data.item_names) out += "," + csv_field(name);
  out += '\n';
  for (int i = 0; i < data.ratings.persons; ++i) {
    out += csv_field(data.person_ids[static_cast<size_t>(i)]);
    for (int j = 0; j < data.ratings.items; ++j) {
      out += ',';
      const int v = data.ratings.at(i, j);
      if (v != RatingMatrix::kMissing) out += std::to_string(v);
    }
    out += '\n';
  }
  return out;
}

void check_ratings_against_tree(const RatingsData& data, const TreeSpec& tree) {
  const int m = tree.categories();
  for (int i = 0; i < data.ratings.persons; ++i) {
    for (int j = 0; j < data.ratings.items; ++j) {
      const int v = data.ratings.at(i, j);
      if (v > m)
        throw Error(ErrorCode::schema, "person '" + data.person_ids[static_cast<size_t>(i)] + "' item '" +
                                           data.item_names[static_cast<size_t>(j)] + "' has category " +
                                           std::to_string(v) + " but the tree has M = " + std::to_string(m));
    }
  }
}

std::string times_to_csv(const Eigen::MatrixXd& times, const std::vector<std::string>& person_ids,
                         const std::vector<std::string>& item_names) {
  std::string out = "person";
  for (const auto& name : item_names) out += "," + csv_field(name);
  out += '\n';
  for (Eigen::Index i = 0; i < times.rows(); ++i) {
    out += csv_field(person_ids[static_cast<size_t>(i)]);
    for (Eigen::Index j = 0; j < times.cols(); ++j) out += "," + format_number(times(i, j));
    out += '\n';
  }
  return out;
}

TreeSpec tree_from_json(const json& j) {
  const std::string what = "tree";
  const int m = get_int(require(j, "M", what), "tree M");
  const int n = get_int(require(j, "N", what), "tree N");
  const json& map = require(j, "map", what);
  if (!map.is_array() || static_cast<int>(map.size()) != m)
    throw Error(ErrorCode::schema, "tree map must have M = " + std::to_string(m) + " rows");
  RawTree raw;
  raw.categories = m;
  raw.nodes = n;
  for (int r = 0; r < m; ++r) {
    const json& row = map[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw Error(ErrorCode::schema, "tree map row " + std::to_string(r + 1) + " must have N = " +
                                         std::to_string(n) + " entries");
    for (const auto& e : row) {
      if (e.is_null()) {
        raw.entries.emplace_back(std::nullopt);
      } else if (e.is_number_integer()) {
        raw.entries.emplace_back(e.get<int>());
      } else {
        throw Error(ErrorCode::bad_entry, "tree map row " + std::to_string(r + 1) + " holds " + e.dump() +
                                              "; entries must be 0, 1 or null");
      }
    }
  }
  if (j.contains("labels")) {
    const json& labels = j.at("labels");
    if (labels.contains("categories")) raw.labels.categories = strings_from_json(labels.at("categories"), "tree labels");
    if (labels.contains("nodes")) raw.labels.nodes = strings_from_json(labels.at("nodes"), "tree labels");
  }
  return validate_tree(std::move(raw));
}

json tree_to_json(const TreeSpec& tree) {
  json map = json::array();
  for (int m = 0; m < tree.categories(); ++m) {
    json row = json::array();
    for (int n = 0; n < tree.nodes(); ++n) {
      if (tree.visits(m, n))
        row.push_back(static_cast<int>(tree.entry(m, n)));
      else
        row.push_back(nullptr);
    }
    map.push_back(std::move(row));
  }
  json out = {{"M", tree.categories()}, {"N", tree.nodes()}, {"map", std::move(map)}};
  const auto& labels = tree.labels();
  if (!labels.categories.empty() || !labels.nodes.empty()) {
    json l = json::object();
    if (!labels.categories.empty()) l["categories"] = labels.categories;
    if (!labels.nodes.empty()) l["nodes"] = labels.nodes;
    out["labels"] = std::move(l);
  }
  return out;
}

TreeSpec load_tree(const std::string& ref) {
  constexpr std::string_view prefix = "builtin:";
  if (ref.rfind(prefix, 0) == 0) {
    const std::string name = ref.substr(prefix.size());
    auto tree = builtin_tree_by_name(name);
    if (!tree) throw Error(ErrorCode::invalid_argument, "unknown built-in tree '" + name + "'");
    return *tree;
  }
  const std::string text = read_text_file(ref);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::schema, ref + ": " + e.what());
  }
  return tree_from_json(j);
}

ModelSpec model_from_json(const json& j, int nodes) {
  if (!j.is_object()) throw Error(ErrorCode::schema, "model must be a JSON object");
  const auto traits = trait_structure_from_string(j.value("traits", std::string("common")));
  const auto items = item_structure_from_string(j.value("items", std::string("common")));
  std::vector<int> map;
  if (j.contains("node_to_dimension")) {
    const json& m = j.at("node_to_dimension");
    if (!m.is_array()) throw Error(ErrorCode::schema, "node_to_dimension must be an array");
    for (const auto& e : m) map.push_back(get_int(e, "node_to_dimension entry"));
  }
  if (traits == TraitStructure::common && !map.empty()) {
    for (int d : map)
      if (d != 0) throw Error(ErrorCode::schema, "a common-trait model maps every node to dimension 0");
    map.clear();
  }
  return make_model_spec(traits, items, nodes, std::move(map));
}

json model_to_json(const ModelSpec& spec) {
  return {{"traits", to_string(spec.traits)},
          {"items", to_string(spec.items)},
          {"node_to_dimension", spec.node_to_dimension}};
}

SimScenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::schema, "scenario must be a JSON object");
  SimScenario s;
  s.persons = get_int(require(j, "I", "scenario"), "scenario I");
  s.items = get_int(require(j, "J", "scenario"), "scenario J");
  s.categories = get_int(require(j, "M", "scenario"), "scenario M");
  s.beta0 = get_number(require(j, "beta0", "scenario"), "scenario beta0");
  if (j.contains("B")) s.replications = get_int(j.at("B"), "scenario B");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) throw Error(ErrorCode::schema, "scenario seed must be an integer");
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("sigma_eps")) s.sigma_eps = get_number(j.at("sigma_eps"), "scenario sigma_eps");
  if (j.contains("zero_time_intensity")) {
    if (!j.at("zero_time_intensity").is_boolean())
      throw Error(ErrorCode::schema, "zero_time_intensity must be a boolean");
    s.zero_time_intensity = j.at("zero_time_intensity").get<bool>();
  }
  validate(s);
  return s;
}

json scenario_to_json(const SimScenario& s) {
  json out = {{"I", s.persons}, {"J", s.items}, {"M", s.categories}, {"beta0", json_number(s.beta0)},
              {"B", s.replications}, {"seed", s.seed}, {"sigma_eps", json_number(s.sigma_eps)}};
  if (s.zero_time_intensity) out["zero_time_intensity"] = true;
  return out;
}

json truth_to_json(const SimTruth& t) {
  return {{"eta", vector_json(t.eta)},     {"omega", vector_json(t.omega)}, {"alpha", vector_json(t.alpha)},
          {"gamma", vector_json(t.gamma)}, {"beta", vector_json(t.beta)},   {"diff", matrix_json(t.diff)}};
}

json fit_to_json(const FitResult& fit, const TreeSpec& tree, const RatingsData& data) {
  json clamped = json::array();
  for (bool c : fit.alpha_clamped) clamped.push_back(c);
  json labels = json::array();
  for (int a = 0; a < fit.alpha.size(); ++a) {
    if (fit.model.items == ItemStructure::common) {
      labels.push_back(data.item_names[static_cast<size_t>(a)]);
    } else {
      const int n = fit.model.nodes();
      labels.push_back(data.item_names[static_cast<size_t>(a / n)] + ":" + tree.node_label(a % n));
    }
  }
  json eta = json::array();
  for (int i = 0; i < fit.eta.rows(); ++i) {
    json row = json::array();
    for (int d = 0; d < fit.eta.cols(); ++d) row.push_back(json_number(fit.eta(i, d)));
    eta.push_back(std::move(row));
  }
  const auto& c = fit.convergence;
  return {
      {"tree", tree_to_json(tree)},
      {"model", model_to_json(fit.model)},
      {"persons", fit.persons},
      {"items", fit.items},
      {"person_ids", data.person_ids},
      {"item_names", data.item_names},
      {"alpha_labels", std::move(labels)},
      {"alpha", vector_json(fit.alpha)},
      {"alpha_se", vector_json(fit.alpha_se)},
      {"alpha_clamped", std::move(clamped)},
      {"psi", vector_json(fit.psi)},
      {"psi_se", vector_json(fit.psi_se)},
      {"sigma", matrix_json(fit.sigma)},
      {"eta", std::move(eta)},
      {"loglik", json_number(fit.loglik)},
      {"aic", json_number(fit.aic)},
      {"n_params", fit.n_params},
      {"convergence",
       {{"status", to_string(c.status)},
        {"converged", fit.converged()},
        {"iterations", c.iterations},
        {"evaluations", c.evaluations},
        {"gradient_norm", json_number(c.gradient_norm)},
        {"method", c.method},
        {"quad_nodes", c.quad_nodes}}},
      {"warnings", fit.warnings},
  };
}

StoredFit fit_from_json(const json& j) {
  const std::string what = "fit.json";
  StoredFit out;
  const TreeSpec tree = tree_from_json(require(j, "tree", what));
  out.categories = tree.categories();
  FitResult& f = out.fit;
  f.model = model_from_json(require(j, "model", what), tree.nodes());
  f.persons = get_int(require(j, "persons", what), "fit persons");
  f.items = get_int(require(j, "items", what), "fit items");
  out.person_ids = strings_from_json(require(j, "person_ids", what), "person_ids");
  out.item_names = strings_from_json(require(j, "item_names", what), "item_names");
  f.alpha = vector_from_json(require(j, "alpha", what), "alpha");
  const int dims = f.model.dimensions();
  f.eta = matrix_from_json(require(j, "eta", what), dims, "eta");
  f.sigma = matrix_from_json(require(j, "sigma", what), dims, "sigma");
  f.loglik = get_number(require(j, "loglik", what), "loglik");
  f.aic = j.contains("aic") ? get_number(j.at("aic"), "aic") : std::numeric_limits<double>::quiet_NaN();
  if (static_cast<int>(out.person_ids.size()) != f.persons || f.eta.rows() != f.persons)
    throw Error(ErrorCode::schema, "fit.json: person count disagrees with eta / person_ids");
  if (static_cast<int>(out.item_names.size()) != f.items)
    throw Error(ErrorCode::schema, "fit.json: item count disagrees with item_names");
  if (f.alpha.size() != alpha_count(f.model, f.items))
    throw Error(ErrorCode::schema, "fit.json: alpha has the wrong length for the model");
  if (j.contains("convergence") && j.at("convergence").contains("status")) {
    const std::string st = j.at("convergence").at("status").get<std::string>();
    f.convergence.status = st == "converged"        ? FitStatus::converged
                           : st == "max_iterations" ? FitStatus::max_iterations
                                                    : FitStatus::line_search_failed;
  }
  return out;
}

}  // namespace fzirt
