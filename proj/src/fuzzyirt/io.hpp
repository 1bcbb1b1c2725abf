#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "fuzzyirt/irt_fit.hpp"
#include "fuzzyirt/model.hpp"
#include "fuzzyirt/simgen.hpp"
#include "fuzzyirt/tree.hpp"

namespace fzirt {

using json = nlohmann::json;

// %.12g; "NA" for non-finite values.
std::string format_number(double v);
// Rounds to 12 significant digits so JSON output is as stable as the CSVs.
json json_number(double v);

std::string read_text_file(const std::filesystem::path& path);
// Creates parent directories; LF line endings.
void write_text_file(const std::filesystem::path& path, std::string_view text);

// RFC 4180 style: quoted fields may hold commas, quotes ("") and newlines.
// CR before LF is dropped. Every record keeps its field count.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_field(std::string_view s);  // quotes only when needed

// Ratings: header row, first column person id, one column per item,
// categories 1..M, empty cell = missing.
struct RatingsData {
  std::vector<std::string> person_ids;
  std::vector<std::string> item_names;
  RatingMatrix ratings;
};
RatingsData parse_ratings_csv(std::string_view text, const std::string& origin);
RatingsData read_ratings_csv(const std::filesystem::path& path);
std::string ratings_to_csv(const RatingsData& data);
// Checks every value against 1..M: values above M are a schema error.
void check_ratings_against_tree(const RatingsData& data, const TreeSpec& tree);

std::string times_to_csv(const Eigen::MatrixXd& times, const std::vector<std::string>& person_ids,
                         const std::vector<std::string>& item_names);

// {"M": 3, "N": 2, "map": [[0, null], ...], "labels": {"categories": [...], "nodes": [...]}}
TreeSpec tree_from_json(const json& j);
json tree_to_json(const TreeSpec& tree);
// "builtin:NAME" or a JSON file path.
TreeSpec load_tree(const std::string& ref);

// {"traits": "common", "items": "common", "node_to_dimension": [...]}
ModelSpec model_from_json(const json& j, int nodes);
json model_to_json(const ModelSpec& spec);

// {"I", "J", "M", "beta0", "B", "seed", optional "sigma_eps", "zero_time_intensity"}
SimScenario scenario_from_json(const json& j);
json scenario_to_json(const SimScenario& s);

json truth_to_json(const SimTruth& t);

json fit_to_json(const FitResult& fit, const TreeSpec& tree, const RatingsData& data);
// Restores what fuzzification needs: model, alpha, eta, loglik, ids.
struct StoredFit {
  FitResult fit;
  std::vector<std::string> person_ids;
  std::vector<std::string> item_names;
  int categories = 0;
};
StoredFit fit_from_json(const json& j);

}  // namespace fzirt
