#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fuzzyirt/eval.hpp"
#include "fuzzyirt/fuzzy.hpp"
#include "fuzzyirt/io.hpp"

namespace fzirt {

enum class FuzzyShape { beta, tri_moment, tri_quantile };
FuzzyShape fuzzy_shape_from_string(const std::string& s);
std::string to_string(FuzzyShape s);

struct PipelineConfig {
  struct Paths {
    std::string data;      // ratings CSV
    std::string tree;      // JSON path or builtin:NAME
    std::string model;     // model JSON path (optional)
    std::string fit;       // fit.json for fuzzify; default <out>/fit.json
    std::string fuzzy;     // fuzzy.csv for summarize; default <out>/fuzzy.csv
    std::string scenario;  // scenario JSON for simulate / evaluate
    std::string out = "out";
  } paths;
  std::optional<json> model;  // inline model, used when paths.model is empty

  FitOptions fit;

  struct Fuzzify {
    FuzzyShape shape = FuzzyShape::beta;
    double tau = 0.01;
    Domain domain = Domain::normalized;
    bool curves = false;
    double kappa = 1e-3;
  } fuzzify;

  std::optional<json> scenario;  // inline scenario

  struct Evaluate {
    int reps = 0;  // 0: take B from each scenario
    int threads = 1;
    std::vector<json> scenarios;
    bool zero_time_intensity = false;
  } evaluate;

  std::optional<std::uint64_t> seed;
  int verbosity = 0;
};

// Unknown keys and out-of-range values are schema errors.
PipelineConfig config_from_json(const json& j);

void cmd_simulate(const PipelineConfig& cfg);
void cmd_fit(const PipelineConfig& cfg);
void cmd_fuzzify(const PipelineConfig& cfg);
void cmd_summarize(const PipelineConfig& cfg);
void cmd_evaluate(const PipelineConfig& cfg);

// Type-7 sample quantile of ascending data.
double quantile7(const std::vector<double>& sorted, double p);

// fuzzy.csv rows for already-loaded inputs.
std::string fuzzy_table(const StoredFit& stored, const TreeSpec& tree, const RatingsData& data,
                        const PipelineConfig::Fuzzify& opts, std::string* curves);
// summary.csv from fuzzy.csv text.
std::string summary_table(std::string_view fuzzy_csv, const std::string& origin);

std::string auc_table_csv(const std::vector<CellResult>& cells);
std::string auc_long_csv(const std::vector<CellResult>& cells);
std::string auc_items_csv(const std::vector<CellResult>& cells);

}  // namespace fzirt
