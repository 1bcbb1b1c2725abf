// fuzzyirt command line: simulate / fit / fuzzify / summarize / evaluate.
// Each command builds a JSON configuration (file plus flag overrides) and
// hands it to the C API.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fuzzyirt.h"

namespace {

using json = nlohmann::json;

struct Overrides {
  std::string config;
  std::string data, tree, model, fit, fuzzy, scenario, out, shape, domain;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
  std::optional<int> reps, quad_nodes, threads;
  bool curves = false;
  int verbose = 0;
};

int report(fzirt_status st, const std::string& message) {
  std::fprintf(stderr, "error[%s]: %s\n", fzirt_status_name(st), message.c_str());
  return static_cast<int>(st);
}

void add_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "JSON configuration file");
  cmd->add_option("--data", o.data, "ratings CSV");
  cmd->add_option("--tree", o.tree, "tree JSON file or builtin:NAME");
  cmd->add_option("--model", o.model, "model JSON file");
  cmd->add_option("--fit", o.fit, "fit.json to fuzzify");
  cmd->add_option("--fuzzy", o.fuzzy, "fuzzy.csv to summarize");
  cmd->add_option("--scenario", o.scenario, "scenario JSON file");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "root random seed");
  cmd->add_option("--shape", o.shape, "beta, tri-moment or tri-quantile");
  cmd->add_option("--domain", o.domain, "normalized or raw");
  cmd->add_option("--tau", o.tau, "probability threshold for tri-quantile");
  cmd->add_option("--reps", o.reps, "replications per scenario");
  cmd->add_option("--quad-nodes", o.quad_nodes, "Gauss-Hermite nodes");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_flag("--curves", o.curves, "also write membership curves");
  cmd->add_flag("-v,--verbose", o.verbose, "progress on stderr");
}

// Returns 0 or an error status.
int build_config(const Overrides& o, json& cfg, std::string& message) {
  cfg = json::object();
  if (!o.config.empty()) {
    std::ifstream in(o.config, std::ios::binary);
    if (!in) {
      message = "cannot open config '" + o.config + "'";
      return FZIRT_E_IO;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      cfg = json::parse(ss.str());
    } catch (const json::parse_error& e) {
      message = o.config + ": " + e.what();
      return FZIRT_E_SCHEMA;
    }
    if (!cfg.is_object()) {
      message = o.config + ": configuration must be a JSON object";
      return FZIRT_E_SCHEMA;
    }
  }
  auto path = [&](const char* key, const std::string& v) {
    if (!v.empty()) cfg["paths"][key] = v;
  };
  path("data", o.data);
  path("tree", o.tree);
  path("model", o.model);
  path("fit", o.fit);
  path("fuzzy", o.fuzzy);
  path("scenario", o.scenario);
  path("out", o.out);
  if (o.seed) cfg["seed"] = *o.seed;
  if (!o.shape.empty()) cfg["fuzzify"]["shape"] = o.shape;
  if (!o.domain.empty()) cfg["fuzzify"]["domain"] = o.domain;
  if (o.tau) cfg["fuzzify"]["tau"] = *o.tau;
  if (o.curves) cfg["fuzzify"]["curves"] = true;
  if (o.reps) cfg["evaluate"]["reps"] = *o.reps;
  if (o.quad_nodes) cfg["fit"]["quad_nodes"] = *o.quad_nodes;
  if (o.threads) {
    cfg["fit"]["threads"] = *o.threads;
    cfg["evaluate"]["threads"] = *o.threads;
  }
  if (o.verbose > 0) cfg["verbosity"] = o.verbose;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy rating analysis with IRTree models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fzirt_version()));

  Overrides o;
  fzirt_status (*run)(const char*) = nullptr;
  struct Command {
    const char* name;
    const char* help;
    fzirt_status (*fn)(const char*);
  };
  const Command commands[] = {
      {"simulate", "generate ratings and response times", fzirt_cmd_simulate},
      {"fit", "fit an IRTree model to ratings", fzirt_cmd_fit},
      {"fuzzify", "turn a fit into fuzzy numbers", fzirt_cmd_fuzzify},
      {"summarize", "summarize fuzzy.csv per person and overall", fzirt_cmd_summarize},
      {"evaluate", "AUC study over simulation scenarios", fzirt_cmd_evaluate},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_flags(sub, o);
    sub->callback([&run, fn = c.fn] { run = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(FZIRT_E_INVALID_ARGUMENT, e.what());
  }

  json cfg;
  std::string message;
  if (int st = build_config(o, cfg, message); st != 0) return report(static_cast<fzirt_status>(st), message);
  const fzirt_status st = run(cfg.dump().c_str());
  if (st != FZIRT_OK) return report(st, fzirt_last_error());
  return 0;
}
