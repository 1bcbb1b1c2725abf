#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fuzzyirt/irt_fit.hpp"
#include "fuzzyirt/simgen.hpp"

namespace fzirt {

// 1 for times strictly below the column median (fast), else 0.
std::vector<std::uint8_t> median_split(std::span<const double> times);
Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> median_split(const Eigen::MatrixXd& times);

inline constexpr double kLogisticClamp = 15.0;

struct LogisticFit {
  double intercept = 0.0;
  double slope = 0.0;
  std::vector<double> fitted;
  double loglik = 0.0;
  int iterations = 0;
  bool separated = false;
};

// Binomial GLM with logit link by IRLS. Throws degenerate_outcome when y
// holds a single class.
LogisticFit logistic_fit(std::span<const double> x, std::span<const std::uint8_t> y);

// Mann-Whitney AUC, ties counted one half. Throws degenerate_outcome.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct EvalOptions {
  FitOptions fit;
  int threads = 1;  // replications in flight
  EvalOptions() { fit.standard_errors = false; }
};

struct ReplicationResult {
  int replication = 0;
  bool ok = false;
  double auc_avg = 0.0;
  std::vector<double> item_auc;  // NaN where the item was degenerate
  int degenerate_items = 0;
  std::string message;  // failure reason
};

// generate -> linear tree fit (common trait, common item parameters) ->
// precision of every cell -> per item split, logistic fit and AUC.
ReplicationResult evaluate_replication(const SimScenario& s, int replication,
                                       const FitOptions& fit_options);

struct CellResult {
  SimScenario scenario;
  double mean = 0.0;
  double sd = 0.0;
  int n_ok = 0;
  int n_failed = 0;
  std::vector<double> item_mean;  // per item over successful replications
  std::vector<ReplicationResult> replications;  // index r holds replication r + 1
};

CellResult run_cell(const SimScenario& s, const EvalOptions& opts = {});

}  // namespace fzirt
