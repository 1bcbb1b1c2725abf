#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace fzirt {

// Objective returns f(x) and writes the gradient when grad != nullptr.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct BfgsOptions {
  double rel_tol = 1e-8;   // relative change of f between accepted steps
  double grad_tol = 1e-4;  // Euclidean norm of the gradient
  int max_iter = 500;
  double max_step = 5.0;   // cap on the infinity norm of a trial step
  bool keep_trace = false;
};

enum class BfgsStatus { converged, max_iterations, line_search_failed };

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  int evaluations = 0;
  BfgsStatus status = BfgsStatus::max_iterations;
  std::vector<double> trace;  // f after each accepted step, starting with f(x0)
};

// Minimizes with BFGS on the inverse Hessian and a backtracking Armijo line
// search; every accepted step strictly decreases f.
BfgsResult bfgs_minimize(const Objective& objective, Eigen::VectorXd x0, const BfgsOptions& opts);

}  // namespace fzirt
