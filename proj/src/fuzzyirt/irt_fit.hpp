#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fuzzyirt/likelihood.hpp"
#include "fuzzyirt/model.hpp"
#include "fuzzyirt/tree.hpp"

namespace fzirt {

struct FitOptions {
  int quad_nodes = 15;
  double rel_tol = 1e-8;
  double grad_tol = 1e-4;
  int max_iter = 500;
  int threads = 1;
  bool standard_errors = true;
  bool keep_trace = false;
};

enum class FitStatus { converged, max_iterations, line_search_failed };
std::string to_string(FitStatus s);

struct Convergence {
  FitStatus status = FitStatus::max_iterations;
  int iterations = 0;
  int evaluations = 0;
  double gradient_norm = 0.0;
  std::string method;  // "aghq" or "laplace"
  int quad_nodes = 0;
};

// Alpha values of an item x node that never changes outcome are clamped at
// this magnitude and kept out of the optimization.
inline constexpr double kSeparationClamp = 10.0;

struct FitResult {
  ModelSpec model;
  int persons = 0;
  int items = 0;

  Eigen::VectorXd alpha;     // one entry per alpha_index()
  Eigen::VectorXd alpha_se;  // NaN for clamped or unavailable
  std::vector<bool> alpha_clamped;

  Eigen::VectorXd psi;  // unconstrained covariance parameters
  Eigen::VectorXd psi_se;
  Eigen::MatrixXd factor;  // lower Cholesky factor of Sigma_eta
  Eigen::MatrixXd sigma;   // Sigma_eta

  Eigen::MatrixXd eta;  // persons x D posterior modes

  double loglik = 0.0;
  double aic = 0.0;
  int n_params = 0;
  Convergence convergence;
  std::vector<std::string> warnings;
  std::vector<double> loglik_trace;  // filled when FitOptions::keep_trace

  bool converged() const noexcept { return convergence.status == FitStatus::converged; }
};

// Convenience: log-likelihood at packed theta = [alpha..., psi...].
double marginal_loglik(const BinaryExpansion& expansion, const ModelSpec& spec,
                       const Eigen::VectorXd& theta, const IntegrationOptions& opts = {});

// Marginal maximum likelihood by BFGS over (alpha, psi), standard errors
// from a finite-difference Hessian of the analytic gradient, and
// empirical-Bayes trait predictions. Never throws for non-convergence; check
// FitResult::convergence.
FitResult fit(const BinaryExpansion& expansion, const ModelSpec& spec, const FitOptions& opts = {});

// Posterior modes of the latent traits given structural estimates.
Eigen::MatrixXd predict_eta(const BinaryExpansion& expansion, const ModelSpec& spec,
                            const Eigen::VectorXd& alpha, const Eigen::MatrixXd& factor,
                            int threads = 1);

// Category distribution for one person x item from fitted parameters.
std::vector<double> fitted_category_probabilities(const TreeSpec& tree, const FitResult& fit,
                                                  int person, int item);

}  // namespace fzirt
