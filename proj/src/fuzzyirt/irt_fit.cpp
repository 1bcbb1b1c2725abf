#include "fuzzyirt/irt_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fuzzyirt/error.hpp"
#include "fuzzyirt/optimizer.hpp"

namespace fzirt {

namespace {

constexpr double kStartClamp = 3.0;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string alpha_name(const ModelSpec& spec, int a) {
  if (spec.items == ItemStructure::common) return "item " + std::to_string(a + 1);
  return "item " + std::to_string(a / spec.nodes() + 1) + " node " +
         std::to_string(a % spec.nodes() + 1);
}

FitStatus from_bfgs(BfgsStatus s) {
  switch (s) {
    case BfgsStatus::converged: return FitStatus::converged;
    case BfgsStatus::max_iterations: return FitStatus::max_iterations;
    case BfgsStatus::line_search_failed: return FitStatus::line_search_failed;
  }
  return FitStatus::max_iterations;
}

}  // namespace

std::string to_string(FitStatus s) {
  switch (s) {
    case FitStatus::converged: return "converged";
    case FitStatus::max_iterations: return "max_iterations";
    case FitStatus::line_search_failed: return "line_search_failed";
  }
  return "?";
}

double marginal_loglik(const BinaryExpansion& expansion, const ModelSpec& spec,
                       const Eigen::VectorXd& theta, const IntegrationOptions& opts) {
  if (expansion.rows.empty()) throw Error(ErrorCode::invalid_argument, "expansion is empty");
  const LikelihoodProblem problem(expansion, spec);
  const int a = problem.alpha_count();
  if (theta.size() != a + problem.psi_count())
    throw Error(ErrorCode::invalid_argument, "theta must hold alpha followed by covariance parameters");
  return problem.evaluate(theta.head(a), theta.tail(problem.psi_count()), opts, false).loglik;
}

Eigen::MatrixXd predict_eta(const BinaryExpansion& expansion, const ModelSpec& spec,
                            const Eigen::VectorXd& alpha, const Eigen::MatrixXd& factor,
                            int threads) {
  const LikelihoodProblem problem(expansion, spec);
  return problem.posterior_modes(alpha, factor, threads);
}

FitResult fit(const BinaryExpansion& expansion, const ModelSpec& spec, const FitOptions& opts) {
  if (expansion.rows.empty()) throw Error(ErrorCode::invalid_argument, "no observations to fit");
  const LikelihoodProblem problem(expansion, spec);
  const int a_count = problem.alpha_count();
  const int p_count = problem.psi_count();
  const IntegrationOptions integration{opts.quad_nodes, opts.threads};

  FitResult res;
  res.model = spec;
  res.persons = expansion.persons;
  res.items = expansion.items;
  res.alpha = Eigen::VectorXd::Zero(a_count);
  res.alpha_clamped.assign(a_count, false);

  std::vector<int> free_alpha;
  for (int a = 0; a < a_count; ++a) {
    const int ones = problem.ones()[a];
    const int zeros = problem.zeros()[a];
    if (ones + zeros == 0) {
      res.alpha_clamped[a] = true;
      res.warnings.push_back("no observations for " + alpha_name(spec, a) + "; alpha fixed at 0");
    } else if (zeros == 0 || ones == 0) {
      res.alpha_clamped[a] = true;
      res.alpha[a] = zeros == 0 ? kSeparationClamp : -kSeparationClamp;
      res.warnings.push_back("separation: all outcomes " + std::string(zeros == 0 ? "1" : "0") +
                             " for " + alpha_name(spec, a) + "; alpha clamped at " +
                             (zeros == 0 ? "+10" : "-10"));
    } else {
      res.alpha[a] = std::clamp(std::log((ones + 0.5) / (zeros + 0.5)), -kStartClamp, kStartClamp);
      free_alpha.push_back(a);
    }
  }
  const int n_free = static_cast<int>(free_alpha.size());

  Eigen::VectorXd theta0(n_free + p_count);
  for (int k = 0; k < n_free; ++k) theta0[k] = res.alpha[free_alpha[k]];
  theta0.tail(p_count).setZero();  // Sigma_eta = I

  Eigen::VectorXd alpha_work = res.alpha;
  auto unpack = [&](const Eigen::VectorXd& theta) {
    for (int k = 0; k < n_free; ++k) alpha_work[free_alpha[k]] = theta[k];
  };
  const Objective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
    unpack(theta);
    const auto value = problem.evaluate(alpha_work, theta.tail(p_count), integration, grad != nullptr);
    if (grad != nullptr) {
      grad->resize(theta.size());
      for (int k = 0; k < n_free; ++k) (*grad)[k] = -value.grad_alpha[free_alpha[k]];
      grad->tail(p_count) = -value.grad_psi;
    }
    return -value.loglik;
  };

  BfgsOptions bfgs;
  bfgs.rel_tol = opts.rel_tol;
  bfgs.grad_tol = opts.grad_tol;
  bfgs.max_iter = opts.max_iter;
  bfgs.keep_trace = opts.keep_trace;
  const BfgsResult opt = bfgs_minimize(objective, theta0, bfgs);

  unpack(opt.x);
  res.alpha = alpha_work;
  res.psi = opt.x.tail(p_count);
  res.loglik = -opt.value;
  res.convergence.status = from_bfgs(opt.status);
  res.convergence.iterations = opt.iterations;
  res.convergence.evaluations = opt.evaluations;
  res.convergence.gradient_norm = opt.gradient.norm();
  res.convergence.method = problem.dimensions() == 1 ? "aghq" : "laplace";
  res.convergence.quad_nodes = problem.dimensions() == 1 ? opts.quad_nodes : 1;
  for (double f : opt.trace) res.loglik_trace.push_back(-f);
  if (!res.converged()) {
    res.warnings.push_back("optimizer stopped without convergence (" +
                           to_string(res.convergence.status) + ")");
  }

  res.alpha_se = Eigen::VectorXd::Constant(a_count, kNaN);
  res.psi_se = Eigen::VectorXd::Constant(p_count, kNaN);
  if (opts.standard_errors) {
    const auto dim = opt.x.size();
    Eigen::MatrixXd hess(dim, dim);
    Eigen::VectorXd g_plus(dim), g_minus(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double step = 1e-5 * std::max(1.0, std::abs(opt.x[k]));
      Eigen::VectorXd x = opt.x;
      x[k] += step;
      objective(x, &g_plus);
      x[k] = opt.x[k] - step;
      objective(x, &g_minus);
      hess.col(k) = (g_plus - g_minus) / (2.0 * step);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    const bool positive = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                          (ldlt.vectorD().array() > 0.0).all();
    if (positive) {
      const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(dim, dim));
      for (int k = 0; k < n_free; ++k) res.alpha_se[free_alpha[k]] = std::sqrt(std::max(0.0, cov(k, k)));
      for (int k = 0; k < p_count; ++k)
        res.psi_se[k] = std::sqrt(std::max(0.0, cov(n_free + k, n_free + k)));
    } else {
      res.warnings.push_back("observed information is not positive definite; standard errors unavailable");
    }
  }

  const std::span<const double> psi_span(res.psi.data(), static_cast<size_t>(p_count));
  res.factor = cholesky_factor(spec, psi_span);
  res.sigma = res.factor * res.factor.transpose();
  res.eta = problem.posterior_modes(res.alpha, res.factor, opts.threads);
  res.n_params = a_count + p_count;
  res.aic = 2.0 * res.n_params - 2.0 * res.loglik;
  return res;
}

std::vector<double> fitted_category_probabilities(const TreeSpec& tree, const FitResult& fit,
                                                  int person, int item) {
  const int n_nodes = tree.nodes();
  if (fit.model.nodes() != n_nodes)
    throw Error(ErrorCode::schema, "fit and tree disagree on the number of nodes");
  std::vector<double> eta(n_nodes), alpha(n_nodes);
  for (int n = 0; n < n_nodes; ++n) {
    eta[n] = fit.eta(person, fit.model.node_to_dimension[n]);
    alpha[n] = fit.alpha[alpha_index(fit.model, item, n)];
  }
  return category_probabilities(tree, eta, alpha);
}

}  // namespace fzirt
