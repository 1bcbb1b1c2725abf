#include "fuzzyirt/optimizer.hpp"

#include <cmath>

#include "fuzzyirt/error.hpp"

namespace fzirt {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 50;

}  // namespace

BfgsResult bfgs_minimize(const Objective& objective, Eigen::VectorXd x0, const BfgsOptions& opts) {
  const auto n = x0.size();
  BfgsResult res;
  res.x = std::move(x0);
  res.gradient.resize(n);
  res.value = objective(res.x, &res.gradient);
  res.evaluations = 1;
  if (opts.keep_trace) res.trace.push_back(res.value);
  if (!std::isfinite(res.value))
    throw Error(ErrorCode::nonfinite_likelihood, "objective is not finite at the starting point");
  if (res.gradient.norm() < opts.grad_tol) {
    res.status = BfgsStatus::converged;
    return res;
  }

  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  bool fresh_metric = true;
  Eigen::VectorXd trial_grad(n);
  while (res.iterations < opts.max_iter) {
    Eigen::VectorXd dir = -h_inv * res.gradient;
    double slope = res.gradient.dot(dir);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      fresh_metric = true;
      dir = -res.gradient;
      slope = -res.gradient.squaredNorm();
    }
    const double longest = dir.lpNorm<Eigen::Infinity>();
    if (longest > opts.max_step) {
      dir *= opts.max_step / longest;
      slope *= opts.max_step / longest;
    }

    double t = 1.0;
    double trial_value = 0.0;
    Eigen::VectorXd trial;
    bool accepted = false;
    for (int k = 0; k < kMaxHalvings; ++k, t *= 0.5) {
      trial = res.x + t * dir;
      try {
        trial_value = objective(trial, &trial_grad);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::nonfinite_likelihood) throw;
        trial_value = std::numeric_limits<double>::infinity();
      }
      ++res.evaluations;
      if (std::isfinite(trial_value) && trial_value <= res.value + kArmijo * t * slope &&
          trial_value < res.value) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No representable decrease left at a stationary point.
      if (res.gradient.norm() < opts.grad_tol) {
        res.status = BfgsStatus::converged;
        return res;
      }
      if (!fresh_metric) {
        h_inv.setIdentity();
        fresh_metric = true;
        continue;
      }
      res.status = BfgsStatus::line_search_failed;
      return res;
    }

    const Eigen::VectorXd s = trial - res.x;
    const Eigen::VectorXd y = trial_grad - res.gradient;
    const double rel_change = std::abs(res.value - trial_value) / std::max(1.0, std::abs(trial_value));
    res.x = trial;
    res.value = trial_value;
    res.gradient = trial_grad;
    ++res.iterations;
    if (opts.keep_trace) res.trace.push_back(res.value);

    if (rel_change < opts.rel_tol && res.gradient.norm() < opts.grad_tol) {
      res.status = BfgsStatus::converged;
      return res;
    }

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh_metric) {
        h_inv *= sy / y.squaredNorm();
        fresh_metric = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = h_inv * y;
      h_inv += ((sy + y.dot(hy)) * rho * rho) * (s * s.transpose()) -
               rho * (hy * s.transpose() + s * hy.transpose());
    }
  }
  res.status = BfgsStatus::max_iterations;
  return res;
}

}  // namespace fzirt
