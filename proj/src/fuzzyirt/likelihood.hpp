#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fuzzyirt/model.hpp"
#include "fuzzyirt/tree.hpp"

namespace fzirt {

struct IntegrationOptions {
  // Adaptive Gauss-Hermite nodes for one latent dimension; models with more
  // dimensions always use the Laplace approximation.
  int quad_nodes = 15;
  int threads = 1;
};

struct LikelihoodValue {
  double loglik = 0.0;
  Eigen::VectorXd grad_alpha;  // d loglik / d alpha, all alpha indices
  Eigen::VectorXd grad_psi;    // d loglik / d covariance parameters
};

// Marginal log-likelihood of an IRTree over Gaussian latent traits,
// eta_i = L u_i with u_i ~ N(0, I). Persons are processed in fixed-size
// blocks whose partial sums are reduced in block order, so results do not
// depend on the thread count.
class LikelihoodProblem {
 public:
  LikelihoodProblem(const BinaryExpansion& expansion, ModelSpec spec);

  const ModelSpec& spec() const noexcept { return spec_; }
  int persons() const noexcept { return persons_; }
  int items() const noexcept { return items_; }
  int dimensions() const noexcept { return dims_; }
  int alpha_count() const noexcept { return alpha_count_; }
  int psi_count() const noexcept { return psi_count_; }

  // Outcome counts per alpha index.
  const std::vector<int>& ones() const noexcept { return ones_; }
  const std::vector<int>& zeros() const noexcept { return zeros_; }

  LikelihoodValue evaluate(const Eigen::VectorXd& alpha, const Eigen::VectorXd& psi,
                           const IntegrationOptions& opts, bool with_gradient) const;

  // Value only, for an explicit (possibly singular) Cholesky factor.
  double loglik_with_factor(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& factor,
                            const IntegrationOptions& opts) const;

  // Posterior mode of eta_i = L u_i for every person (zero for persons
  // without observations).
  Eigen::MatrixXd posterior_modes(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& factor,
                                  int threads = 1) const;

  // log p(z_i | eta) for one person.
  double person_conditional_loglik(int person, const Eigen::VectorXd& alpha,
                                   const Eigen::VectorXd& eta) const;

 private:
  struct Row {
    int alpha;
    int dim;
    double z;
  };

  struct Accumulator;
  void person_contribution(int person, const Eigen::VectorXd& alpha, const Eigen::MatrixXd& factor,
                           const std::vector<FactorDerivative>* derivs, int quad_nodes,
                           Accumulator& acc) const;
  double mode_1d(int person, const Eigen::VectorXd& alpha, double sigma) const;
  Eigen::VectorXd mode_nd(int person, const Eigen::VectorXd& alpha,
                          const Eigen::MatrixXd& factor) const;

  ModelSpec spec_;
  int persons_ = 0;
  int items_ = 0;
  int dims_ = 0;
  int alpha_count_ = 0;
  int psi_count_ = 0;
  std::vector<Row> rows_;
  std::vector<int> offsets_;  // persons_ + 1 entries into rows_
  std::vector<int> ones_;
  std::vector<int> zeros_;
};

// Runs body(block_begin, block_end, block_index) over [0, count) in fixed
// blocks using up to `threads` workers.
void parallel_blocks(int count, int block_size, int threads,
                     const std::function<void(int, int, int)>& body);

}  // namespace fzirt
