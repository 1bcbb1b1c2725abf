#pragma once

#include <vector>

namespace fzirt {

// Gauss-Hermite rule for the weight exp(-x^2). log_scaled_weight[k] stores
// log(w_k) + x_k^2, which is what adaptive quadrature needs and stays finite
// for large node counts where w_k itself underflows.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> log_scaled_weight;
};

// Cached per node count; thread-safe.
const GaussHermiteRule& gauss_hermite(int n);

}  // namespace fzirt
