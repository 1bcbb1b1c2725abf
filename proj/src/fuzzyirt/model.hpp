#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fzirt {

enum class TraitStructure { common, per_node_independent, per_node_correlated };
enum class ItemStructure { common, per_node };

// Which latent dimensions drive which nodes, and how item easiness is shared.
struct ModelSpec {
  TraitStructure traits = TraitStructure::common;
  ItemStructure items = ItemStructure::common;
  std::vector<int> node_to_dimension;  // one 0-based dimension per node

  int nodes() const noexcept { return static_cast<int>(node_to_dimension.size()); }
  int dimensions() const;
};

// For per-node structures an empty node_to_dimension means one dimension per
// node. Dimensions must be 0..D-1 with every dimension used.
ModelSpec make_model_spec(TraitStructure traits, ItemStructure items, int nodes,
                          std::vector<int> node_to_dimension = {});

std::string to_string(TraitStructure t);
std::string to_string(ItemStructure s);
TraitStructure trait_structure_from_string(const std::string& s);
ItemStructure item_structure_from_string(const std::string& s);

int alpha_count(const ModelSpec& spec, int items);
int alpha_index(const ModelSpec& spec, int item, int node);

// Unconstrained covariance parameters: log sd for common / independent
// traits; for correlated traits the lower Cholesky factor in column-major
// order with log-transformed diagonal.
int covariance_param_count(const ModelSpec& spec);
Eigen::MatrixXd cholesky_factor(const ModelSpec& spec, std::span<const double> psi);

// Single non-zero entry of dL/dpsi_k.
struct FactorDerivative {
  int row;
  int col;
  double value;
};
FactorDerivative cholesky_derivative(const ModelSpec& spec, std::span<const double> psi, int k);

}  // namespace fzirt
