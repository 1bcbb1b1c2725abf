#include "fuzzyirt/model.hpp"

#include <algorithm>
#include <cmath>

#include "fuzzyirt/error.hpp"

namespace fzirt {

int ModelSpec::dimensions() const {
  if (node_to_dimension.empty()) return 0;
  return *std::max_element(node_to_dimension.begin(), node_to_dimension.end()) + 1;
}

ModelSpec make_model_spec(TraitStructure traits, ItemStructure items, int nodes,
                          std::vector<int> node_to_dimension) {
  if (nodes < 1) throw Error(ErrorCode::invalid_argument, "model needs at least one node");
  ModelSpec spec;
  spec.traits = traits;
  spec.items = items;
  if (traits == TraitStructure::common) {
    if (!node_to_dimension.empty() &&
        std::any_of(node_to_dimension.begin(), node_to_dimension.end(), [](int d) { return d != 0; }))
      throw Error(ErrorCode::invalid_argument, "common trait structure maps every node to dimension 0");
    spec.node_to_dimension.assign(nodes, 0);
    return spec;
  }
  if (node_to_dimension.empty()) {
    node_to_dimension.resize(nodes);
    for (int n = 0; n < nodes; ++n) node_to_dimension[n] = n;
  }
  if (static_cast<int>(node_to_dimension.size()) != nodes)
    throw Error(ErrorCode::invalid_argument, "node_to_dimension must have one entry per node");
  const int d_max = *std::max_element(node_to_dimension.begin(), node_to_dimension.end());
  std::vector<bool> used(d_max + 1, false);
  for (int d : node_to_dimension) {
    if (d < 0) throw Error(ErrorCode::invalid_argument, "negative trait dimension");
    used[d] = true;
  }
  if (std::find(used.begin(), used.end(), false) != used.end())
    throw Error(ErrorCode::invalid_argument, "trait dimensions must be numbered 0..D-1 without gaps");
  spec.node_to_dimension = std::move(node_to_dimension);
  return spec;
}

std::string to_string(TraitStructure t) {
  switch (t) {
    case TraitStructure::common: return "common";
    case TraitStructure::per_node_independent: return "per_node_independent";
    case TraitStructure::per_node_correlated: return "per_node_correlated";
  }
  return "?";
}

std::string to_string(ItemStructure s) {
  return s == ItemStructure::common ? "common" : "per_node";
}

TraitStructure trait_structure_from_string(const std::string& s) {
  if (s == "common") return TraitStructure::common;
  if (s == "per_node_independent") return TraitStructure::per_node_independent;
  if (s == "per_node_correlated") return TraitStructure::per_node_correlated;
  throw Error(ErrorCode::schema, "unknown trait_structure '" + s + "'");
}

ItemStructure item_structure_from_string(const std::string& s) {
  if (s == "common") return ItemStructure::common;
  if (s == "per_node") return ItemStructure::per_node;
  throw Error(ErrorCode::schema, "unknown item_structure '" + s + "'");
}

int alpha_count(const ModelSpec& spec, int items) {
  return spec.items == ItemStructure::common ? items : items * spec.nodes();
}

int alpha_index(const ModelSpec& spec, int item, int node) {
  return spec.items == ItemStructure::common ? item : item * spec.nodes() + node;
}

int covariance_param_count(const ModelSpec& spec) {
  const int d = spec.dimensions();
  if (spec.traits == TraitStructure::per_node_correlated) return d * (d + 1) / 2;
  return d;
}

Eigen::MatrixXd cholesky_factor(const ModelSpec& spec, std::span<const double> psi) {
  const int d = spec.dimensions();
  if (static_cast<int>(psi.size()) != covariance_param_count(spec))
    throw Error(ErrorCode::invalid_argument, "covariance parameter vector has wrong length");
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
  if (spec.traits != TraitStructure::per_node_correlated) {
    for (int k = 0; k < d; ++k) l(k, k) = std::exp(psi[k]);
    return l;
  }
  int k = 0;
  for (int c = 0; c < d; ++c) {
    for (int r = c; r < d; ++r, ++k) l(r, c) = r == c ? std::exp(psi[k]) : psi[k];
  }
  return l;
}

FactorDerivative cholesky_derivative(const ModelSpec& spec, std::span<const double> psi, int k) {
  const int d = spec.dimensions();
  if (spec.traits != TraitStructure::per_node_correlated) return {k, k, std::exp(psi[k])};
  int idx = 0;
  for (int c = 0; c < d; ++c) {
    for (int r = c; r < d; ++r, ++idx) {
      if (idx == k) return {r, c, r == c ? std::exp(psi[k]) : 1.0};
    }
  }
  throw Error(ErrorCode::invalid_argument, "covariance parameter index out of range");
}

}  // namespace fzirt
