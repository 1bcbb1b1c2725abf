#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fuzzyirt/model.hpp"
#include "fuzzyirt/tree.hpp"

namespace fzirt {

// One cell of the simulation design.
struct SimScenario {
  int persons = 150;  // I
  int items = 15;     // J
  int categories = 3; // M
  double beta0 = -20.5;
  int replications = 1;  // B
  std::uint64_t seed = 0;
  double sigma_eps = 0.5;
  bool zero_time_intensity = false;  // force beta_j = 0
};

void validate(const SimScenario& s);

struct SimTruth {
  Eigen::VectorXd eta, omega;          // per person
  Eigen::VectorXd alpha, gamma, beta;  // per item
  Eigen::MatrixXd diff;                // persons x items
};

struct GeneratedDataset {
  RatingMatrix ratings;          // categories 1..M
  Eigen::MatrixXd times;         // persons x items, > 0
  SimTruth truth;
};

// P(Y = m) proportional to exp(m (eta - alpha)), m = 1..M.
std::vector<double> pcm_probabilities(double eta, double alpha, int categories);

// Sum of squared category probabilities.
double diff(std::span<const double> p);

// Inverse-CDF draw of a category in 1..M.
int draw_category(std::span<const double> p, std::mt19937_64& rng);

// Generator seeded from (root seed, design cell, replication); independent of
// B and of the order in which replications are produced.
std::uint64_t replication_seed(const SimScenario& s, int replication);

GeneratedDataset generate(const SimScenario& s, int replication);

// Ratings drawn from the IRTree model itself with eta = L u, u ~ N(0, I),
// and the given item parameters. Used for recovery checks.
struct IrtreeTruth {
  RatingMatrix ratings;
  Eigen::MatrixXd eta;
};
IrtreeTruth simulate_irtree(const TreeSpec& tree, const ModelSpec& spec, const Eigen::VectorXd& alpha,
                            const Eigen::MatrixXd& factor, int persons, int items,
                            std::mt19937_64& rng);

}  // namespace fzirt
