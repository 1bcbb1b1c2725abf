#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fuzzyirt/error.hpp"
#include "fuzzyirt/model.hpp"
#include "fuzzyirt/likelihood.hpp"
#include "fuzzyirt/tree.hpp"

namespace testsupport {

// Random full binary tree with `categories` leaves: grow by splitting a random
// leaf with a fresh node, then shuffle node columns and category rows.
inline fzirt::TreeSpec random_tree(std::mt19937_64& rng, int categories) {
  const int nodes = categories - 1;
  std::vector<std::vector<std::optional<int>>> paths{std::vector<std::optional<int>>(nodes)};
  for (int n = 0; n < nodes; ++n) {
    std::uniform_int_distribution<size_t> pick(0, paths.size() - 1);
    const size_t leaf = pick(rng);
    auto left = paths[leaf];
    auto right = paths[leaf];
    left[n] = 0;
    right[n] = 1;
    paths[leaf] = left;
    paths.push_back(right);
  }
  std::vector<int> col(nodes);
  std::iota(col.begin(), col.end(), 0);
  std::shuffle(col.begin(), col.end(), rng);
  std::shuffle(paths.begin(), paths.end(), rng);
  fzirt::RawTree raw;
  raw.categories = categories;
  raw.nodes = nodes;
  for (const auto& p : paths)
    for (int n = 0; n < nodes; ++n) raw.entries.push_back(p[col[n]]);
  return fzirt::validate_tree(std::move(raw));
}

// Sum over all 2^N node outcome vectors, assigning each to the category whose
// visited entries it matches.
inline std::vector<double> brute_force_probabilities(const fzirt::TreeSpec& t, const std::vector<double>& eta,
                                                     const std::vector<double>& alpha) {
  const int n_nodes = t.nodes();
  std::vector<double> p(t.categories(), 0.0);
  for (unsigned long z = 0; z < (1UL << n_nodes); ++z) {
    double prob = 1.0;
    for (int n = 0; n < n_nodes; ++n) {
      const double pi = 1.0 / (1.0 + std::exp(-(eta[n] + alpha[n])));
      prob *= ((z >> n) & 1UL) ? pi : 1.0 - pi;
    }
    int owner = -1;
    for (int m = 0; m < t.categories(); ++m) {
      bool match = true;
      for (int n = 0; n < n_nodes && match; ++n)
        if (t.visits(m, n) && t.entry(m, n) != static_cast<int>((z >> n) & 1UL)) match = false;
      if (match) {
        owner = m;
        break;
      }
    }
    if (owner >= 0) p[owner] += prob;
  }
  return p;
}

inline fzirt::RatingMatrix random_ratings(std::mt19937_64& rng, int persons, int items, int categories,
                                          double missing_rate = 0.0) {
  fzirt::RatingMatrix r(persons, items);
  std::uniform_int_distribution<int> cat(1, categories);
  std::bernoulli_distribution miss(missing_rate);
  for (auto& v : r.values) v = miss(rng) ? 0 : cat(rng);
  return r;
}

inline double log_sum_exp(const std::vector<double>& v) {
  double top = -INFINITY;
  for (double x : v) top = std::max(top, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - top);
  return top + std::log(s);
}

inline double log_bernoulli(int z, double lin) {
  const double x = z ? lin : -lin;
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

// One-dimensional marginal log-likelihood by the trapezoid rule over
// eta in [-8 sigma, 8 sigma] (20001 points).
inline double trapezoid_loglik(const fzirt::BinaryExpansion& e, const fzirt::ModelSpec& spec,
                               const Eigen::VectorXd& alpha, double sigma) {
  const int grid = 20001;
  const double lo = -8.0, hi = 8.0, h = (hi - lo) / (grid - 1);
  std::vector<std::vector<const fzirt::BinaryRow*>> by_person(e.persons);
  for (const auto& r : e.rows) by_person[r.person].push_back(&r);
  double total = 0.0;
  std::vector<double> terms(grid);
  for (int i = 0; i < e.persons; ++i) {
    for (int k = 0; k < grid; ++k) {
      const double u = lo + k * h;
      double v = -0.5 * u * u - 0.5 * std::log(2.0 * M_PI) + std::log(h);
      if (k == 0 || k == grid - 1) v += std::log(0.5);
      for (const auto* r : by_person[i])
        v += log_bernoulli(r->z, sigma * u + alpha[fzirt::alpha_index(spec, r->item, r->node)]);
      terms[k] = v;
    }
    total += log_sum_exp(terms);
  }
  return total;
}

// Error code thrown by fn, or ok.
inline fzirt::ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const fzirt::Error& e) {
    return e.code();
  }
  return fzirt::ErrorCode::ok;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fuzzyirt_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testsupport
