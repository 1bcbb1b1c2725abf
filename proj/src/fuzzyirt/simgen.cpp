#include "fuzzyirt/simgen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "fuzzyirt/error.hpp"

namespace fzirt {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t cell_hash(const SimScenario& s) {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(s.persons));
  h = splitmix64(h ^ static_cast<std::uint64_t>(s.items));
  h = splitmix64(h ^ static_cast<std::uint64_t>(s.categories));
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(s.beta0));
  return h;
}

}  // namespace

void validate(const SimScenario& s) {
  if (s.persons < 2 || s.items < 1)
    throw Error(ErrorCode::invalid_argument, "scenario needs I >= 2 and J >= 1");
  if (s.categories < 2) throw Error(ErrorCode::invalid_argument, "scenario needs M >= 2");
  if (s.replications < 1) throw Error(ErrorCode::invalid_argument, "scenario needs B >= 1");
  if (!std::isfinite(s.beta0)) throw Error(ErrorCode::invalid_argument, "beta0 must be finite");
  if (!std::isfinite(s.sigma_eps) || s.sigma_eps < 0.0)
    throw Error(ErrorCode::invalid_argument, "sigma_eps must be finite and non-negative");
}

std::vector<double> pcm_probabilities(double eta, double alpha, int categories) {
  if (categories < 1) throw Error(ErrorCode::invalid_argument, "M must be positive");
  const double step = eta - alpha;
  std::vector<double> p(categories);
  double top = -std::numeric_limits<double>::infinity();
  for (int m = 1; m <= categories; ++m) {
    p[m - 1] = m * step;
    top = std::max(top, p[m - 1]);
  }
  double total = 0.0;
  for (double& v : p) total += (v = std::exp(v - top));
  for (double& v : p) v /= total;
  return p;
}

double diff(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) s += v * v;
  return s;
}

int draw_category(std::span<const double> p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double cum = 0.0;
  for (size_t m = 0; m + 1 < p.size(); ++m) {
    cum += p[m];
    if (u < cum) return static_cast<int>(m) + 1;
  }
  return static_cast<int>(p.size());
}

std::uint64_t replication_seed(const SimScenario& s, int replication) {
  return splitmix64(splitmix64(s.seed ^ cell_hash(s)) + static_cast<std::uint64_t>(replication));
}

GeneratedDataset generate(const SimScenario& s, int replication) {
  validate(s);
  const int n_i = s.persons, n_j = s.items, n_m = s.categories;
  std::mt19937_64 rng(replication_seed(s, replication));
  std::normal_distribution<double> std_normal(0.0, 1.0);

  GeneratedDataset out;
  SimTruth& t = out.truth;
  t.eta.resize(n_i);
  t.omega.resize(n_i);
  t.alpha.resize(n_j);
  t.gamma.resize(n_j);
  t.beta.resize(n_j);
  t.diff.resize(n_i, n_j);

  for (int i = 0; i < n_i; ++i) t.eta[i] = std_normal(rng);
  for (int i = 0; i < n_i; ++i) t.omega[i] = std_normal(rng);
  for (int j = 0; j < n_j; ++j) t.alpha[j] = std_normal(rng);
  for (int j = 0; j < n_j; ++j) t.gamma[j] = 9.0 + std_normal(rng);

  out.ratings = RatingMatrix(n_i, n_j);
  for (int i = 0; i < n_i; ++i) {
    for (int j = 0; j < n_j; ++j) {
      const auto p = pcm_probabilities(t.eta[i], t.alpha[j], n_m);
      t.diff(i, j) = diff(p);
      out.ratings.at(i, j) = draw_category(p, rng);
    }
  }

  for (int j = 0; j < n_j; ++j) {
    const double b = s.beta0 + std_normal(rng);
    t.beta[j] = s.zero_time_intensity ? 0.0 : b;
  }

  out.times.resize(n_i, n_j);
  for (int i = 0; i < n_i; ++i) {
    for (int j = 0; j < n_j; ++j) {
      const double eps = s.sigma_eps * std_normal(rng);
      out.times(i, j) = std::exp(t.gamma[j] + t.omega[i] + t.diff(i, j) * t.beta[j] + eps);
    }
  }
  return out;
}

IrtreeTruth simulate_irtree(const TreeSpec& tree, const ModelSpec& spec, const Eigen::VectorXd& alpha,
                            const Eigen::MatrixXd& factor, int persons, int items,
                            std::mt19937_64& rng) {
  if (spec.nodes() != tree.nodes())
    throw Error(ErrorCode::invalid_argument, "model and tree disagree on the number of nodes");
  const int dims = spec.dimensions();
  if (factor.rows() != dims || factor.cols() != dims)
    throw Error(ErrorCode::invalid_argument, "factor must be D x D");
  if (alpha.size() != alpha_count(spec, items))
    throw Error(ErrorCode::invalid_argument, "alpha has the wrong length");

  std::normal_distribution<double> std_normal(0.0, 1.0);
  IrtreeTruth out;
  out.eta.resize(persons, dims);
  for (int i = 0; i < persons; ++i) {
    Eigen::VectorXd u(dims);
    for (int d = 0; d < dims; ++d) u[d] = std_normal(rng);
    out.eta.row(i) = (factor * u).transpose();
  }
  out.ratings = RatingMatrix(persons, items);
  const int n_nodes = tree.nodes();
  std::vector<double> eta_n(n_nodes), alpha_n(n_nodes);
  for (int i = 0; i < persons; ++i) {
    for (int j = 0; j < items; ++j) {
      for (int n = 0; n < n_nodes; ++n) {
        eta_n[n] = out.eta(i, spec.node_to_dimension[n]);
        alpha_n[n] = alpha[alpha_index(spec, j, n)];
      }
      out.ratings.at(i, j) = draw_category(category_probabilities(tree, eta_n, alpha_n), rng);
    }
  }
  return out;
}

}  // namespace fzirt
