#include "fuzzyirt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fuzzyirt/error.hpp"
#include "fuzzyirt/fuzzy.hpp"
#include "fuzzyirt/likelihood.hpp"

namespace fzirt {

namespace {

constexpr int kIrlsMaxIter = 25;
constexpr double kIrlsTol = 1e-8;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

double log1pexp(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_both_classes(std::span<const std::uint8_t> y) {
  size_t pos = 0;
  for (auto v : y) {
    if (v > 1) throw Error(ErrorCode::invalid_argument, "labels must be 0 or 1");
    pos += v;
  }
  if (pos == 0 || pos == y.size())
    throw Error(ErrorCode::degenerate_outcome, "outcome has a single class");
}

}  // namespace

std::vector<std::uint8_t> median_split(std::span<const double> times) {
  std::vector<std::uint8_t> out(times.size(), 0);
  if (times.empty()) return out;
  std::vector<double> sorted(times.begin(), times.end());
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  for (size_t k = 0; k < n; ++k) out[k] = times[k] < median ? 1 : 0;
  return out;
}

Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> median_split(const Eigen::MatrixXd& times) {
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> out(times.rows(), times.cols());
  for (Eigen::Index j = 0; j < times.cols(); ++j) {
    const Eigen::VectorXd col = times.col(j);
    const auto split = median_split(std::span<const double>(col.data(), static_cast<size_t>(col.size())));
    for (Eigen::Index i = 0; i < times.rows(); ++i) out(i, j) = split[static_cast<size_t>(i)];
  }
  return out;
}

LogisticFit logistic_fit(std::span<const double> x, std::span<const std::uint8_t> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::invalid_argument, "x and y differ in length");
  if (x.size() < 2) throw Error(ErrorCode::invalid_argument, "logistic fit needs at least 2 observations");
  for (double v : x)
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "predictor must be finite");
  require_both_classes(y);

  const size_t n = x.size();
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / n;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double sxx = 0.0;
  for (double v : x) sxx += (v - mx) * (v - mx);
  const double sx = std::sqrt(sxx / n);

  LogisticFit res;
  res.fitted.assign(n, ybar);
  double b0 = std::log(ybar / (1.0 - ybar));
  double b1 = 0.0;
  std::vector<double> z(n, 0.0);
  if (sx > 0.0 && sx > 1e-14 * std::max(1.0, std::abs(mx))) {
    for (size_t k = 0; k < n; ++k) z[k] = (x[k] - mx) / sx;
    for (int it = 0; it < kIrlsMaxIter; ++it) {
      double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
      for (size_t k = 0; k < n; ++k) {
        const double p = logistic(b0 + b1 * z[k]);
        const double w = p * (1.0 - p);
        const double r = y[k] - p;
        g0 += r;
        g1 += r * z[k];
        h00 += w;
        h01 += w * z[k];
        h11 += w * z[k] * z[k];
      }
      const double det = h00 * h11 - h01 * h01;
      res.iterations = it + 1;
      if (!(det > 1e-300)) {
        res.separated = true;
        break;
      }
      const double d0 = (h11 * g0 - h01 * g1) / det;
      const double d1 = (h00 * g1 - h01 * g0) / det;
      b0 += d0;
      b1 += d1;
      const double big = std::max(std::abs(b0), std::abs(b1));
      if (big > kLogisticClamp) {
        b0 *= kLogisticClamp / big;
        b1 *= kLogisticClamp / big;
        res.separated = true;
        break;
      }
      if (std::max(std::abs(d0), std::abs(d1)) < kIrlsTol) break;
    }
    for (size_t k = 0; k < n; ++k) res.fitted[k] = logistic(b0 + b1 * z[k]);
    res.slope = b1 / sx;
    res.intercept = b0 - b1 * mx / sx;
  } else {
    res.intercept = b0;
  }
  res.loglik = 0.0;
  for (size_t k = 0; k < n; ++k) {
    const double lp = b0 + b1 * z[k];
    res.loglik += y[k] * lp - log1pexp(lp);
  }
  return res;
}

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::invalid_argument, "scores and labels differ in length");
  for (double s : scores)
    if (std::isnan(s)) throw Error(ErrorCode::invalid_argument, "scores contain NaN");
  require_both_classes(labels);

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Twice the Mann-Whitney count: 2 per concordant pair, 1 per tie.
  std::int64_t twice = 0, neg_below = 0, pos_total = 0;
  for (size_t start = 0; start < order.size();) {
    size_t end = start;
    std::int64_t pos = 0, neg = 0;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) {
      (labels[order[end]] ? pos : neg) += 1;
      ++end;
    }
    twice += 2 * pos * neg_below + pos * neg;
    neg_below += neg;
    pos_total += pos;
    start = end;
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(pos_total) * static_cast<double>(neg_below));
}

ReplicationResult evaluate_replication(const SimScenario& s, int replication, const FitOptions& fit_options) {
  ReplicationResult out;
  out.replication = replication;
  try {
    const auto data = generate(s, replication);
    const TreeSpec tree = linear_tree(s.categories);
    const ModelSpec spec = make_model_spec(TraitStructure::common, ItemStructure::common, tree.nodes());
    const auto expansion = expand(data.ratings, tree);
    const FitResult fitted = fit(expansion, spec, fit_options);
    if (!fitted.converged()) {
      out.message = "fit did not converge (" + to_string(fitted.convergence.status) + ")";
      return out;
    }

    const int n_i = s.persons, n_j = s.items;
    const auto fast = median_split(data.times);
    out.item_auc.assign(n_j, kNaN);
    std::vector<double> precision(n_i);
    std::vector<std::uint8_t> labels(n_i);
    double total = 0.0;
    int used = 0;
    for (int j = 0; j < n_j; ++j) {
      for (int i = 0; i < n_i; ++i) {
        const CategoryDistribution dist(fitted_category_probabilities(tree, fitted, i, j));
        precision[i] = fuzzify(dist).s();
        labels[i] = fast(i, j);
      }
      try {
        const auto lf = logistic_fit(precision, labels);
        out.item_auc[j] = auc(lf.fitted, labels);
        total += out.item_auc[j];
        ++used;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::degenerate_outcome) throw;
        ++out.degenerate_items;
      }
    }
    if (used == 0) {
      out.message = "every item had a single-class outcome";
      return out;
    }
    out.auc_avg = total / used;
    out.ok = true;
  } catch (const Error& e) {
    out.message = std::string(error_code_name(e.code())) + ": " + e.what();
  }
  return out;
}

CellResult run_cell(const SimScenario& s, const EvalOptions& opts) {
  validate(s);
  CellResult cell;
  cell.scenario = s;
  cell.replications.resize(s.replications);
  FitOptions fit_options = opts.fit;
  fit_options.threads = 1;
  parallel_blocks(s.replications, 1, opts.threads, [&](int begin, int end, int) {
    for (int r = begin; r < end; ++r) cell.replications[r] = evaluate_replication(s, r + 1, fit_options);
  });

  std::vector<double> item_sum(s.items, 0.0);
  std::vector<int> item_n(s.items, 0);
  double sum = 0.0;
  for (const auto& r : cell.replications) {
    if (!r.ok) {
      ++cell.n_failed;
      continue;
    }
    ++cell.n_ok;
    sum += r.auc_avg;
    for (int j = 0; j < s.items; ++j) {
      if (std::isnan(r.item_auc[j])) continue;
      item_sum[j] += r.item_auc[j];
      ++item_n[j];
    }
  }
  cell.mean = cell.n_ok > 0 ? sum / cell.n_ok : kNaN;
  double ss = 0.0;
  for (const auto& r : cell.replications)
    if (r.ok) ss += (r.auc_avg - cell.mean) * (r.auc_avg - cell.mean);
  cell.sd = cell.n_ok > 1 ? std::sqrt(ss / (cell.n_ok - 1)) : (cell.n_ok == 1 ? 0.0 : kNaN);
  cell.item_mean.resize(s.items);
  for (int j = 0; j < s.items; ++j) cell.item_mean[j] = item_n[j] > 0 ? item_sum[j] / item_n[j] : kNaN;
  return cell;
}

}  // namespace fzirt
