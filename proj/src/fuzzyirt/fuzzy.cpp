#include "fuzzyirt/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fuzzyirt/error.hpp"

namespace fzirt {

namespace {

constexpr int kSimpsonPoints = 2001;
constexpr double kNegligibleMembership = 1e-17;

// x * log(x) with 0 log 0 = 0.
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Left and right ends of {u in [0, 1] : membership01(u) > level}. The
// membership is unimodal with its peak (value 1) at c01.
std::pair<double, double> level_set(const BetaFuzzyNumber& f, double level) {
  const double peak = f.c01();
  double lo = 0.0;
  if (f.membership01(0.0) <= level) {
    double left = 0.0, right = peak;
    for (int it = 0; it < 200 && right - left > 1e-16; ++it) {
      const double mid = 0.5 * (left + right);
      (f.membership01(mid) > level ? right : left) = mid;
    }
    lo = right;
  }
  double hi = 1.0;
  if (f.membership01(1.0) <= level) {
    double left = peak, right = 1.0;
    for (int it = 0; it < 200 && right - left > 1e-16; ++it) {
      const double mid = 0.5 * (left + right);
      (f.membership01(mid) > level ? left : right) = mid;
    }
    hi = left;
  }
  return {lo, hi};
}

double to_raw_scale(double u, int categories) { return 1.0 + (categories - 1) * u; }

}  // namespace

CategoryDistribution::CategoryDistribution(std::vector<double> p) : p_(std::move(p)) {
  if (p_.size() < 2) throw Error(ErrorCode::invalid_argument, "distribution needs at least 2 categories");
  double total = 0.0;
  for (double v : p_) {
    if (!std::isfinite(v) || v < 0.0)
      throw Error(ErrorCode::invalid_argument, "category probabilities must be finite and non-negative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw Error(ErrorCode::invalid_argument,
                "category probabilities sum to " + std::to_string(total) + ", not 1");
}

BetaFuzzyNumber::BetaFuzzyNumber(double c_raw, double v_raw, double s, int categories)
    : m_(categories), c_raw_(c_raw), v_raw_(v_raw), s_(s) {
  c01_ = (c_raw_ - 1.0) / (m_ - 1);
  log_c_ = s_ * (xlogx(c01_) + xlogx(1.0 - c01_));
}

BetaFuzzyNumber BetaFuzzyNumber::from_moments(double c_raw, double v_raw, int categories) {
  if (categories < 2) throw Error(ErrorCode::invalid_argument, "fuzzy number needs M >= 2");
  if (!std::isfinite(c_raw) || c_raw < 1.0 - 1e-12 || c_raw > categories + 1e-12)
    throw Error(ErrorCode::domain_error, "mode outside [1, M]");
  if (!std::isfinite(v_raw) || v_raw < 0.0)
    throw Error(ErrorCode::invalid_argument, "variance must be finite and non-negative");
  c_raw = std::clamp(c_raw, 1.0, static_cast<double>(categories));
  return BetaFuzzyNumber(c_raw, v_raw, 1.0 / std::max(v_raw, kVarianceFloor), categories);
}

BetaFuzzyNumber BetaFuzzyNumber::from_mode_precision(double c_raw, double s, int categories) {
  if (categories < 2) throw Error(ErrorCode::invalid_argument, "fuzzy number needs M >= 2");
  if (!std::isfinite(c_raw) || c_raw < 1.0 - 1e-12 || c_raw > categories + 1e-12)
    throw Error(ErrorCode::domain_error, "mode outside [1, M]");
  if (!std::isfinite(s) || s < 0.0)
    throw Error(ErrorCode::invalid_argument, "precision must be finite and non-negative");
  c_raw = std::clamp(c_raw, 1.0, static_cast<double>(categories));
  const double v = s > 0.0 ? 1.0 / s : std::numeric_limits<double>::infinity();
  return BetaFuzzyNumber(c_raw, v, s, categories);
}

double BetaFuzzyNumber::membership01(double u) const {
  if (u < 0.0 || u > 1.0) return 0.0;
  // log of u^(a-1) (1-u)^(b-1) / C, with 0^0 = 1.
  const double am1 = c01_ * s_;
  const double bm1 = (1.0 - c01_) * s_;
  double log_m = 0.0;
  if (am1 > 0.0) {
    if (u == 0.0) return 0.0;
    log_m += am1 * (std::log(u) - std::log(c01_));
  }
  if (bm1 > 0.0) {
    if (u == 1.0) return 0.0;
    log_m += bm1 * (std::log1p(-u) - std::log1p(-c01_));
  }
  return std::exp(std::min(0.0, log_m));
}

BetaFuzzyNumber fuzzify(const CategoryDistribution& dist) {
  const int m = dist.categories();
  double c = 0.0;
  for (int y = 1; y <= m; ++y) c += y * dist[y];
  double v = 0.0;
  for (int y = 1; y <= m; ++y) v += (y - c) * (y - c) * dist[y];
  return BetaFuzzyNumber::from_moments(c, v, m);
}

double membership(const BetaFuzzyNumber& f, double y) {
  const int m = f.categories();
  if (!(y >= 1.0 && y <= m))
    throw Error(ErrorCode::domain_error, "membership argument outside [1, " + std::to_string(m) + "]");
  return f.membership01((y - 1.0) / (m - 1));
}

double membership(const TriangularFuzzyNumber& t, double y) {
  if (y < t.y_l || y > t.y_u) return 0.0;
  if (y == t.c) return 1.0;
  if (y < t.c) return (y - t.y_l) / (t.c - t.y_l);
  return (t.y_u - y) / (t.y_u - t.c);
}

TriangularFuzzyNumber to_triangular_moments01(const BetaFuzzyNumber& f) {
  const double c = f.c01();
  const double s = f.s();
  const double mu = (1.0 + c * s) / (2.0 + s);
  // Variance consistent with the (floored) precision.
  const double scale = f.categories() - 1.0;
  const double v01 = (s > 0.0 ? 1.0 / s : f.v_raw()) / (scale * scale);
  const double disc = 3.5 * v01 - 3.0 * (c - mu) * (c - mu);
  if (!(disc >= 0.0))
    throw Error(ErrorCode::negative_discriminant,
                "moment matching has no real solution (3.5 v < 3 (c - mu)^2)");
  const double h1 = std::sqrt(disc);
  const double h2 = 0.5 * (h1 + 3.0 * c - 3.0 * mu);
  return {c - h2, c, c - h2 + h1};
}

TriangularFuzzyNumber to_triangular_moments(const BetaFuzzyNumber& f) {
  const auto t = to_triangular_moments01(f);
  const int m = f.categories();
  const double hi = static_cast<double>(m);
  TriangularFuzzyNumber out{std::clamp(to_raw_scale(t.y_l, m), 1.0, hi), f.c_raw(),
                            std::clamp(to_raw_scale(t.y_u, m), 1.0, hi)};
  out.y_l = std::min(out.y_l, out.c);
  out.y_u = std::max(out.y_u, out.c);
  return out;
}

TriangularFuzzyNumber to_triangular_quantile(const CategoryDistribution& dist, double tau) {
  if (!(tau >= 0.0 && tau < 1.0)) throw Error(ErrorCode::invalid_argument, "tau must be in [0, 1)");
  const int m = dist.categories();
  double mode = 0.0;
  for (int y = 1; y <= m; ++y) mode += y * dist[y];
  int lo = 0, hi = 0;
  for (int y = 1; y <= m; ++y) {
    if (dist[y] >= tau) {
      if (lo == 0) lo = y;
      hi = y;
    }
  }
  if (lo == 0) throw Error(ErrorCode::all_below_threshold, "no category reaches the threshold");
  return {std::min<double>(lo, mode), mode, std::max<double>(hi, mode)};
}

double cardinality(const BetaFuzzyNumber& f, Domain domain) {
  double area = 1.0;
  if (f.s() > 0.0) {
    const auto [lo, hi] = level_set(f, kNegligibleMembership);
    // Simpson in t with u = lo + (hi - lo) w(t), w(t) = t^q / (t^q + (1-t)^q).
    // The substitution flattens the u^(a-1) edge behavior when a or b is near 1.
    constexpr double q = 4.0;
    const int intervals = kSimpsonPoints - 1;
    const double h = 1.0 / intervals;
    double sum = 0.0;
    for (int k = 1; k < intervals; ++k) {
      const double t = k * h;
      const double tq = std::pow(t, q), rq = std::pow(1.0 - t, q);
      const double den = tq + rq;
      const double dw = q * std::pow(t * (1.0 - t), q - 1.0) / (den * den);
      sum += (k % 2 == 1 ? 4.0 : 2.0) * f.membership01(lo + (hi - lo) * tq / den) * dw;
    }
    area = (hi - lo) * sum * h / 3.0;
  }
  return domain == Domain::raw ? area * (f.categories() - 1) : area;
}

double centroid(const BetaFuzzyNumber& f, Domain domain) {
  const double u = (1.0 + f.s() * f.c01()) / (2.0 + f.s());
  return domain == Domain::raw ? to_raw_scale(u, f.categories()) : u;
}

double support_length(const BetaFuzzyNumber& f, Domain domain, double kappa) {
  if (!(kappa >= 0.0 && kappa < 1.0)) throw Error(ErrorCode::invalid_argument, "kappa must be in [0, 1)");
  double len = 1.0;
  if (f.s() > 0.0) {
    const auto [lo, hi] = level_set(f, kappa);
    len = hi - lo;
  }
  return domain == Domain::raw ? len * (f.categories() - 1) : len;
}

double support_length(const TriangularFuzzyNumber& t, int categories, Domain domain) {
  const double len = t.y_u - t.y_l;
  return domain == Domain::raw ? len : len / (categories - 1);
}

}  // namespace fzirt
