#pragma once

#include <span>
#include <vector>

namespace fzirt {

// Probabilities for categories 1..M; validated on construction
// (non-negative, summing to one within 1e-10).
class CategoryDistribution {
 public:
  explicit CategoryDistribution(std::vector<double> p);

  int categories() const noexcept { return static_cast<int>(p_.size()); }
  double operator[](int category) const { return p_[category - 1]; }  // 1-based
  const std::vector<double>& probabilities() const noexcept { return p_; }

 private:
  std::vector<double> p_;
};

inline constexpr double kVarianceFloor = 1e-6;

// Beta fuzzy number on the rating domain [1, M]. Mode and variance live on
// the rating scale; the membership shape lives on u = (y - 1) / (M - 1) with
// a = 1 + c01 s, b = 1 + s (1 - c01), peaking at u = c01 with value one.
class BetaFuzzyNumber {
 public:
  // s = 1 / max(v_raw, kVarianceFloor).
  static BetaFuzzyNumber from_moments(double c_raw, double v_raw, int categories);
  // Direct (mode, precision) construction; s = 0 gives the flat membership.
  static BetaFuzzyNumber from_mode_precision(double c_raw, double s, int categories);

  int categories() const noexcept { return m_; }
  double c_raw() const noexcept { return c_raw_; }
  double v_raw() const noexcept { return v_raw_; }
  double s() const noexcept { return s_; }
  double c01() const noexcept { return c01_; }
  double a() const noexcept { return 1.0 + c01_ * s_; }
  double b() const noexcept { return 1.0 + s_ * (1.0 - c01_); }
  double log_normalizer() const noexcept { return log_c_; }  // log C

  // Membership at u in [0, 1].
  double membership01(double u) const;

 private:
  BetaFuzzyNumber(double c_raw, double v_raw, double s, int categories);

  int m_;
  double c_raw_;
  double v_raw_;
  double s_;
  double c01_;
  double log_c_;
};

struct TriangularFuzzyNumber {
  double y_l;
  double c;
  double y_u;
};

enum class Domain { normalized, raw };

// Mode from the category mean, precision from the inverse variance.
BetaFuzzyNumber fuzzify(const CategoryDistribution& dist);

// Throws domain_error outside [1, M].
double membership(const BetaFuzzyNumber& f, double y);
double membership(const TriangularFuzzyNumber& t, double y);

// Moment-matched triangle, returned on the rating scale and clipped to
// [1, M]. Throws negative_discriminant when no real triangle matches.
TriangularFuzzyNumber to_triangular_moments(const BetaFuzzyNumber& f);
// Same construction on the normalized scale without clipping.
TriangularFuzzyNumber to_triangular_moments01(const BetaFuzzyNumber& f);

// Bounds are the extreme categories with probability >= tau, widened to
// contain the mode. Throws all_below_threshold.
TriangularFuzzyNumber to_triangular_quantile(const CategoryDistribution& dist, double tau = 0.01);

// Integral of the membership function (composite Simpson, 2001 points over
// the numerically non-zero part of [0, 1]).
double cardinality(const BetaFuzzyNumber& f, Domain domain = Domain::normalized);

double centroid(const BetaFuzzyNumber& f, Domain domain = Domain::normalized);

// Length of {u : membership(u) > kappa}.
double support_length(const BetaFuzzyNumber& f, Domain domain = Domain::normalized,
                      double kappa = 1e-3);
double support_length(const TriangularFuzzyNumber& t, int categories,
                      Domain domain = Domain::raw);

}  // namespace fzirt
