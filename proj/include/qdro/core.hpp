#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdro {

enum class ErrorCode {
  NegativeMass,
  BadSum,
  TooFewCategories,
  InvalidExponent,
  InvalidRadius,
  UnboundedLoss,
  TooLarge,
  MaxIterations,
  DegenerateNorm,
  EpsilonZeroWithZeros,
  InvalidArgument,
  IoFailure,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Numeric policy shared by every module.
struct Tolerances {
  double feas_tol = 1e-9;   ///< simplex / ball membership
  double opt_tol = 1e-8;    ///< stopping criterion for iterative methods
  double cert_tol = 1e-6;   ///< KKT residuals and duality gaps
  double degen_tol = 1e-7;  ///< t below this is the degenerate (uniform) case
  double axiom_tol = 1e-6;  ///< axiom comparisons

  /// Throws InvalidArgument unless all fields are positive and degen_tol > opt_tol.
  void validate() const;
};

/// log(max(x, 1e-300)); iterates may graze zero even though the optimum never does.
inline double safe_log(double x) { return std::log(std::max(x, 1e-300)); }

/// A point of the probability simplex. Immutable; components are exactly
/// nonnegative and sum to one within feas_tol.
class Distribution {
public:
  /// Enforces simplex membership: components >= -feas_tol, |sum - 1| <= feas_tol,
  /// n >= 2. Negative dust is clamped to zero and the vector renormalized.
  static Distribution validate(std::span<const double> v, double feas_tol = 1e-9);

  /// Clamps negatives to zero and renormalizes without range checks. For
  /// iterates that are simplex points up to round-off.
  static Distribution normalized(std::vector<double> v);

  static Distribution uniform(std::size_t n);

  std::span<const double> probs() const noexcept { return probs_; }
  const std::vector<double>& vec() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t j) const { return probs_[j]; }
  double min() const;

  bool operator==(const Distribution&) const = default;

private:
  explicit Distribution(std::vector<double> v) : probs_(std::move(v)) {}
  std::vector<double> probs_;
};

inline Distribution validate_distribution(std::span<const double> v, double feas_tol = 1e-9) {
  return Distribution::validate(v, feas_tol);
}

/// Exponent q in [1, inf] paired with its dual q* (1/q + 1/q* = 1).
/// Infinity is a tag, never a large float.
class QExponent {
public:
  enum class Kind { One, Interior, Infinity };

  /// Rejects q < 1 and non-finite q; q == 1 maps to Kind::One.
  static QExponent finite(double q);
  static QExponent infinity() { return QExponent(Kind::Infinity, 0.0, 1.0); }
  /// Parses a decimal number or the literal "inf".
  static QExponent parse(const std::string& text);

  Kind kind() const noexcept { return kind_; }
  bool is_one() const noexcept { return kind_ == Kind::One; }
  bool is_infinity() const noexcept { return kind_ == Kind::Infinity; }
  bool is_interior() const noexcept { return kind_ == Kind::Interior; }
  /// True for q in {1, inf}: polyhedral ball, nonsmooth dual norm.
  bool is_boundary() const noexcept { return kind_ != Kind::Interior; }

  /// q as a double; +infinity for the tagged case (display only).
  double value() const noexcept;
  /// q* as a double; +infinity when q == 1.
  double dual_value() const noexcept;
  QExponent dual() const;

  std::string to_string() const;

  bool operator==(const QExponent& o) const noexcept { return kind_ == o.kind_ && q_ == o.q_; }

private:
  QExponent(Kind k, double q, double q_dual) : kind_(k), q_(q), q_dual_(q_dual) {}
  Kind kind_;
  // Both meaningful only for Kind::Interior. Storing the pair keeps dual() an
  // exact involution.
  double q_;
  double q_dual_;
};

/// One smoothing problem: empirical distribution, robustness radius, exponent.
/// epsilon == 0 is accepted and means passthrough.
struct Instance {
  Distribution p_hat;
  double epsilon;
  QExponent q;

  Instance(Distribution p_hat, double epsilon, QExponent q);
  std::size_t size() const noexcept { return p_hat.size(); }
};

/// Sum over p_j > 0 of p_j * (-log x_j); +inf when such an x_j is zero.
double cross_entropy(std::span<const double> p, std::span<const double> x);
inline double cross_entropy(const Distribution& p, const Distribution& x) {
  return cross_entropy(p.probs(), x.probs());
}

/// Shannon entropy with 0 log 0 = 0.
double entropy(std::span<const double> p);

}  // namespace qdro
