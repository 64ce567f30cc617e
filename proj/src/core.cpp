#include "qdro/core.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

namespace qdro {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::BadSum: return "BadSum";
    case ErrorCode::TooFewCategories: return "TooFewCategories";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::InvalidRadius: return "InvalidRadius";
    case ErrorCode::UnboundedLoss: return "UnboundedLoss";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::DegenerateNorm: return "DegenerateNorm";
    case ErrorCode::EpsilonZeroWithZeros: return "EpsilonZeroWithZeros";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void Tolerances::validate() const {
  for (double v : {feas_tol, opt_tol, cert_tol, degen_tol, axiom_tol}) {
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
  }
  if (!(degen_tol > opt_tol)) throw Error(ErrorCode::InvalidArgument, "degen_tol must exceed opt_tol");
}

Distribution Distribution::validate(std::span<const double> v, double feas_tol) {
  if (v.size() < 2) throw Error(ErrorCode::TooFewCategories, "need at least 2 categories");
  double sum = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!std::isfinite(v[j])) throw Error(ErrorCode::NegativeMass, "non-finite component");
    if (v[j] < -feas_tol) {
      std::ostringstream msg;
      msg << "component " << j << " = " << v[j] << " is negative";
      throw Error(ErrorCode::NegativeMass, msg.str());
    }
    sum += v[j];
  }
  if (std::abs(sum - 1.0) > feas_tol) {
    std::ostringstream msg;
    msg << "components sum to " << sum;
    throw Error(ErrorCode::BadSum, msg.str());
  }
  return normalized(std::vector<double>(v.begin(), v.end()));
}

Distribution Distribution::normalized(std::vector<double> v) {
  if (v.size() < 2) throw Error(ErrorCode::TooFewCategories, "need at least 2 categories");
  double sum = 0.0;
  bool clamped = false;
  for (double& p : v) {
    if (p < 0.0) {
      p = 0.0;
      clamped = true;
    }
    sum += p;
  }
  if (!(sum > 0.0)) throw Error(ErrorCode::BadSum, "no positive mass");
  // A sum within summation round-off of one is left alone, so a second pass
  // reproduces the input bit for bit.
  const double roundoff = 4.0 * static_cast<double>(v.size()) * std::numeric_limits<double>::epsilon();
  if (clamped || std::abs(sum - 1.0) > roundoff) {
    for (double& p : v) p /= sum;
  }
  return Distribution(std::move(v));
}

Distribution Distribution::uniform(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::TooFewCategories, "need at least 2 categories");
  return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double Distribution::min() const { return *std::min_element(probs_.begin(), probs_.end()); }

QExponent QExponent::finite(double q) {
  if (!std::isfinite(q)) {
    if (q > 0) return infinity();
    throw Error(ErrorCode::InvalidExponent, "q must be a number >= 1 or inf");
  }
  if (q < 1.0) throw Error(ErrorCode::InvalidExponent, "q must be >= 1");
  if (q == 1.0) return QExponent(Kind::One, 1.0, 0.0);
  return QExponent(Kind::Interior, q, q / (q - 1.0));
}

QExponent QExponent::parse(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "INF" || text == "infinity") return infinity();
  double q = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, q);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::InvalidExponent, "cannot parse q from '" + text + "'");
  }
  return finite(q);
}

double QExponent::value() const noexcept {
  switch (kind_) {
    case Kind::One: return 1.0;
    case Kind::Infinity: return std::numeric_limits<double>::infinity();
    case Kind::Interior: return q_;
  }
  return q_;
}

double QExponent::dual_value() const noexcept {
  switch (kind_) {
    case Kind::One: return std::numeric_limits<double>::infinity();
    case Kind::Infinity: return 1.0;
    case Kind::Interior: return q_dual_;
  }
  return q_dual_;
}

QExponent QExponent::dual() const {
  switch (kind_) {
    case Kind::One: return infinity();
    case Kind::Infinity: return QExponent(Kind::One, 1.0, 0.0);
    case Kind::Interior: return QExponent(Kind::Interior, q_dual_, q_);
  }
  return *this;
}

std::string QExponent::to_string() const {
  if (is_infinity()) return "inf";
  std::ostringstream out;
  out << value();
  return out.str();
}

Instance::Instance(Distribution p, double eps, QExponent qe)
    : p_hat(std::move(p)), epsilon(eps), q(qe) {
  if (!std::isfinite(epsilon) || epsilon < 0.0) {
    throw Error(ErrorCode::InvalidRadius, "epsilon must be > 0 (or 0 for passthrough)");
  }
}

double cross_entropy(std::span<const double> p, std::span<const double> x) {
  double loss = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] <= 0.0) continue;
    if (x[j] <= 0.0) return std::numeric_limits<double>::infinity();
    loss -= p[j] * std::log(x[j]);
  }
  return loss;
}

double entropy(std::span<const double> p) { return cross_entropy(p, p); }

}  // namespace qdro
