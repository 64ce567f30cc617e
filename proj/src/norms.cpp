#include "qdro/norms.hpp"

#include <algorithm>
#include <cmath>

namespace qdro {

namespace {

// p-norm for finite p > 1, scaled by the max magnitude to avoid overflow.
double scaled_p_norm(std::span<const double> y, double p) {
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  if (p == 2.0) {
    double s = 0.0;
    for (double v : y) s += (v / scale) * (v / scale);
    return scale * std::sqrt(s);
  }
  double s = 0.0;
  for (double v : y) s += std::pow(std::abs(v) / scale, p);
  return scale * std::pow(s, 1.0 / p);
}

double sup_norm(std::span<const double> y) {
  double m = 0.0;
  for (double v : y) m = std::max(m, std::abs(v));
  return m;
}

double one_norm(std::span<const double> y) {
  double s = 0.0;
  for (double v : y) s += std::abs(v);
  return s;
}

double sgn(double z) { return (z > 0.0) - (z < 0.0); }

}  // namespace

double q_norm(std::span<const double> y, QExponent q) {
  switch (q.kind()) {
    case QExponent::Kind::One: return one_norm(y);
    case QExponent::Kind::Infinity: return sup_norm(y);
    case QExponent::Kind::Interior: return scaled_p_norm(y, q.value());
  }
  return 0.0;
}

double signed_power(double z, double q_star) {
  if (std::abs(z) < 1e-300) return 0.0;
  if (q_star == 2.0) return z;
  return std::pow(std::abs(z), q_star - 1.0) * sgn(z);
}

DualNormValue dual_norm(std::span<const double> y, QExponent q) {
  DualNormValue out;
  out.argmax_certificate.assign(y.size(), 0.0);
  switch (q.kind()) {
    case QExponent::Kind::One: {
      std::size_t best = 0;
      for (std::size_t j = 1; j < y.size(); ++j) {
        if (std::abs(y[j]) > std::abs(y[best])) best = j;
      }
      out.value = std::abs(y[best]);
      out.argmax_certificate[best] = sgn(y[best]);
      break;
    }
    case QExponent::Kind::Infinity: {
      out.value = one_norm(y);
      for (std::size_t j = 0; j < y.size(); ++j) out.argmax_certificate[j] = sgn(y[j]);
      break;
    }
    case QExponent::Kind::Interior: {
      out.argmax_certificate = dual_norm_gradient(y, q);
      out.value = scaled_p_norm(y, q.dual_value());
      break;
    }
  }
  return out;
}

std::vector<double> dual_norm_gradient(std::span<const double> y, QExponent q) {
  const double qs = q.dual_value();
  std::vector<double> g(y.size(), 0.0);
  const double t = scaled_p_norm(y, qs);
  if (t == 0.0) return g;
  // v_j / t^(q*-1) = sgn(y_j) |y_j / t|^(q*-1), evaluated in scaled form.
  for (std::size_t j = 0; j < y.size(); ++j) g[j] = signed_power(y[j] / t, qs);
  return g;
}

VVector v_vector(std::span<const double> x, double beta, std::span<const double> lambda,
                 QExponent q, bool require_nondegenerate, double degen_tol) {
  if (!q.is_interior()) {
    throw Error(ErrorCode::InvalidExponent, "v_vector requires q in (1, inf)");
  }
  const double qs = q.dual_value();
  std::vector<double> y(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double lam = lambda.empty() ? 0.0 : lambda[j];
    y[j] = -safe_log(x[j]) - beta + lam;
  }
  VVector out;
  out.t = scaled_p_norm(y, qs);
  if (require_nondegenerate && out.t <= degen_tol) {
    throw Error(ErrorCode::DegenerateNorm, "t = ||-log x - beta 1 + lambda||_{q*} is zero");
  }
  out.v.resize(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) out.v[j] = signed_power(y[j], qs);
  return out;
}

}  // namespace qdro
