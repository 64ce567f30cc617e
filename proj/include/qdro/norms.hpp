#pragma once

#include <span>
#include <vector>

#include "qdro/core.hpp"

namespace qdro {

/// Value of the dual norm max{ y'u : ||u||_q <= 1 } together with a maximizer u.
/// The maximizer is also a subgradient of the dual norm at y.
struct DualNormValue {
  double value = 0.0;
  std::vector<double> argmax_certificate;
};

double q_norm(std::span<const double> y, QExponent q);

/// Dual norm of the q-norm: inf-norm for q = 1, q*-norm for q in (1, inf),
/// 1-norm for q = inf. Ties in the q = 1 branch go to the lowest index.
DualNormValue dual_norm(std::span<const double> y, QExponent q);

/// |z|^(q_star - 1) * sgn(z). Returns 0 for |z| < 1e-300.
double signed_power(double z, double q_star);

struct VVector {
  std::vector<double> v;
  double t = 0.0;
};

/// Componentwise v_j = signed_power(-log x_j - beta + lambda_j, q*) and
/// t = ||-log x - beta 1 + lambda||_{q*}. Requires q in (1, inf).
/// Throws DegenerateNorm when require_nondegenerate and t <= degen_tol.
VVector v_vector(std::span<const double> x, double beta, std::span<const double> lambda,
                 QExponent q, bool require_nondegenerate = false, double degen_tol = 1e-7);

/// Gradient of y -> ||y||_{q*} for q in (1, inf): v(y) / t^(q*-1); zero when t == 0.
std::vector<double> dual_norm_gradient(std::span<const double> y, QExponent q);

}  // namespace qdro
