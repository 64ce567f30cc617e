#pragma once

#include <span>
#include <vector>

#include "qdro/core.hpp"

namespace qdro {

/// The adversary's answer for a fixed estimator x: a perturbation e with
/// p = p_hat + e in the ambiguity set, and the loss it inflicts.
struct WorstCase {
  std::vector<double> e;
  Distribution p;
  double loss = 0.0;
  bool norm_active = false;
  /// Multiplier of the norm constraint (see worst_case for its normalisation).
  double nu_estimate = 0.0;

  // Dual certificate (beta, lambda) of the inner problem and its objective
  // value. Filled by worst_case; NaN / empty for the other routes.
  double beta = 0.0;
  std::vector<double> lambda;
  double dual_bound = 0.0;
};

/// Maximizes sum_j (p_hat_j + e_j)(-log x_j) over the ambiguity set
///   { e : p_hat + e >= 0, sum e = 0, ||e||_q <= eps }.
///
/// q in (1, inf): e_j = max(-p_hat_j, kappa * sp(c_j - mu)), c = -log x, with
/// mu fixed by sum e = 0 and kappa by ||e||_q = eps (both monotone roots).
/// q in {1, inf}: the feasible set is a polytope; the maximizing vertex is
/// found greedily and the dual is minimized exactly over its breakpoints.
///
/// The returned (beta, lambda) satisfy lambda >= 0 and their dual objective
/// sum p_hat_j (c_j + lambda_j) + eps ||c - beta 1 + lambda||_{q*} equals the
/// loss up to round-off. nu_estimate is the least-squares fit of the inner
/// stationarity condition for q in (1, inf), and the dual norm of
/// c - beta 1 + lambda for q in {1, inf}.
///
/// A uniform (constant-cost) x returns e = 0.
/// Throws UnboundedLoss when some x_j <= 0 can receive mass.
WorstCase worst_case(const Distribution& x, const Instance& inst, const Tolerances& tol = {});

/// Same problem by projected gradient ascent on p with a fixed 1/L step and
/// Dykstra feasibility restoration; stops when successive losses differ by
/// less than opt_tol or after max_iterations.
WorstCase worst_case_projected_ascent(const Distribution& x, const Instance& inst,
                                      const Tolerances& tol = {}, int max_iterations = 10000);

/// Enumerates the simplex lattice with spacing grid_step (n <= 4,
/// grid_step >= 1e-3) and returns the best feasible point; p_hat itself is
/// always a candidate. Ties resolve to the lexicographically smallest point.
/// The lattice scan is parallel over the first coordinate.
WorstCase brute_force_worst_case(const Distribution& x, const Instance& inst, double grid_step);
/// Single-threaded reference for brute_force_worst_case.
WorstCase brute_force_worst_case_serial(const Distribution& x, const Instance& inst,
                                        double grid_step);

/// Euclidean projection onto the simplex (sort and threshold).
Distribution project_simplex(std::span<const double> v);
/// Euclidean projection onto { z >= 0, sum z = total }.
std::vector<double> project_scaled_simplex(std::span<const double> v, double total);

/// Euclidean projection onto { z : ||z - center||_q <= radius }. Exact for
/// q in {1, 2, inf}; for other q by bisection on the multiplier.
std::vector<double> project_qball(std::span<const double> v, std::span<const double> center,
                                  double radius, QExponent q);

/// Dykstra alternating projections onto the simplex and the ball
/// { ||p - p_hat||_q <= eps }. Throws MaxIterations if the fixed-point
/// residual does not fall below opt_tol.
Distribution dykstra_feasible_point(const Instance& inst, std::span<const double> target,
                                    const Tolerances& tol = {}, int max_iterations = 200000);

/// True when p is a simplex point within ||p - p_hat||_q <= eps + slack.
bool in_ambiguity_set(std::span<const double> p, const Instance& inst, double slack);

}  // namespace qdro
