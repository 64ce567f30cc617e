#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qdro/core.hpp"

namespace qdro {

enum class StepPolicy { FixedBacktracking, Diminishing };
enum class SolverStatus { Converged, MaxIterations, Degenerate };

const char* to_string(SolverStatus status);
SolverStatus parse_status(const std::string& text);

struct SolverSettings {
  Tolerances tolerances;
  int max_iterations = 20000;
  /// FixedBacktracking: projected gradient with Armijo backtracking (smooth q)
  /// or the exact polyhedral path (q in {1, inf}). Diminishing: projected
  /// subgradient on the full (x, lambda, beta) problem.
  StepPolicy step_policy = StepPolicy::FixedBacktracking;
  /// Average x over categories whose p_hat entries are bitwise equal.
  bool symmetrize = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Solution {
  Distribution x;
  double beta = 0.0;
  std::vector<double> lambda;
  double objective = 0.0;
  /// ||-log x - beta 1 + lambda||_{q*}
  double t = 0.0;
  bool degenerate = false;
  int iterations = 0;
  SolverStatus status = SolverStatus::Converged;
};

/// Residuals of the stationarity and complementarity conditions of the
/// reformulated problem, plus the multipliers recovered from them.
struct KKTReport {
  std::vector<double> stationarity_x;
  std::vector<double> stationarity_lambda;
  double stationarity_beta = 0.0;
  std::vector<double> complementarity;
  double gamma = 0.0;
  std::vector<double> xi;
  double max_residual = 0.0;
  /// |gamma - 1| and ||xi - x||_inf; both vanish at a non-degenerate optimum.
  double gamma_deviation = 0.0;
  double xi_deviation = 0.0;
};

/// sum_j p_hat_j (-log x_j + lambda_j) + eps * ||-log x - beta 1 + lambda||_{q*}
double objective_full(const Distribution& x, std::span<const double> lambda, double beta,
                      const Instance& inst);
/// objective_full with lambda = 0: empirical cross-entropy plus a norm penalty
/// on the deviation of the costs -log x_j from the baseline beta.
double objective_regularized(const Distribution& x, double beta, const Instance& inst);

/// argmin over beta of ||-log x - beta 1||_{q*}: the root of sum sp(c_j - beta)
/// for q in (1, inf), the midrange for q = 1 and the median for q = inf.
double optimal_baseline(std::span<const double> x, QExponent q);

/// Evaluates a candidate (x, beta, lambda) into a Solution record.
Solution make_solution(const Distribution& x, double beta, std::vector<double> lambda,
                       const Instance& inst);

/// Solves the smoothing problem. Degenerate instances (the uniform
/// distribution lies in the ambiguity set) return x = uniform, beta = log n.
/// eps == 0 returns p_hat when it is strictly positive and throws
/// EpsilonZeroWithZeros otherwise.
Solution solve_qdro(const Instance& inst, const SolverSettings& settings = {});

/// Solves the full problem over (x, lambda >= 0, beta) starting from
/// lambda_init (zeros when empty), without fixing lambda = 0.
Solution solve_qdro_full(const Instance& inst, const SolverSettings& settings,
                         std::span<const double> lambda_init = {});

/// Requires q in (1, inf) and sol.t > degen_tol; throws DegenerateNorm otherwise.
KKTReport kkt_residuals(const Solution& sol, const Instance& inst, const Tolerances& tol = {});

/// objective_full(sol) minus the adversary's loss at sol.x. Nonnegative up to
/// round-off by weak duality; zero when (lambda, beta) are optimal for x.
double duality_gap(const Solution& sol, const Instance& inst, const Tolerances& tol = {});

/// Worst-case loss at x minus the entropy of a point of the ambiguity set
/// (x itself when feasible, else its projection). Every entropy of a feasible
/// point bounds the min-max value from below, so this bounds the
/// suboptimality of x; it is zero at the optimum.
double optimality_gap(const Distribution& x, const Instance& inst, const Tolerances& tol = {});

struct Certificate {
  std::optional<KKTReport> kkt;  ///< only for q in (1, inf) with t > degen_tol
  double duality_gap = 0.0;
  double optimality_gap = 0.0;
  bool assumption1 = false;      ///< t > degen_tol
  bool norm_active = false;      ///< adversary sits on the ball boundary
  bool passed = false;
};

Certificate certify(const Solution& sol, const Instance& inst, const Tolerances& tol = {});

/// Solves instances concurrently; results are in input order and identical to
/// solve_batch_serial.
std::vector<Solution> solve_batch(std::span<const Instance> instances,
                                  const SolverSettings& settings = {});
std::vector<Solution> solve_batch_serial(std::span<const Instance> instances,
                                         const SolverSettings& settings = {});

}  // namespace qdro
