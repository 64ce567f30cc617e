#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "qdro/core.hpp"
#include "qdro/solver.hpp"

namespace qdro {

/// Category pair (0-based) and the size of the offending difference.
struct PairWitness {
  std::size_t i = 0;
  std::size_t j = 0;
  double magnitude = 0.0;
};

struct PositivityResult {
  bool pass = false;
  double min_component = 0.0;
  std::size_t argmin = 0;
};

struct SymmetryResult {
  bool pass = true;
  std::size_t pairs_checked = 0;
  std::optional<PairWitness> worst;  ///< largest |x_i - x_j| over p_hat_i == p_hat_j
};

/// Ties (|x_i - x_j| <= tol) and inversions (x_i > x_j + tol) are counted
/// separately over pairs with p_hat_i < p_hat_j.
struct OrderResult {
  bool pass = true;
  std::size_t pairs_checked = 0;
  std::size_t ties = 0;
  std::size_t inversions = 0;
  std::optional<PairWitness> worst_tie;
  std::optional<PairWitness> worst_inversion;
};

struct RatioResult {
  bool pass = true;
  std::size_t pairs_checked = 0;
  double min_quotient = 0.0;
  double max_quotient = 0.0;
  double spread = 0.0;
};

struct AxiomReport {
  PositivityResult positivity;
  SymmetryResult symmetry;
  OrderResult order_preservation;
  RatioResult ratio_preservation;
  double tolerance_used = 0.0;
};

PositivityResult check_positivity(const Distribution& x, double tol);
/// Pairs qualify by bitwise equality of p_hat entries.
SymmetryResult check_symmetry(const Distribution& p_hat, const Distribution& x, double tol);
OrderResult check_order_preservation(const Distribution& p_hat, const Distribution& x, double tol);
RatioResult check_ratio_preservation(const Distribution& p_hat, const Distribution& x, double tol);

AxiomReport check_axioms(const Distribution& p_hat, const Distribution& x, double tol);

struct Assumption1Result {
  bool pass = false;
  double t = 0.0;
  std::optional<bool> norm_active;  ///< adversary's view, when an instance is supplied
  /// pass agrees with norm_active (true when norm_active is unknown).
  bool consistent = true;
};

/// Passes iff sol.t > tol. With an instance, also asks the adversary whether
/// its norm constraint is active at sol.x; the two must agree.
Assumption1Result check_assumption1(const Solution& sol, double tol);
Assumption1Result check_assumption1(const Solution& sol, const Instance& inst, double tol);

/// Fixed-width text table; categories are printed 1-based.
std::string format_axiom_table(const AxiomReport& report);

}  // namespace qdro
