#include "qdro/axioms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qdro/inner_adversary.hpp"

namespace qdro {

PositivityResult check_positivity(const Distribution& x, double tol) {
  PositivityResult r;
  r.argmin = static_cast<std::size_t>(std::min_element(x.vec().begin(), x.vec().end()) - x.vec().begin());
  r.min_component = x[r.argmin];
  r.pass = r.min_component > tol;
  return r;
}

SymmetryResult check_symmetry(const Distribution& p_hat, const Distribution& x, double tol) {
  SymmetryResult r;
  for (std::size_t i = 0; i < p_hat.size(); ++i) {
    for (std::size_t j = i + 1; j < p_hat.size(); ++j) {
      if (p_hat[i] != p_hat[j]) continue;
      ++r.pairs_checked;
      const double gap = std::abs(x[i] - x[j]);
      if (!r.worst || gap > r.worst->magnitude) r.worst = PairWitness{i, j, gap};
    }
  }
  r.pass = !r.worst || r.worst->magnitude <= tol;
  return r;
}

OrderResult check_order_preservation(const Distribution& p_hat, const Distribution& x, double tol) {
  OrderResult r;
  for (std::size_t a = 0; a < p_hat.size(); ++a) {
    for (std::size_t b = 0; b < p_hat.size(); ++b) {
      if (!(p_hat[a] < p_hat[b])) continue;
      ++r.pairs_checked;
      const double lead = x[a] - x[b];  // should be negative
      const auto lo = std::min(a, b);
      const auto hi = std::max(a, b);
      if (lead > tol) {
        ++r.inversions;
        if (!r.worst_inversion || lead > r.worst_inversion->magnitude) {
          r.worst_inversion = PairWitness{lo, hi, lead};
        }
      } else if (std::abs(lead) <= tol) {
        ++r.ties;
        const double gap = std::abs(lead);
        if (!r.worst_tie || gap < r.worst_tie->magnitude) r.worst_tie = PairWitness{lo, hi, gap};
      }
    }
  }
  r.pass = r.ties == 0 && r.inversions == 0;
  return r;
}

RatioResult check_ratio_preservation(const Distribution& p_hat, const Distribution& x, double tol) {
  RatioResult r;
  for (std::size_t i = 0; i < p_hat.size(); ++i) {
    for (std::size_t j = i + 1; j < p_hat.size(); ++j) {
      if (p_hat[i] == p_hat[j]) continue;
      const double quotient = (x[i] - x[j]) / (p_hat[i] - p_hat[j]);
      if (r.pairs_checked == 0) {
        r.min_quotient = r.max_quotient = quotient;
      } else {
        r.min_quotient = std::min(r.min_quotient, quotient);
        r.max_quotient = std::max(r.max_quotient, quotient);
      }
      ++r.pairs_checked;
    }
  }
  r.spread = r.max_quotient - r.min_quotient;
  r.pass = r.spread <= tol;
  return r;
}

AxiomReport check_axioms(const Distribution& p_hat, const Distribution& x, double tol) {
  if (p_hat.size() != x.size()) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
  return AxiomReport{
      .positivity = check_positivity(x, tol),
      .symmetry = check_symmetry(p_hat, x, tol),
      .order_preservation = check_order_preservation(p_hat, x, tol),
      .ratio_preservation = check_ratio_preservation(p_hat, x, tol),
      .tolerance_used = tol,
  };
}

Assumption1Result check_assumption1(const Solution& sol, double tol) {
  return Assumption1Result{.pass = sol.t > tol, .t = sol.t};
}

Assumption1Result check_assumption1(const Solution& sol, const Instance& inst, double tol) {
  Assumption1Result r = check_assumption1(sol, tol);
  const WorstCase wc = worst_case(sol.x, inst);
  r.norm_active = wc.norm_active;
  // Only the non-degenerate direction is a theorem: t > 0 forces an active ball.
  r.consistent = !r.pass || wc.norm_active;
  return r;
}

namespace {

std::string pair_text(const std::optional<PairWitness>& w) {
  if (!w) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "(%zu,%zu) %.3e", w->i + 1, w->j + 1, w->magnitude);
  return buf;
}

}  // namespace

std::string format_axiom_table(const AxiomReport& report) {
  std::ostringstream out;
  char line[160];
  auto row = [&](const char* name, bool pass, const std::string& detail) {
    std::snprintf(line, sizeof line, "%-20s %-5s %s\n", name, pass ? "pass" : "FAIL", detail.c_str());
    out << line;
  };
  std::snprintf(line, sizeof line, "%-20s %-5s %s\n", "axiom", "", "detail");
  out << line;
  char detail[96];
  std::snprintf(detail, sizeof detail, "min x = %.6f at %zu", report.positivity.min_component,
                report.positivity.argmin + 1);
  row("positivity", report.positivity.pass, detail);
  row("symmetry", report.symmetry.pass,
      "pairs " + std::to_string(report.symmetry.pairs_checked) + ", worst " + pair_text(report.symmetry.worst));
  const auto& op = report.order_preservation;
  row("order_preservation", op.pass,
      "ties " + std::to_string(op.ties) + " " + pair_text(op.worst_tie) + ", inversions " +
          std::to_string(op.inversions) + " " + pair_text(op.worst_inversion));
  // Rounding to zero drops the sign of tiny negative quotients.
  auto clean = [](double v) { return std::abs(v) < 5e-7 ? 0.0 : v; };
  std::snprintf(detail, sizeof detail, "quotients [%.6f, %.6f], spread %.3e",
                clean(report.ratio_preservation.min_quotient), clean(report.ratio_preservation.max_quotient),
                report.ratio_preservation.spread);
  row("ratio_preservation", report.ratio_preservation.pass, detail);
  std::snprintf(line, sizeof line, "tolerance %.1e\n", report.tolerance_used);
  out << line;
  return out.str();
}

}  // namespace qdro
