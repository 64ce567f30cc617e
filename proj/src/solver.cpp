#include "qdro/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "qdro/inner_adversary.hpp"
#include "qdro/laplace.hpp"
#include "qdro/norms.hpp"

namespace qdro {

const char* to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::Converged: return "Converged";
    case SolverStatus::MaxIterations: return "MaxIterations";
    case SolverStatus::Degenerate: return "Degenerate";
  }
  return "Unknown";
}

SolverStatus parse_status(const std::string& text) {
  if (text == "Converged") return SolverStatus::Converged;
  if (text == "MaxIterations") return SolverStatus::MaxIterations;
  if (text == "Degenerate") return SolverStatus::Degenerate;
  throw Error(ErrorCode::InvalidArgument, "unknown solver status '" + text + "'");
}

void SolverSettings::validate() const {
  tolerances.validate();
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
}

namespace {

constexpr double kPositivityFloor = 1e-12;

std::vector<double> neg_log(std::span<const double> x) {
  std::vector<double> c(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) c[j] = -safe_log(x[j]);
  return c;
}

double sum_signed_powers(std::span<const double> c, double beta, double q_star) {
  double s = 0.0;
  for (double cj : c) s += signed_power(cj - beta, q_star);
  return s;
}

// Euclidean projection onto { x >= floor, sum x = 1 }.
std::vector<double> project_floored(std::span<const double> v, double floor) {
  const std::size_t n = v.size();
  std::vector<double> shifted(n);
  for (std::size_t j = 0; j < n; ++j) shifted[j] = v[j] - floor;
  std::vector<double> out = project_scaled_simplex(shifted, 1.0 - static_cast<double>(n) * floor);
  for (double& o : out) o += floor;
  return out;
}

// phi(x) = min over beta of the regularized objective, with its gradient in x.
struct ReducedPoint {
  double value = 0.0;
  double beta = 0.0;
  double t = 0.0;
  std::vector<double> grad;
};

ReducedPoint evaluate_reduced(std::span<const double> x, const Instance& inst) {
  const std::size_t n = x.size();
  const std::vector<double> c = neg_log(x);
  ReducedPoint r;
  r.beta = optimal_baseline(x, inst.q);
  std::vector<double> y(n);
  double loss = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    y[j] = c[j] - r.beta;
    loss += inst.p_hat[j] * c[j];
  }
  const DualNormValue dn = dual_norm(y, inst.q);
  r.t = dn.value;
  r.value = loss + inst.epsilon * dn.value;
  r.grad.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    r.grad[j] = -(inst.p_hat[j] + inst.epsilon * dn.argmax_certificate[j]) / x[j];
  }
  return r;
}

Solution degenerate_solution(const Instance& inst, int iterations) {
  const std::size_t n = inst.size();
  Solution sol = make_solution(Distribution::uniform(n), std::log(static_cast<double>(n)),
                               std::vector<double>(n, 0.0), inst);
  sol.degenerate = true;
  sol.iterations = iterations;
  sol.status = SolverStatus::Degenerate;
  return sol;
}

// The uniform distribution is optimal iff it belongs to the ambiguity set.
bool uniform_is_optimal(const Instance& inst) {
  const std::size_t n = inst.size();
  std::vector<double> d(n);
  for (std::size_t j = 0; j < n; ++j) d[j] = inst.p_hat[j] - 1.0 / static_cast<double>(n);
  return q_norm(d, inst.q) <= inst.epsilon;
}

Distribution symmetrized(const Distribution& x, const Distribution& p_hat) {
  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < p_hat.size(); ++j) groups[p_hat[j]].push_back(j);
  std::vector<double> out(x.vec());
  for (const auto& [value, members] : groups) {
    if (members.size() < 2) continue;
    double mean = 0.0;
    for (std::size_t j : members) mean += x[j];
    mean /= static_cast<double>(members.size());
    for (std::size_t j : members) out[j] = mean;
  }
  return Distribution::normalized(std::move(out));
}

struct NewtonResult {
  std::vector<double> x;
  double beta = 0.0;
  int iterations = 0;
};

// Damped Newton on the stationarity system with lambda = 0:
//   gamma x_j - p_hat_j - eps w_j(y) = 0,  sum_j w_j(y) = 0,  sum_j x_j = 1,
// where y = -log x - beta 1 and w is the gradient of the q*-norm at y.
std::optional<NewtonResult> newton_polish(std::span<const double> x0, double beta0,
                                          const Instance& inst, int budget) {
  const int n = static_cast<int>(x0.size());
  const double qs = inst.q.dual_value();
  const double eps = inst.epsilon;
  Eigen::VectorXd z(n + 2);
  for (int j = 0; j < n; ++j) z[j] = x0[static_cast<std::size_t>(j)];
  z[n] = beta0;
  z[n + 1] = 1.0;

  auto system = [&](const Eigen::VectorXd& zz, Eigen::VectorXd& res, Eigen::MatrixXd* jac) {
    for (int j = 0; j < n; ++j) {
      if (!(zz[j] > 0.0)) return false;
    }
    const double beta = zz[n];
    const double gamma = zz[n + 1];
    Eigen::VectorXd y(n);
    for (int j = 0; j < n; ++j) y[j] = -std::log(zz[j]) - beta;
    const double t = q_norm(std::span<const double>(y.data(), static_cast<std::size_t>(n)), inst.q.dual());
    if (!(t > 1e-300)) return false;
    Eigen::VectorXd w(n);
    for (int j = 0; j < n; ++j) w[j] = signed_power(y[j] / t, qs);

    res.resize(n + 2);
    for (int j = 0; j < n; ++j) res[j] = gamma * zz[j] - inst.p_hat[static_cast<std::size_t>(j)] - eps * w[j];
    res[n] = w.sum();
    res[n + 1] = zz.head(n).sum() - 1.0;
    if (jac == nullptr) return true;

    // dw_j/dy_k = (q*-1)/t * (delta_jk |u_j|^(q*-2) - w_j w_k),  u = y/t
    Eigen::MatrixXd h = -(w * w.transpose());
    for (int j = 0; j < n; ++j) {
      const double u = std::max(std::abs(y[j] / t), 1e-12);
      h(j, j) += std::pow(u, qs - 2.0);
    }
    h *= (qs - 1.0) / t;

    Eigen::MatrixXd& J = *jac;
    J.setZero(n + 2, n + 2);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) J(j, k) = eps * h(j, k) / zz[k];
      J(j, j) += gamma;
      J(j, n) = eps * h.row(j).sum();
      J(j, n + 1) = zz[j];
    }
    for (int k = 0; k < n; ++k) {
      J(n, k) = -h.col(k).sum() / zz[k];
      J(n + 1, k) = 1.0;
    }
    J(n, n) = -h.sum();
    return true;
  };

  Eigen::VectorXd res;
  Eigen::MatrixXd jac;
  if (!system(z, res, &jac)) return std::nullopt;
  int it = 0;
  for (; it < budget; ++it) {
    const double norm = res.lpNorm<Eigen::Infinity>();
    if (norm <= 1e-14) break;
    const Eigen::VectorXd dz = jac.fullPivLu().solve(-res);
    if (!dz.allFinite()) return std::nullopt;
    bool accepted = false;
    Eigen::VectorXd trial_res;
    for (double alpha = 1.0; alpha > 1e-12; alpha *= 0.5) {
      const Eigen::VectorXd trial = z + alpha * dz;
      if (system(trial, trial_res, nullptr) &&
          trial_res.lpNorm<Eigen::Infinity>() < (1.0 - 1e-4 * alpha) * norm) {
        z = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    system(z, res, &jac);
  }
  if (res.lpNorm<Eigen::Infinity>() > 1e-11) return std::nullopt;

  NewtonResult out;
  out.x.assign(z.data(), z.data() + n);
  out.beta = z[n];
  out.iterations = it;
  return out;
}

// Solution of sum_j clamp(tau, lo_j, hi_j) = target (increasing in tau) on
// [a, b]: bisection, then an exact step inside the final linear piece.
double solve_clamped_sum(std::span<const double> lo, std::span<const double> hi, double target,
                         double a, double b, int& iterations, int budget) {
  auto total = [&](double tau) {
    double s = 0.0;
    for (std::size_t j = 0; j < lo.size(); ++j) s += std::clamp(tau, lo[j], hi[j]);
    return s;
  };
  while (iterations < budget) {
    ++iterations;
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (total(mid) < target) {
      a = mid;
    } else {
      b = mid;
    }
  }
  double tau = 0.5 * (a + b);
  int free_count = 0;
  for (std::size_t j = 0; j < lo.size(); ++j) free_count += (lo[j] < tau && tau < hi[j]);
  if (free_count > 0) tau += (target - total(tau)) / free_count;
  return tau;
}

// Max-entropy point of the ambiguity set for q in {1, inf}. At the saddle
// point the estimator coincides with the adversary's distribution, and that
// distribution maximizes entropy over the set.
std::vector<double> max_entropy_polyhedral(const Instance& inst, int& iterations, int budget) {
  const std::size_t n = inst.size();
  const double eps = inst.epsilon;
  const auto p_hat = inst.p_hat.probs();
  std::vector<double> lo(n);
  std::vector<double> hi(n);
  std::vector<double> x(n);
  if (inst.q.is_infinity()) {
    for (std::size_t j = 0; j < n; ++j) {
      lo[j] = std::max(0.0, p_hat[j] - eps);
      hi[j] = p_hat[j] + eps;
    }
    const double level = solve_clamped_sum(lo, hi, 1.0, 0.0, 1.0, iterations, budget);
    for (std::size_t j = 0; j < n; ++j) x[j] = std::clamp(level, lo[j], hi[j]);
    return x;
  }
  // q = 1: raise the smallest entries to a floor and cut the largest to a
  // ceiling, moving eps/2 of mass.
  for (std::size_t j = 0; j < n; ++j) {
    lo[j] = p_hat[j];
    hi[j] = 2.0;
  }
  const double floor_level = solve_clamped_sum(lo, hi, 1.0 + 0.5 * eps, 0.0, 1.0, iterations, budget);
  for (std::size_t j = 0; j < n; ++j) {
    lo[j] = -1.0;
    hi[j] = p_hat[j];
  }
  const double ceil_level = solve_clamped_sum(lo, hi, 1.0 - 0.5 * eps, 0.0, 1.0, iterations, budget);
  if (floor_level >= ceil_level) return std::vector<double>(n, 1.0 / static_cast<double>(n));
  for (std::size_t j = 0; j < n; ++j) x[j] = std::clamp(p_hat[j], floor_level, ceil_level);
  return x;
}

Solution finalize(const Distribution& x_raw, const Instance& inst, const SolverSettings& settings,
                  int iterations, bool budget_exhausted) {
  const Distribution x = settings.symmetrize ? symmetrized(x_raw, inst.p_hat) : x_raw;
  Solution sol = make_solution(x, optimal_baseline(x.probs(), inst.q),
                               std::vector<double>(x.size(), 0.0), inst);
  if (sol.t <= settings.tolerances.degen_tol) return degenerate_solution(inst, iterations);
  sol.iterations = iterations;
  sol.status = budget_exhausted ? SolverStatus::MaxIterations : SolverStatus::Converged;
  if (!budget_exhausted && inst.q.is_interior()) {
    const KKTReport kkt = kkt_residuals(sol, inst, settings.tolerances);
    if (kkt.max_residual > settings.tolerances.cert_tol) sol.status = SolverStatus::MaxIterations;
  }
  return sol;
}

Solution solve_interior(const Instance& inst, const SolverSettings& settings) {
  const Tolerances& tol = settings.tolerances;
  const std::size_t n = inst.size();
  const int budget = settings.max_iterations;
  std::vector<double> x =
      laplace_smooth(inst.p_hat, Pseudocount(1.0 / static_cast<double>(n))).vec();
  ReducedPoint cur = evaluate_reduced(x, inst);

  double step = 1.0;
  int it = 0;
  // Projected gradient until the gradient mapping is small, then Newton.
  // If Newton fails the gradient phase continues with a tighter target.
  for (double target : {1e-6, 1e-11}) {
    while (it < budget) {
      if (cur.t <= tol.degen_tol) return degenerate_solution(inst, it);
      ++it;
      std::vector<double> cand;
      ReducedPoint next;
      double used = step;
      double move = 0.0;
      for (int halvings = 0; halvings < 80; ++halvings) {
        std::vector<double> trial(n);
        for (std::size_t j = 0; j < n; ++j) trial[j] = x[j] - used * cur.grad[j];
        cand = project_floored(trial, kPositivityFloor);
        double lin = 0.0;
        double sq = 0.0;
        move = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double d = cand[j] - x[j];
          lin += cur.grad[j] * d;
          sq += d * d;
          move = std::max(move, std::abs(d));
        }
        next = evaluate_reduced(cand, inst);
        if (next.value <= cur.value + lin + sq / (2.0 * used) + 1e-15 * std::abs(cur.value)) break;
        used *= 0.5;
      }
      x = std::move(cand);
      cur = std::move(next);
      step = std::min(used * 2.0, 1e6);
      if (move / used < target) break;
    }
    if (it >= budget) break;
    if (cur.t <= tol.degen_tol) return degenerate_solution(inst, it);
    if (auto polished = newton_polish(x, cur.beta, inst, budget - it)) {
      it += polished->iterations;
      const ReducedPoint at = evaluate_reduced(polished->x, inst);
      if (at.value <= cur.value + 1e-10 * std::max(1.0, std::abs(cur.value))) {
        return finalize(Distribution::normalized(polished->x), inst, settings, it, false);
      }
    }
  }
  return finalize(Distribution::normalized(x), inst, settings, it, it >= budget);
}

Solution solve_polyhedral(const Instance& inst, const SolverSettings& settings) {
  int iterations = 0;
  const std::vector<double> x = max_entropy_polyhedral(inst, iterations, settings.max_iterations);
  const bool exhausted = iterations >= settings.max_iterations;
  return finalize(Distribution::normalized(x), inst, settings, iterations, exhausted);
}

struct FullPoint {
  double value = 0.0;
  double t = 0.0;
  std::vector<double> gx;
  std::vector<double> glambda;
  double gbeta = 0.0;
};

FullPoint evaluate_full(std::span<const double> x, std::span<const double> lambda, double beta,
                        const Instance& inst) {
  const std::size_t n = x.size();
  const std::vector<double> c = neg_log(x);
  std::vector<double> y(n);
  FullPoint f;
  for (std::size_t j = 0; j < n; ++j) {
    y[j] = c[j] - beta + lambda[j];
    f.value += inst.p_hat[j] * (c[j] + lambda[j]);
  }
  const DualNormValue dn = dual_norm(y, inst.q);
  f.t = dn.value;
  f.value += inst.epsilon * dn.value;
  f.gx.resize(n);
  f.glambda.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double pull = inst.p_hat[j] + inst.epsilon * dn.argmax_certificate[j];
    f.gx[j] = -pull / x[j];
    f.glambda[j] = pull;
    f.gbeta -= inst.epsilon * dn.argmax_certificate[j];
  }
  return f;
}

}  // namespace

double optimal_baseline(std::span<const double> x, QExponent q) {
  std::vector<double> c = neg_log(x);
  const auto [min_it, max_it] = std::minmax_element(c.begin(), c.end());
  const double cmin = *min_it;
  const double cmax = *max_it;
  switch (q.kind()) {
    case QExponent::Kind::One: return 0.5 * (cmin + cmax);
    case QExponent::Kind::Infinity: {
      std::sort(c.begin(), c.end());
      const std::size_t m = c.size() / 2;
      return c.size() % 2 == 1 ? c[m] : 0.5 * (c[m - 1] + c[m]);
    }
    case QExponent::Kind::Interior: break;
  }
  const double qs = q.dual_value();
  double lo = cmin;
  double hi = cmax;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sum_signed_powers(c, mid, qs) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(sum_signed_powers(c, lo, qs)) <= std::abs(sum_signed_powers(c, hi, qs)) ? lo : hi;
}

double objective_full(const Distribution& x, std::span<const double> lambda, double beta,
                      const Instance& inst) {
  const std::size_t n = x.size();
  std::vector<double> y(n);
  double val = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double lam = lambda.empty() ? 0.0 : lambda[j];
    const double c = -safe_log(x[j]);
    val += inst.p_hat[j] * (c + lam);
    y[j] = c - beta + lam;
  }
  return val + inst.epsilon * dual_norm(y, inst.q).value;
}

double objective_regularized(const Distribution& x, double beta, const Instance& inst) {
  return objective_full(x, {}, beta, inst);
}

Solution make_solution(const Distribution& x, double beta, std::vector<double> lambda,
                       const Instance& inst) {
  if (lambda.empty()) lambda.assign(x.size(), 0.0);
  std::vector<double> y(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) y[j] = -safe_log(x[j]) - beta + lambda[j];
  Solution sol{.x = x, .beta = beta, .lambda = std::move(lambda)};
  sol.objective = objective_full(sol.x, sol.lambda, beta, inst);
  sol.t = dual_norm(y, inst.q).value;
  return sol;
}

Solution solve_qdro(const Instance& inst, const SolverSettings& settings) {
  settings.validate();
  if (inst.epsilon == 0.0) {
    if (!(inst.p_hat.min() > 0.0)) {
      throw Error(ErrorCode::EpsilonZeroWithZeros,
                  "eps = 0 with zero-frequency categories has no smoothing solution");
    }
    Solution sol = make_solution(inst.p_hat, optimal_baseline(inst.p_hat.probs(), inst.q), {}, inst);
    sol.degenerate = sol.t <= settings.tolerances.degen_tol;
    sol.status = sol.degenerate ? SolverStatus::Degenerate : SolverStatus::Converged;
    return sol;
  }
  if (uniform_is_optimal(inst)) return degenerate_solution(inst, 0);
  if (settings.step_policy == StepPolicy::Diminishing) return solve_qdro_full(inst, settings);
  if (inst.q.is_interior()) return solve_interior(inst, settings);
  return solve_polyhedral(inst, settings);
}

Solution solve_qdro_full(const Instance& inst, const SolverSettings& settings,
                         std::span<const double> lambda_init) {
  settings.validate();
  const Tolerances& tol = settings.tolerances;
  const std::size_t n = inst.size();
  if (inst.epsilon == 0.0) return solve_qdro(inst, settings);

  std::vector<double> x =
      laplace_smooth(inst.p_hat, Pseudocount(1.0 / static_cast<double>(n))).vec();
  std::vector<double> lambda(n, 0.0);
  if (!lambda_init.empty()) {
    for (std::size_t j = 0; j < n; ++j) lambda[j] = std::max(0.0, lambda_init[j]);
  }
  double beta = entropy(x);
  FullPoint cur = evaluate_full(x, lambda, beta, inst);

  const bool smooth = inst.q.is_interior() && settings.step_policy == StepPolicy::FixedBacktracking;
  int it = 0;
  bool settled = false;

  if (smooth) {
    double step = 1.0;
    while (it < settings.max_iterations) {
      if (cur.t <= tol.degen_tol) return degenerate_solution(inst, it);
      ++it;
      double used = step;
      double move = 0.0;
      std::vector<double> nx(n);
      std::vector<double> nl(n);
      double nb = beta;
      FullPoint next;
      for (int halvings = 0; halvings < 80; ++halvings) {
        std::vector<double> trial(n);
        for (std::size_t j = 0; j < n; ++j) trial[j] = x[j] - used * cur.gx[j];
        nx = project_floored(trial, kPositivityFloor);
        for (std::size_t j = 0; j < n; ++j) nl[j] = std::max(0.0, lambda[j] - used * cur.glambda[j]);
        nb = beta - used * cur.gbeta;
        double lin = cur.gbeta * (nb - beta);
        double sq = (nb - beta) * (nb - beta);
        move = std::abs(nb - beta);
        for (std::size_t j = 0; j < n; ++j) {
          const double dx = nx[j] - x[j];
          const double dl = nl[j] - lambda[j];
          lin += cur.gx[j] * dx + cur.glambda[j] * dl;
          sq += dx * dx + dl * dl;
          move = std::max({move, std::abs(dx), std::abs(dl)});
        }
        next = evaluate_full(nx, nl, nb, inst);
        if (next.value <= cur.value + lin + sq / (2.0 * used) + 1e-15 * std::abs(cur.value)) break;
        used *= 0.5;
      }
      x = std::move(nx);
      lambda = std::move(nl);
      beta = nb;
      cur = std::move(next);
      step = std::min(used * 2.0, 1e6);
      if (move / used < 1e-10) {
        settled = true;
        break;
      }
    }
  } else {
    // Projected subgradient with steps s0 / (||g|| sqrt(k + 1)); keeps the best iterate.
    std::vector<double> best_x = x;
    std::vector<double> best_l = lambda;
    double best_b = beta;
    double best_val = cur.value;
    const double s0 = 0.05;
    while (it < settings.max_iterations) {
      if (cur.t <= tol.degen_tol) return degenerate_solution(inst, it);
      ++it;
      double gnorm = cur.gbeta * cur.gbeta;
      for (std::size_t j = 0; j < n; ++j) {
        gnorm += cur.gx[j] * cur.gx[j] + cur.glambda[j] * cur.glambda[j];
      }
      gnorm = std::sqrt(gnorm);
      if (gnorm == 0.0) break;
      const double s = s0 / (gnorm * std::sqrt(static_cast<double>(it)));
      std::vector<double> trial(n);
      for (std::size_t j = 0; j < n; ++j) trial[j] = x[j] - s * cur.gx[j];
      x = project_floored(trial, kPositivityFloor);
      for (std::size_t j = 0; j < n; ++j) lambda[j] = std::max(0.0, lambda[j] - s * cur.glambda[j]);
      beta -= s * cur.gbeta;
      cur = evaluate_full(x, lambda, beta, inst);
      if (cur.value < best_val) {
        best_val = cur.value;
        best_x = x;
        best_l = lambda;
        best_b = beta;
      }
    }
    x = best_x;
    lambda = best_l;
    beta = best_b;
  }

  Distribution xd = Distribution::normalized(x);
  if (settings.symmetrize) xd = symmetrized(xd, inst.p_hat);
  Solution sol = make_solution(xd, beta, lambda, inst);
  if (sol.t <= tol.degen_tol) return degenerate_solution(inst, it);
  sol.iterations = it;
  if (smooth) {
    sol.status = settled ? SolverStatus::Converged : SolverStatus::MaxIterations;
  } else {
    sol.status = optimality_gap(sol.x, inst, tol) <= tol.cert_tol ? SolverStatus::Converged
                                                                  : SolverStatus::MaxIterations;
  }
  return sol;
}

KKTReport kkt_residuals(const Solution& sol, const Instance& inst, const Tolerances& tol) {
  if (!inst.q.is_interior()) {
    throw Error(ErrorCode::InvalidExponent, "KKT residuals need q in (1, inf); use duality_gap");
  }
  const std::size_t n = sol.x.size();
  const VVector vt = v_vector(sol.x.probs(), sol.beta, sol.lambda, inst.q, true, tol.degen_tol);
  const double scale = std::pow(vt.t, inst.q.dual_value() - 1.0);
  const double eps = inst.epsilon;

  KKTReport r;
  std::vector<double> pull(n);
  std::vector<double> ratio(n);
  for (std::size_t j = 0; j < n; ++j) {
    pull[j] = inst.p_hat[j] + eps * vt.v[j] / scale;
    ratio[j] = pull[j] / sol.x[j];
  }
  r.gamma = std::accumulate(ratio.begin(), ratio.end(), 0.0) / static_cast<double>(n);
  r.stationarity_x.resize(n);
  r.stationarity_lambda.resize(n);
  r.complementarity.resize(n);
  r.xi.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    r.stationarity_x[j] = r.gamma - ratio[j];
    r.xi[j] = std::max(0.0, pull[j]);
    r.stationarity_lambda[j] = pull[j] - r.xi[j];
    r.complementarity[j] = r.xi[j] * sol.lambda[j];
    r.xi_deviation = std::max(r.xi_deviation, std::abs(r.xi[j] - sol.x[j]));
  }
  r.stationarity_beta = std::accumulate(vt.v.begin(), vt.v.end(), 0.0);
  r.gamma_deviation = std::abs(r.gamma - 1.0);

  r.max_residual = std::abs(r.stationarity_beta);
  for (std::size_t j = 0; j < n; ++j) {
    r.max_residual = std::max({r.max_residual, std::abs(r.stationarity_x[j]),
                               std::abs(r.stationarity_lambda[j]), std::abs(r.complementarity[j])});
  }
  return r;
}

double duality_gap(const Solution& sol, const Instance& inst, const Tolerances& tol) {
  const WorstCase wc = worst_case(sol.x, inst, tol);
  return objective_full(sol.x, sol.lambda, sol.beta, inst) - wc.loss;
}

double optimality_gap(const Distribution& x, const Instance& inst, const Tolerances& tol) {
  const double upper = worst_case(x, inst, tol).loss;
  if (in_ambiguity_set(x.probs(), inst, tol.feas_tol)) return upper - entropy(x.probs());
  const Distribution anchor = dykstra_feasible_point(inst, x.probs(), tol);
  return upper - entropy(anchor.probs());
}

Certificate certify(const Solution& sol, const Instance& inst, const Tolerances& tol) {
  Certificate cert;
  cert.assumption1 = sol.t > tol.degen_tol;
  if (inst.q.is_interior() && cert.assumption1) cert.kkt = kkt_residuals(sol, inst, tol);
  const WorstCase wc = worst_case(sol.x, inst, tol);
  cert.norm_active = wc.norm_active;
  cert.duality_gap = objective_full(sol.x, sol.lambda, sol.beta, inst) - wc.loss;
  cert.optimality_gap = optimality_gap(sol.x, inst, tol);
  cert.passed = std::abs(cert.duality_gap) <= tol.cert_tol &&
                cert.optimality_gap <= tol.cert_tol &&
                (!cert.kkt || cert.kkt->max_residual <= tol.cert_tol);
  return cert;
}

}  // namespace qdro
