#include "qdro/inner_adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qdro/norms.hpp"

namespace qdro {

namespace {

// Root of a nonincreasing function with f(lo) >= 0 >= f(hi). Returns the
// bracket end on the requested side once the bracket stops shrinking.
template <class F>
std::pair<double, double> bisect_decreasing(F&& f, double lo, double hi, int max_iter = 300) {
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

void check_bounded(const Distribution& x, const Instance& inst) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] <= 0.0 && (inst.epsilon > 0.0 || inst.p_hat[j] > 0.0)) {
      throw Error(ErrorCode::UnboundedLoss,
                  "x_" + std::to_string(j) + " = 0 can receive positive adversarial mass");
    }
  }
}

std::vector<double> costs(const Distribution& x) {
  std::vector<double> c(x.size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = -safe_log(x[j]);
  return c;
}

double dual_objective(std::span<const double> p_hat, std::span<const double> c, double eps,
                      double beta, std::span<const double> lambda, QExponent q) {
  std::vector<double> y(c.size());
  double val = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    val += p_hat[j] * (c[j] + lambda[j]);
    y[j] = c[j] - beta + lambda[j];
  }
  return val + eps * dual_norm(y, q).value;
}

WorstCase assemble(const Distribution& x, const Instance& inst, std::vector<double> e,
                   const Tolerances& tol) {
  std::vector<double> p(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) p[j] = inst.p_hat[j] + e[j];
  WorstCase wc{.e = std::move(e), .p = Distribution::normalized(std::move(p))};
  wc.loss = cross_entropy(wc.p, x);
  wc.norm_active = q_norm(wc.e, inst.q) >= inst.epsilon - tol.cert_tol;
  return wc;
}

// q in (1, inf): the closed-form family e(kappa, mu).
struct InteriorFamily {
  std::span<const double> p_hat;
  std::span<const double> c;
  double q_star;
  double cmin;
  double cmax;

  void fill(double kappa, double mu, std::vector<double>& e) const {
    for (std::size_t j = 0; j < c.size(); ++j) {
      e[j] = std::max(-p_hat[j], kappa * signed_power(c[j] - mu, q_star));
    }
  }

  double balance_mu(double kappa, std::vector<double>& e) const {
    auto mass = [&](double mu) {
      fill(kappa, mu, e);
      return std::accumulate(e.begin(), e.end(), 0.0);
    };
    auto [lo, hi] = bisect_decreasing(mass, cmin, cmax);
    // pick the end with the smaller imbalance
    const double mlo = std::abs(mass(lo));
    const double mhi = std::abs(mass(hi));
    const double mu = mlo <= mhi ? lo : hi;
    fill(kappa, mu, e);
    return mu;
  }
};

WorstCase worst_case_interior(const Distribution& x, const Instance& inst,
                              std::span<const double> c, double cmin, double cmax,
                              const Tolerances& tol) {
  const std::size_t n = c.size();
  const double eps = inst.epsilon;
  const QExponent q = inst.q;
  const auto p_hat = inst.p_hat.probs();

  // Ball inactive: all mass on the costliest category is reachable.
  const std::size_t top = static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
  {
    std::vector<double> e(n);
    for (std::size_t j = 0; j < n; ++j) e[j] = (j == top ? 1.0 : 0.0) - p_hat[j];
    if (q_norm(e, q) <= eps) {
      WorstCase wc = assemble(x, inst, std::move(e), tol);
      wc.beta = c[top];
      wc.lambda.resize(n);
      for (std::size_t j = 0; j < n; ++j) wc.lambda[j] = c[top] - c[j];
      wc.dual_bound = dual_objective(p_hat, c, eps, wc.beta, wc.lambda, q);
      wc.nu_estimate = 0.0;
      return wc;
    }
  }

  const InteriorFamily family{p_hat, c, q.dual_value(), cmin, cmax};
  std::vector<double> e(n);
  auto excess = [&](double kappa) {
    family.balance_mu(kappa, e);
    return eps - q_norm(e, q);
  };

  double hi = 1.0;
  while (excess(hi) > 0.0 && hi < 1e300) hi *= 2.0;
  double lo = 0.0;
  std::tie(lo, hi) = bisect_decreasing(excess, lo, hi);
  const double kappa = lo > 0.0 ? lo : hi;
  const double mu = family.balance_mu(kappa, e);

  // Dual certificate: beta = mu, lambda > 0 exactly on clamped coordinates.
  const double q_val = q.value();
  std::vector<double> lambda(n, 0.0);
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double free_step = kappa * signed_power(c[j] - mu, family.q_star);
    y[j] = c[j] - mu;
    if (free_step < -p_hat[j]) {
      const double clamped_y = -std::pow(p_hat[j] / kappa, q_val - 1.0);
      lambda[j] = std::max(0.0, clamped_y - (c[j] - mu));
      y[j] = c[j] - mu + lambda[j];
    }
  }

  WorstCase wc = assemble(x, inst, e, tol);
  wc.beta = mu;
  wc.lambda = lambda;
  wc.dual_bound = dual_objective(p_hat, c, eps, mu, lambda, q);

  // Least-squares nu for y_j = nu * q * sp(e_j, q) over free, moved coordinates.
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (e[j] == 0.0 || wc.p[j] <= 0.0) continue;
    const double g = q_val * signed_power(e[j], q_val);
    num += y[j] * g;
    den += g * g;
  }
  wc.nu_estimate = den > 0.0 ? std::max(0.0, num / den) : 0.0;
  return wc;
}

std::vector<std::size_t> order_by_cost(std::span<const double> c, bool descending) {
  std::vector<std::size_t> idx(c.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return descending ? c[a] > c[b] : c[a] < c[b];
  });
  return idx;
}

// q = inf: box |e_j| <= eps. Fill the cheapest feasible lower bounds, then pour
// the remaining mass into the costliest categories first.
WorstCase worst_case_box(const Distribution& x, const Instance& inst, std::span<const double> c,
                         const Tolerances& tol) {
  const std::size_t n = c.size();
  const double eps = inst.epsilon;
  const auto p_hat = inst.p_hat.probs();

  std::vector<double> p(n);
  double remaining = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    p[j] = std::max(0.0, p_hat[j] - eps);
    remaining -= p[j];
  }
  for (std::size_t j : order_by_cost(c, true)) {
    if (remaining <= 0.0) break;
    const double room = (p_hat[j] + eps) - p[j];
    const double add = std::min(room, remaining);
    p[j] += add;
    remaining -= add;
  }
  std::vector<double> e(n);
  for (std::size_t j = 0; j < n; ++j) e[j] = p[j] - p_hat[j];

  // Dual with the 1-norm: for fixed beta the optimal lambda is separable and the
  // objective is piecewise linear in beta with breakpoints at the costs.
  auto dual_at = [&](double beta) {
    double val = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      val += p_hat[j] * c[j];
      val += c[j] >= beta ? eps * (c[j] - beta) : std::min(eps, p_hat[j]) * (beta - c[j]);
    }
    return val;
  };
  double best_beta = c[0];
  double best_val = dual_at(c[0]);
  for (std::size_t j = 1; j < n; ++j) {
    const double val = dual_at(c[j]);
    if (val < best_val) {
      best_val = val;
      best_beta = c[j];
    }
  }
  std::vector<double> lambda(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (c[j] < best_beta && eps > p_hat[j]) lambda[j] = best_beta - c[j];
  }

  WorstCase wc = assemble(x, inst, std::move(e), tol);
  wc.beta = best_beta;
  wc.lambda = std::move(lambda);
  wc.dual_bound = dual_objective(p_hat, c, eps, wc.beta, wc.lambda, inst.q);
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) y[j] = c[j] - wc.beta + wc.lambda[j];
  wc.nu_estimate = dual_norm(y, inst.q).value;
  return wc;
}

// q = 1: move up to eps/2 of mass from the cheapest categories onto the
// costliest one (lowest index on ties).
WorstCase worst_case_l1(const Distribution& x, const Instance& inst, std::span<const double> c,
                        const Tolerances& tol) {
  const std::size_t n = c.size();
  const double eps = inst.epsilon;
  const auto p_hat = inst.p_hat.probs();
  const std::size_t top = static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
  const double cmax = c[top];

  std::vector<double> e(n, 0.0);
  double budget = 0.5 * eps;
  for (std::size_t j : order_by_cost(c, false)) {
    if (budget <= 0.0) break;
    if (!(c[j] < cmax)) continue;
    const double take = std::min(p_hat[j], budget);
    e[j] -= take;
    e[top] += take;
    budget -= take;
  }

  // Dual with the inf-norm: beta = cmax - s, lambda_j = max(0, cmax - 2s - c_j),
  // piecewise linear in s >= 0 with breakpoints (cmax - c_j) / 2.
  auto dual_at = [&](double s) {
    double val = eps * s;
    for (std::size_t j = 0; j < n; ++j) {
      val += p_hat[j] * (c[j] + std::max(0.0, cmax - 2.0 * s - c[j]));
    }
    return val;
  };
  double best_s = 0.0;
  double best_val = dual_at(0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = 0.5 * (cmax - c[j]);
    const double val = dual_at(s);
    if (val < best_val) {
      best_val = val;
      best_s = s;
    }
  }

  WorstCase wc = assemble(x, inst, std::move(e), tol);
  wc.beta = cmax - best_s;
  wc.lambda.resize(n);
  for (std::size_t j = 0; j < n; ++j) wc.lambda[j] = std::max(0.0, cmax - 2.0 * best_s - c[j]);
  wc.dual_bound = dual_objective(p_hat, c, eps, wc.beta, wc.lambda, inst.q);
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) y[j] = c[j] - wc.beta + wc.lambda[j];
  wc.nu_estimate = dual_norm(y, inst.q).value;
  return wc;
}

WorstCase zero_perturbation(const Distribution& x, const Instance& inst, double beta,
                            const Tolerances& tol) {
  WorstCase wc = assemble(x, inst, std::vector<double>(x.size(), 0.0), tol);
  wc.beta = beta;
  wc.lambda.assign(x.size(), 0.0);
  wc.dual_bound = wc.loss;
  wc.nu_estimate = 0.0;
  return wc;
}

}  // namespace

WorstCase worst_case(const Distribution& x, const Instance& inst, const Tolerances& tol) {
  if (x.size() != inst.size()) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
  check_bounded(x, inst);

  if (inst.epsilon == 0.0) return zero_perturbation(x, inst, 0.0, tol);

  const std::vector<double> c = costs(x);
  const auto [min_it, max_it] = std::minmax_element(c.begin(), c.end());
  const double cmin = *min_it;
  const double cmax = *max_it;
  if (cmax - cmin <= 1e-15 * std::max(1.0, std::abs(cmax))) {
    return zero_perturbation(x, inst, 0.5 * (cmin + cmax), tol);
  }

  switch (inst.q.kind()) {
    case QExponent::Kind::Infinity: return worst_case_box(x, inst, c, tol);
    case QExponent::Kind::One: return worst_case_l1(x, inst, c, tol);
    case QExponent::Kind::Interior: return worst_case_interior(x, inst, c, cmin, cmax, tol);
  }
  return zero_perturbation(x, inst, 0.0, tol);
}

std::vector<double> project_scaled_simplex(std::span<const double> v, double total) {
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double candidate = (cumsum - total) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) theta = candidate;
  }
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = std::max(v[j] - theta, 0.0);
  return out;
}

Distribution project_simplex(std::span<const double> v) {
  return Distribution::normalized(project_scaled_simplex(v, 1.0));
}

std::vector<double> project_qball(std::span<const double> v, std::span<const double> center,
                                  double radius, QExponent q) {
  const std::size_t n = v.size();
  std::vector<double> d(n);
  for (std::size_t j = 0; j < n; ++j) d[j] = v[j] - center[j];
  const double norm = q_norm(d, q);
  if (norm <= radius) return {v.begin(), v.end()};

  std::vector<double> z(n);
  switch (q.kind()) {
    case QExponent::Kind::Infinity:
      for (std::size_t j = 0; j < n; ++j) z[j] = std::clamp(d[j], -radius, radius);
      break;
    case QExponent::Kind::One: {
      std::vector<double> mag(n);
      for (std::size_t j = 0; j < n; ++j) mag[j] = std::abs(d[j]);
      const std::vector<double> shrunk = project_scaled_simplex(mag, radius);
      for (std::size_t j = 0; j < n; ++j) z[j] = std::copysign(shrunk[j], d[j]);
      break;
    }
    case QExponent::Kind::Interior: {
      const double qv = q.value();
      if (qv == 2.0) {
        for (std::size_t j = 0; j < n; ++j) z[j] = d[j] * (radius / norm);
        break;
      }
      // z_j = sgn(d_j) s_j with s_j + mu q s_j^(q-1) = |d_j|; mu by bisection.
      auto shrink = [&](double mu) {
        for (std::size_t j = 0; j < n; ++j) {
          const double a = std::abs(d[j]);
          auto residual = [&](double s) { return a - s - mu * qv * std::pow(s, qv - 1.0); };
          auto [lo, hi] = bisect_decreasing(residual, 0.0, a, 200);
          z[j] = std::copysign(lo, d[j]);
        }
        return radius - q_norm(z, q);
      };
      double hi = 1.0;
      while (shrink(hi) < 0.0 && hi < 1e300) hi *= 2.0;
      auto neg_excess = [&](double mu) { return -shrink(mu); };
      auto [lo, hi_mu] = bisect_decreasing(neg_excess, 0.0, hi, 200);
      (void)lo;
      shrink(hi_mu);
      break;
    }
  }
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = center[j] + z[j];
  return out;
}

bool in_ambiguity_set(std::span<const double> p, const Instance& inst, double slack) {
  double sum = 0.0;
  std::vector<double> e(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] < -slack) return false;
    sum += p[j];
    e[j] = p[j] - inst.p_hat[j];
  }
  return std::abs(sum - 1.0) <= slack && q_norm(e, inst.q) <= inst.epsilon + slack;
}

Distribution dykstra_feasible_point(const Instance& inst, std::span<const double> target,
                                    const Tolerances& tol, int max_iterations) {
  const std::size_t n = inst.size();
  const auto center = inst.p_hat.probs();
  std::vector<double> x(target.begin(), target.end());
  std::vector<double> p_corr(n, 0.0);
  std::vector<double> q_corr(n, 0.0);
  std::vector<double> buf(n);

  for (int it = 0; it < max_iterations; ++it) {
    for (std::size_t j = 0; j < n; ++j) buf[j] = x[j] + p_corr[j];
    const std::vector<double> y = project_scaled_simplex(buf, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
      p_corr[j] = buf[j] - y[j];
      buf[j] = y[j] + q_corr[j];
    }
    const std::vector<double> x_new = project_qball(buf, center, inst.epsilon, inst.q);
    double step = 0.0;
    double split = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      q_corr[j] = buf[j] - x_new[j];
      step = std::max(step, std::abs(x_new[j] - x[j]));
      split = std::max(split, std::abs(x_new[j] - y[j]));
    }
    x = x_new;
    if (step < tol.opt_tol * 1e-2 && split < tol.feas_tol * 1e-2) {
      return Distribution::normalized(std::move(x));
    }
  }
  throw Error(ErrorCode::MaxIterations, "Dykstra projections did not converge");
}

WorstCase worst_case_projected_ascent(const Distribution& x, const Instance& inst,
                                      const Tolerances& tol, int max_iterations) {
  check_bounded(x, inst);
  const std::vector<double> c = costs(x);
  const auto [min_it, max_it] = std::minmax_element(c.begin(), c.end());
  const double lipschitz = *max_it - *min_it;

  auto finish = [&](const Distribution& p) {
    std::vector<double> e(p.size());
    for (std::size_t j = 0; j < e.size(); ++j) e[j] = p[j] - inst.p_hat[j];
    WorstCase wc = assemble(x, inst, std::move(e), tol);
    wc.beta = std::nan("");
    wc.dual_bound = std::nan("");
    return wc;
  };
  if (inst.epsilon == 0.0 || lipschitz <= 0.0) return finish(inst.p_hat);

  Distribution p = inst.p_hat;
  double loss = cross_entropy(p, x);
  std::vector<double> target(p.size());
  for (int it = 0; it < max_iterations; ++it) {
    for (std::size_t j = 0; j < target.size(); ++j) target[j] = p[j] + c[j] / lipschitz;
    Distribution next = dykstra_feasible_point(inst, target, tol);
    const double next_loss = cross_entropy(next, x);
    p = std::move(next);
    const bool settled = std::abs(next_loss - loss) < tol.opt_tol;
    loss = next_loss;
    if (settled) break;
  }
  return finish(p);
}

}  // namespace qdro
