#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oracle {

double dual_norm(std::span<const double> y, const qdro::QExponent& q) {
  if (q.is_one()) {
    double m = 0.0;
    for (double v : y) m = std::max(m, std::abs(v));
    return m;
  }
  if (q.is_infinity()) {
    double s = 0.0;
    for (double v : y) s += std::abs(v);
    return s;
  }
  const double qs = q.dual_value();
  double s = 0.0;
  for (double v : y) s += std::pow(std::abs(v), qs);
  return std::pow(s, 1.0 / qs);
}

double primal_norm(std::span<const double> y, const qdro::QExponent& q) {
  if (q.is_infinity()) {
    double m = 0.0;
    for (double v : y) m = std::max(m, std::abs(v));
    return m;
  }
  const double qq = q.value();
  double s = 0.0;
  for (double v : y) s += std::pow(std::abs(v), qq);
  return std::pow(s, 1.0 / qq);
}

double linear_loss(std::span<const double> p, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] != 0.0) s -= p[j] * std::log(x[j]);
  }
  return s;
}

double objective_full(std::span<const double> p_hat, std::span<const double> x, double beta,
                      std::span<const double> lambda, double eps, const qdro::QExponent& q) {
  std::vector<double> y(x.size());
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double lam = lambda.empty() ? 0.0 : lambda[j];
    s += p_hat[j] * (-std::log(x[j]) + lam);
    y[j] = -std::log(x[j]) - beta + lam;
  }
  return s + eps * dual_norm(y, q);
}

bool in_ambiguity_set(std::span<const double> p, std::span<const double> p_hat, double eps,
                      const qdro::QExponent& q, double slack) {
  double sum = 0.0;
  std::vector<double> e(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] < -slack) return false;
    sum += p[j];
    e[j] = p[j] - p_hat[j];
  }
  return std::abs(sum - 1.0) <= slack && primal_norm(e, q) <= eps + slack;
}

double box_vertex_max(std::span<const double> c, std::span<const double> p_hat, double eps) {
  const std::size_t n = c.size();
  std::vector<double> lo(n), hi(n, eps);
  for (std::size_t j = 0; j < n; ++j) lo[j] = std::max(-p_hat[j], -eps);
  double best = -INFINITY;
  for (std::size_t free = 0; free < n; ++free) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
      double value = 0.0;
      double sum = 0.0;
      std::size_t bit = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == free) continue;
        const double e = (mask >> bit++) & 1 ? hi[j] : lo[j];
        sum += e;
        value += c[j] * (p_hat[j] + e);
      }
      const double ef = -sum;
      if (ef < lo[free] - 1e-15 || ef > hi[free] + 1e-15) continue;
      best = std::max(best, value + c[free] * (p_hat[free] + ef));
    }
  }
  return best;
}

double l1_vertex_max(std::span<const double> c, std::span<const double> p_hat, double eps) {
  const std::size_t n = c.size();
  const double c_max = *std::max_element(c.begin(), c.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return c[a] < c[b]; });
  const double base = std::inner_product(c.begin(), c.end(), p_hat.begin(), 0.0);
  auto value = [&](double m) {
    double gain = m * c_max;
    double left = m;
    for (std::size_t j : order) {
      const double d = std::min(left, p_hat[j]);
      gain -= d * c[j];
      left -= d;
    }
    return base + gain;
  };
  std::vector<double> breaks{0.0, eps / 2.0};
  double cum = 0.0;
  for (std::size_t j : order) {
    cum += p_hat[j];
    if (cum < eps / 2.0) breaks.push_back(cum);
  }
  double best = -INFINITY;
  for (double m : breaks) best = std::max(best, value(std::min(m, 1.0)));
  return best;
}

std::vector<double> fd_dual_norm_gradient(std::span<const double> y, const qdro::QExponent& q, double h) {
  std::vector<double> g(y.size());
  std::vector<double> w(y.begin(), y.end());
  for (std::size_t j = 0; j < y.size(); ++j) {
    w[j] = y[j] + h;
    const double up = dual_norm(w, q);
    w[j] = y[j] - h;
    const double down = dual_norm(w, q);
    w[j] = y[j];
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

namespace {

std::vector<double> shifted_costs(std::span<const double> x, double beta) {
  std::vector<double> y(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) y[j] = -std::log(x[j]) - beta;
  return y;
}

double spow(double z, double a) { return z == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(z), a), z); }

}  // namespace

double pairwise_identity_residual(std::span<const double> p_hat, std::span<const double> x, double beta,
                                  double eps, const qdro::QExponent& q) {
  const double qs = q.dual_value();
  const auto y = shifted_costs(x, beta);
  const double t = dual_norm(y, q);
  const double scale = eps / std::pow(t, qs - 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double lhs = (x[j] - x[i]) - scale * (spow(y[j], qs - 1.0) - spow(y[i], qs - 1.0));
      worst = std::max(worst, std::abs(lhs - (p_hat[j] - p_hat[i])));
    }
  }
  return worst;
}

double fixed_point_residual(std::span<const double> p_hat, std::span<const double> x, double beta, double eps,
                            const qdro::QExponent& q) {
  const double qs = q.dual_value();
  const auto y = shifted_costs(x, beta);
  const double t = dual_norm(y, q);
  double worst = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double grad = spow(y[j] / t, qs - 1.0);
    worst = std::max(worst, std::abs(x[j] - (p_hat[j] + eps * grad)));
  }
  return worst;
}

std::vector<double> random_grid_simplex(std::size_t n, std::mt19937_64& rng) {
  // Cut the 100 units of 0.01 at random points; empty slices give zeros.
  std::uniform_int_distribution<int> cut(0, 100);
  std::vector<int> cuts(n - 1);
  for (int& v : cuts) v = cut(rng);
  cuts.push_back(0);
  cuts.push_back(100);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> p(n);
  for (std::size_t j = 0; j < n; ++j) p[j] = (cuts[j + 1] - cuts[j]) / 100.0;
  return p;
}

std::vector<double> random_interior_simplex(std::size_t n, double floor, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> p(n);
  double sum = 0.0;
  for (double& v : p) sum += (v = expo(rng));
  const double free = 1.0 - floor * static_cast<double>(n);
  for (double& v : p) v = floor + free * v / sum;
  return p;
}

qdro::Instance random_instance(std::mt19937_64& rng, const RandomInstanceSpec& spec) {
  std::uniform_int_distribution<std::size_t> size(spec.n_min, spec.n_max);
  std::uniform_int_distribution<int> pick(0, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = size(rng);
  auto p = random_grid_simplex(n, rng);
  const double eps = spec.eps_max * (1.0 - unit(rng));  // (0, eps_max]
  static const double qs[] = {1.0, 1.5, 2.0, 3.0};
  const int k = pick(rng);
  const qdro::QExponent q = k == 4 ? qdro::QExponent::infinity() : qdro::QExponent::finite(qs[k]);
  return qdro::Instance(qdro::Distribution::validate(p), eps, q);
}

}  // namespace oracle
