#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "qdro/experiments.hpp"
#include "qdro/inner_adversary.hpp"
#include "qdro/laplace.hpp"
#include "qdro/solver.hpp"

using qdro::Distribution;
using qdro::Instance;
using qdro::QExponent;
using qdro::SolverSettings;
using qdro::SolverStatus;

namespace {

Distribution dist(std::vector<double> v) { return qdro::validate_distribution(v); }

// Experiment-1 optimum from an independent off-line solve (SLSQP on the
// saddle-point form, tolerance 1e-12).
const std::vector<double> kExp1Reference{0.13423723, 0.17916285, 0.17916285, 0.23320736, 0.27422971};

// min over beta of objective_regularized by golden section, test side.
double min_over_beta(const Instance& inst, std::span<const double> x) {
  double lo = -5.0, hi = 10.0;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double b) {
    return oracle::objective_full(inst.p_hat.probs(), x, b, {}, inst.epsilon, inst.q);
  };
  for (int k = 0; k < 200; ++k) {
    const double a = hi - r * (hi - lo);
    const double b = lo + r * (hi - lo);
    if (f(a) < f(b)) hi = b; else lo = a;
  }
  return f(0.5 * (lo + hi));
}

}  // namespace

TEST_CASE("experiment-1 instance reproduces the printed optimum") {
  const auto sol = qdro::solve_qdro(qdro::experiment1_instance());
  CHECK(sol.status == SolverStatus::Converged);
  CHECK_FALSE(sol.degenerate);
  const auto printed = qdro::experiment1_expected();
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(std::abs(sol.x[j] - printed[j]) <= 1e-3);
    CHECK(std::abs(sol.x[j] - kExp1Reference[j]) <= 1e-7);
  }
  CHECK(sol.x[1] == sol.x[2]);
  for (double l : sol.lambda) CHECK(l == 0.0);
}

TEST_CASE("printed optimum attains the minimal objective") {
  const auto inst = qdro::experiment1_instance();
  const auto sol = qdro::solve_qdro(inst);
  auto printed = qdro::experiment1_expected();
  const double s = std::accumulate(printed.begin(), printed.end(), 0.0);
  for (double& v : printed) v /= s;
  // The optimum is a stationary point on the simplex, so a 1e-4 perturbation
  // moves the value only at second order.
  CHECK(std::abs(min_over_beta(inst, printed) - sol.objective) <= 1e-6);
  CHECK(min_over_beta(inst, sol.x.probs()) == doctest::Approx(sol.objective).epsilon(1e-10));
  // Coarse lattice over the simplex: no point beats the solver.
  const double step = 0.05;
  std::vector<double> x(5);
  const int m = static_cast<int>(std::lround(1.0 / step));
  for (int a = 1; a < m; ++a)
    for (int b = 1; a + b < m; ++b)
      for (int c = 1; a + b + c < m; ++c)
        for (int d = 1; a + b + c + d < m; ++d) {
          x = {a * step, b * step, c * step, d * step, (m - a - b - c - d) * step};
          CHECK(min_over_beta(inst, x) >= sol.objective - 1e-12);
        }
}

TEST_CASE("boundary exponents reproduce the printed cases") {
  const auto inf = qdro::solve_qdro(Instance(dist({0.0, 0.2, 0.3, 0.5}), 0.2, QExponent::infinity()));
  const std::vector<double> inf_expected{0.20, 0.25, 0.25, 0.30};
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(inf.x[j] - inf_expected[j]) <= 1e-2);
  CHECK(std::abs(inf.x[1] - inf.x[2]) <= 1e-6);

  const auto one = qdro::solve_qdro(Instance(dist({0.0, 0.07, 0.465, 0.465}), 0.3, QExponent::finite(1)));
  const std::vector<double> one_expected{0.11, 0.11, 0.39, 0.39};
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(one.x[j] - one_expected[j]) <= 1e-2);
  MESSAGE("q=1 case: x2 - x1 = ", one.x[1] - one.x[0]);
}

TEST_CASE("eps = 0 passthrough") {
  const auto p = dist({0.1, 0.2, 0.3, 0.4});
  const auto sol = qdro::solve_qdro(Instance(p, 0.0, QExponent::finite(2)));
  CHECK(sol.x == p);
  CHECK(sol.objective == doctest::Approx(qdro::entropy(p.probs())).epsilon(1e-12));
  CHECK_THROWS_AS(qdro::solve_qdro(Instance(dist({0.0, 0.5, 0.5}), 0.0, QExponent::finite(2))), qdro::Error);
  try {
    qdro::solve_qdro(Instance(dist({0.0, 0.5, 0.5}), 0.0, QExponent::finite(2)));
  } catch (const qdro::Error& e) {
    CHECK(e.code() == qdro::ErrorCode::EpsilonZeroWithZeros);
  }
}

TEST_CASE("huge radius returns the degenerate closed form") {
  for (const auto& q : {QExponent::finite(1), QExponent::finite(2), QExponent::finite(3), QExponent::infinity()}) {
    const auto sol = qdro::solve_qdro(Instance(dist({0.1, 0.2, 0.3, 0.4}), 4.0, q));
    CHECK(sol.degenerate);
    CHECK(sol.status == SolverStatus::Degenerate);
    CHECK(sol.x == Distribution::uniform(4));
    CHECK(sol.beta == doctest::Approx(std::log(4.0)).epsilon(1e-15));
    CHECK(sol.t == 0.0);
    CHECK(sol.objective == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  }
}

TEST_CASE("degeneracy threshold for q = 2") {
  const auto p = dist({0.1, 0.2, 0.3, 0.4});
  const double threshold = std::sqrt(0.05);
  CHECK(qdro::solve_qdro(Instance(p, threshold + 1e-6, QExponent::finite(2))).degenerate);
  const auto below = qdro::solve_qdro(Instance(p, threshold - 1e-3, QExponent::finite(2)));
  CHECK_FALSE(below.degenerate);
  CHECK(below.status == SolverStatus::Converged);
}

TEST_CASE("objective examples") {
  const auto u = Distribution::uniform(4);
  const Instance inst(dist({0.1, 0.2, 0.3, 0.4}), 0.2, QExponent::finite(2));
  CHECK(qdro::objective_full(u, {}, std::log(4.0), inst) == doctest::Approx(std::log(4.0)));
  CHECK(qdro::objective_regularized(u, std::log(4.0), inst) == doctest::Approx(std::log(4.0)));

  const auto p = dist({0.1, 0.2, 0.3, 0.4});
  const Instance pass(p, 0.0, QExponent::finite(2));
  CHECK(qdro::objective_full(p, {}, 0.7, pass) == doctest::Approx(qdro::entropy(p.probs())));

  std::mt19937_64 rng(31);
  for (int k = 0; k < 20; ++k) {
    const auto x = dist(oracle::random_interior_simplex(4, 0.01, rng));
    const double beta = 0.1 * k;
    const std::vector<double> zeros(4, 0.0);
    CHECK(qdro::objective_regularized(x, beta, inst) == qdro::objective_full(x, zeros, beta, inst));
    CHECK(qdro::objective_full(x, zeros, beta, inst) ==
          doctest::Approx(oracle::objective_full(inst.p_hat.probs(), x.probs(), beta, zeros, 0.2, inst.q)));
  }
}

TEST_CASE("optimal_baseline per exponent") {
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  std::vector<double> c(4);
  for (std::size_t j = 0; j < 4; ++j) c[j] = -std::log(x[j]);
  CHECK(qdro::optimal_baseline(x, QExponent::finite(2)) ==
        doctest::Approx(std::accumulate(c.begin(), c.end(), 0.0) / 4.0).epsilon(1e-12));
  CHECK(qdro::optimal_baseline(x, QExponent::finite(1)) == doctest::Approx(0.5 * (c[0] + c[3])));
  CHECK(qdro::optimal_baseline(x, QExponent::infinity()) == doctest::Approx(0.5 * (c[1] + c[2])));
  // Interior q: the baseline minimizes the dual norm, checked against neighbours.
  const auto q3 = QExponent::finite(3);
  const double b = qdro::optimal_baseline(x, q3);
  auto norm_at = [&](double beta) {
    std::vector<double> y(4);
    for (std::size_t j = 0; j < 4; ++j) y[j] = c[j] - beta;
    return oracle::dual_norm(y, q3);
  };
  CHECK(norm_at(b) <= norm_at(b + 1e-4));
  CHECK(norm_at(b) <= norm_at(b - 1e-4));
}

TEST_CASE("KKT residuals at the experiment-1 optimum") {
  const auto inst = qdro::experiment1_instance();
  const auto sol = qdro::solve_qdro(inst);
  const auto r = qdro::kkt_residuals(sol, inst);
  CHECK(r.max_residual <= 1e-6);
  CHECK(r.gamma_deviation <= 1e-6);
  CHECK(r.xi_deviation <= 1e-6);
  for (double xi : r.xi) CHECK(xi >= 0.0);
  CHECK(oracle::fixed_point_residual(inst.p_hat.probs(), sol.x.probs(), sol.beta, inst.epsilon, inst.q) <= 1e-9);
}

TEST_CASE("KKT residuals reject degenerate and flag perturbed solutions") {
  const Instance wide(dist({0.1, 0.2, 0.3, 0.4}), 5.0, QExponent::finite(2));
  const auto degenerate = qdro::solve_qdro(wide);
  CHECK_THROWS_AS(qdro::kkt_residuals(degenerate, wide), qdro::Error);

  const auto inst = qdro::experiment1_instance();
  const auto sol = qdro::solve_qdro(inst);
  std::vector<double> shifted = sol.x.vec();
  shifted[0] += 0.01;
  const auto moved = qdro::make_solution(Distribution::normalized(shifted), sol.beta, {}, inst);
  const auto r = qdro::kkt_residuals(moved, inst);
  MESSAGE("perturbed KKT residual ", r.max_residual);
  CHECK(r.max_residual > 1e-6);

  CHECK_THROWS_AS(qdro::kkt_residuals(qdro::solve_qdro(Instance(dist({0.1, 0.9}), 0.1, QExponent::infinity())),
                                      Instance(dist({0.1, 0.9}), 0.1, QExponent::infinity())),
                  qdro::Error);
}

TEST_CASE("duality gap examples") {
  const auto inst = qdro::experiment1_instance();
  const auto sol = qdro::solve_qdro(inst);
  CHECK(std::abs(qdro::duality_gap(sol, inst)) <= 1e-4);

  const Instance wide(dist({0.1, 0.2, 0.3, 0.4}), 5.0, QExponent::finite(2));
  CHECK(std::abs(qdro::duality_gap(qdro::solve_qdro(wide), wide)) <= 1e-4);

  // Laplace output with the entropy warm-start baseline and lambda = 0.
  const auto lap = qdro::laplace_smooth(inst.p_hat, qdro::Pseudocount(0.1));
  const auto lap_sol = qdro::make_solution(lap, qdro::entropy(lap.probs()), {}, inst);
  const double gap = qdro::duality_gap(lap_sol, inst);
  MESSAGE("laplace duality gap ", gap, ", optimality gap ", qdro::optimality_gap(lap, inst));
  CHECK(gap > 0.0);
  CHECK(qdro::optimality_gap(lap, inst) > 1e-4);
}

TEST_CASE("certify") {
  const auto inst = qdro::experiment1_instance();
  const auto cert = qdro::certify(qdro::solve_qdro(inst), inst);
  CHECK(cert.passed);
  CHECK(cert.kkt.has_value());
  CHECK(cert.assumption1);
  CHECK(cert.norm_active);

  const Instance wide(dist({0.1, 0.2, 0.3, 0.4}), 5.0, QExponent::finite(2));
  const auto degen = qdro::certify(qdro::solve_qdro(wide), wide);
  CHECK(degen.passed);
  CHECK_FALSE(degen.kkt.has_value());
  CHECK_FALSE(degen.assumption1);

  const Instance inf(dist({0.0, 0.2, 0.3, 0.5}), 0.2, QExponent::infinity());
  const auto boundary = qdro::certify(qdro::solve_qdro(inf), inf);
  CHECK(boundary.passed);
  CHECK_FALSE(boundary.kkt.has_value());
}

TEST_CASE("positivity on random instances with empty categories") {
  std::mt19937_64 rng(32);
  for (int k = 0; k < 100; ++k) {
    const auto inst = oracle::random_instance(rng);
    const auto sol = qdro::solve_qdro(inst);
    CHECK(sol.status != SolverStatus::MaxIterations);
    CHECK(sol.x.min() > 1e-9);
    CHECK(qdro::certify(sol, inst).passed);
  }
}

TEST_CASE("permuting p_hat permutes x") {
  std::mt19937_64 rng(33);
  SolverSettings raw;
  raw.symmetrize = false;
  for (int k = 0; k < 30; ++k) {
    const auto inst = oracle::random_instance(rng);
    std::vector<std::size_t> perm(inst.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> permuted(inst.size());
    for (std::size_t j = 0; j < perm.size(); ++j) permuted[j] = inst.p_hat[perm[j]];
    const auto a = qdro::solve_qdro(inst, raw);
    const auto b = qdro::solve_qdro(Instance(dist(permuted), inst.epsilon, inst.q), raw);
    for (std::size_t j = 0; j < perm.size(); ++j) CHECK(std::abs(b.x[j] - a.x[perm[j]]) <= 1e-6);
  }
}

TEST_CASE("interior exponents: order preservation and the pairwise identity") {
  std::mt19937_64 rng(34);
  int checked = 0;
  for (int k = 0; k < 200; ++k) {
    const auto inst = oracle::random_instance(rng);
    if (!inst.q.is_interior()) continue;
    const auto sol = qdro::solve_qdro(inst);
    if (sol.degenerate) continue;
    ++checked;
    const auto& p = inst.p_hat;
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[i] < p[j]) {
          CHECK(sol.x[i] <= sol.x[j]);
          if (p[j] - p[i] > 1e-5) CHECK(sol.x[i] != sol.x[j]);
        }
      }
    }
    CHECK(oracle::pairwise_identity_residual(p.probs(), sol.x.probs(), sol.beta, inst.epsilon, inst.q) <= 1e-6);
  }
  CHECK(checked > 30);
}

TEST_CASE("free lambda converges to zero") {
  std::mt19937_64 rng(35);
  for (int k = 0; k < 20; ++k) {
    oracle::RandomInstanceSpec spec;
    const auto inst = oracle::random_instance(rng, spec);
    if (!inst.q.is_interior()) continue;
    const auto sol = qdro::solve_qdro_full(inst, SolverSettings{}, std::vector<double>(inst.size(), 0.5));
    for (double l : sol.lambda) CHECK(std::abs(l) <= 1e-6);
    const auto ref = qdro::solve_qdro(inst);
    for (std::size_t j = 0; j < inst.size(); ++j) CHECK(std::abs(sol.x[j] - ref.x[j]) <= 1e-5);
  }
}

TEST_CASE("diminishing subgradient path approaches the same optimum") {
  SolverSettings s;
  s.step_policy = qdro::StepPolicy::Diminishing;
  const auto inst = qdro::experiment1_instance();
  const auto sol = qdro::solve_qdro(inst, s);
  const auto printed = qdro::experiment1_expected();
  for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(sol.x[j] - printed[j]) <= 1e-3);

  const Instance inf(dist({0.0, 0.2, 0.3, 0.5}), 0.2, QExponent::infinity());
  const auto b = qdro::solve_qdro(inf, s);
  const std::vector<double> expected{0.20, 0.25, 0.25, 0.30};
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(b.x[j] - expected[j]) <= 1e-2);
}

TEST_CASE("shrinkage toward uniform along the radius grid") {
  const auto p = dist({0.1, 0.2, 0.3, 0.4});
  const auto u = Distribution::uniform(4);
  double prev = INFINITY;
  for (double eps : qdro::default_eps_grid()) {
    const auto sol = qdro::solve_qdro(Instance(p, eps, QExponent::finite(2)));
    double d = 0.0;
    for (std::size_t j = 0; j < 4; ++j) d += (sol.x[j] - u[j]) * (sol.x[j] - u[j]);
    d = std::sqrt(d);
    CHECK(d <= prev + 1e-12);
    prev = d;
  }
}

TEST_CASE("iteration budget is reported, not thrown") {
  SolverSettings s;
  s.max_iterations = 1;
  const auto sol = qdro::solve_qdro(qdro::experiment1_instance(), s);
  CHECK(sol.status == SolverStatus::MaxIterations);
  CHECK(sol.x.min() > 0.0);
  SolverSettings bad;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(bad.validate(), qdro::Error);
}

TEST_CASE("batch solve matches serial solve exactly") {
  std::mt19937_64 rng(36);
  std::vector<Instance> instances;
  for (int k = 0; k < 64; ++k) instances.push_back(oracle::random_instance(rng));
  const auto par = qdro::solve_batch(instances);
  const auto ser = qdro::solve_batch_serial(instances);
  REQUIRE(par.size() == ser.size());
  for (std::size_t k = 0; k < par.size(); ++k) {
    CHECK(par[k].x == ser[k].x);
    CHECK(par[k].beta == ser[k].beta);
    CHECK(par[k].iterations == ser[k].iterations);
  }
}

TEST_CASE("batch solve propagates the first failure in input order") {
  std::vector<Instance> instances{Instance(dist({0.5, 0.5}), 0.1, QExponent::finite(2)),
                                  Instance(dist({0.0, 1.0}), 0.0, QExponent::finite(2))};
  CHECK_THROWS_AS(qdro::solve_batch(instances), qdro::Error);
}
