#include <array>
#include <cmath>
#include <limits>

#include "qdro/inner_adversary.hpp"
#include "qdro/norms.hpp"

namespace qdro {

namespace {

constexpr std::size_t kMaxDim = 4;
using Counts = std::array<int, kMaxDim>;

struct LatticeBest {
  double loss = -std::numeric_limits<double>::infinity();
  Counts counts{};
  bool found = false;
};

struct Lattice {
  std::size_t n;
  int m;
  std::array<double, kMaxDim> cost{};
  std::array<double, kMaxDim> p_hat{};
  double epsilon;
  QExponent q;

  // Loss of a lattice point, or -inf when it leaves the ambiguity set.
  double evaluate(const Counts& k) const {
    std::array<double, kMaxDim> e{};
    double loss = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double p = static_cast<double>(k[j]) / m;
      e[j] = p - p_hat[j];
      if (k[j] > 0) loss += p * cost[j];
    }
    if (q_norm(std::span<const double>(e.data(), n), q) > epsilon + 1e-12) {
      return -std::numeric_limits<double>::infinity();
    }
    return loss;
  }

  // Scans every composition with the first count fixed, in lexicographic order.
  LatticeBest scan_slice(int k0) const {
    LatticeBest best;
    Counts k{};
    k[0] = k0;
    const int rest = m - k0;
    auto consider = [&]() {
      const double loss = evaluate(k);
      if (loss > best.loss) {
        best.loss = loss;
        best.counts = k;
        best.found = true;
      }
    };
    if (n == 2) {
      k[1] = rest;
      consider();
    } else if (n == 3) {
      for (int a = 0; a <= rest; ++a) {
        k[1] = a;
        k[2] = rest - a;
        consider();
      }
    } else {
      for (int a = 0; a <= rest; ++a) {
        for (int b = 0; b <= rest - a; ++b) {
          k[1] = a;
          k[2] = b;
          k[3] = rest - a - b;
          consider();
        }
      }
    }
    return best;
  }
};

Lattice make_lattice(const Distribution& x, const Instance& inst, double grid_step) {
  const std::size_t n = inst.size();
  if (n > kMaxDim) throw Error(ErrorCode::TooLarge, "brute force supports n <= 4");
  if (!(grid_step >= 1e-3) || grid_step > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "grid_step must lie in [1e-3, 1]");
  }
  if (x.size() != n) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
  Lattice lat{.n = n, .m = static_cast<int>(std::lround(1.0 / grid_step)),
              .epsilon = inst.epsilon, .q = inst.q};
  for (std::size_t j = 0; j < n; ++j) {
    if (x[j] <= 0.0 && (inst.epsilon > 0.0 || inst.p_hat[j] > 0.0)) {
      throw Error(ErrorCode::UnboundedLoss, "x has a zero component that can receive mass");
    }
    lat.cost[j] = -safe_log(x[j]);
    lat.p_hat[j] = inst.p_hat[j];
  }
  return lat;
}

WorstCase finish(const Distribution& x, const Instance& inst, const Lattice& lat,
                 const LatticeBest& best) {
  // p_hat is always feasible; a lattice point must beat it strictly.
  const double base = cross_entropy(inst.p_hat, x);
  std::vector<double> p(inst.p_hat.vec());
  if (best.found && best.loss > base) {
    for (std::size_t j = 0; j < lat.n; ++j) p[j] = static_cast<double>(best.counts[j]) / lat.m;
  }
  std::vector<double> e(lat.n);
  for (std::size_t j = 0; j < lat.n; ++j) e[j] = p[j] - inst.p_hat[j];
  WorstCase wc{.e = e, .p = Distribution::normalized(p)};
  wc.loss = cross_entropy(wc.p, x);
  wc.norm_active = q_norm(e, inst.q) >= inst.epsilon - Tolerances{}.cert_tol;
  wc.nu_estimate = 0.0;
  wc.beta = std::nan("");
  wc.dual_bound = std::nan("");
  return wc;
}

}  // namespace

WorstCase brute_force_worst_case(const Distribution& x, const Instance& inst, double grid_step) {
  const Lattice lat = make_lattice(x, inst, grid_step);
  std::vector<LatticeBest> slices(static_cast<std::size_t>(lat.m) + 1);
#pragma omp parallel for schedule(dynamic)
  for (int k0 = 0; k0 <= lat.m; ++k0) slices[static_cast<std::size_t>(k0)] = lat.scan_slice(k0);

  LatticeBest best;
  for (const LatticeBest& s : slices) {
    if (s.found && s.loss > best.loss) best = s;
  }
  return finish(x, inst, lat, best);
}

WorstCase brute_force_worst_case_serial(const Distribution& x, const Instance& inst,
                                        double grid_step) {
  const Lattice lat = make_lattice(x, inst, grid_step);
  LatticeBest best;
  Counts k{};
  // Plain recursive enumeration of compositions of m into n parts.
  auto recurse = [&](auto&& self, std::size_t dim, int remaining) -> void {
    if (dim + 1 == lat.n) {
      k[dim] = remaining;
      const double loss = lat.evaluate(k);
      if (loss > best.loss) {
        best.loss = loss;
        best.counts = k;
        best.found = true;
      }
      return;
    }
    for (int a = 0; a <= remaining; ++a) {
      k[dim] = a;
      self(self, dim + 1, remaining - a);
    }
  };
  recurse(recurse, 0, lat.m);
  return finish(x, inst, lat, best);
}

}  // namespace qdro
