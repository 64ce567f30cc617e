#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "qdro/axioms.hpp"
#include "qdro/laplace.hpp"

using qdro::Distribution;
using qdro::Pseudocount;

TEST_CASE("laplace_smooth examples") {
  const auto a = qdro::laplace_smooth(qdro::validate_distribution(std::vector<double>{0, 1}), Pseudocount(1));
  CHECK(a[0] == doctest::Approx(1.0 / 3.0));
  CHECK(a[1] == doctest::Approx(2.0 / 3.0));

  const auto u = qdro::laplace_smooth(Distribution::uniform(5), Pseudocount(3.7));
  for (double v : u.probs()) CHECK(v == doctest::Approx(0.2));

  const auto p = qdro::validate_distribution(std::vector<double>{0.00, 0.15, 0.15, 0.30, 0.40});
  const auto x = qdro::laplace_smooth(p, Pseudocount(0.1));
  const std::vector<double> expected{0.1 / 1.5, 0.25 / 1.5, 0.25 / 1.5, 0.40 / 1.5, 0.50 / 1.5};
  for (std::size_t j = 0; j < 5; ++j) CHECK(x[j] == doctest::Approx(expected[j]).epsilon(1e-12));
  CHECK(x[0] == doctest::Approx(0.066667).epsilon(1e-5));
}

TEST_CASE("Pseudocount must be positive") {
  CHECK_THROWS_AS(Pseudocount(0.0), qdro::Error);
  CHECK_THROWS_AS(Pseudocount(-1.0), qdro::Error);
}

TEST_CASE("laplace limits in c") {
  const auto p = qdro::validate_distribution(std::vector<double>{0.1, 0.2, 0.7});
  const auto small = qdro::laplace_smooth(p, Pseudocount(1e-6));
  const auto large = qdro::laplace_smooth(p, Pseudocount(1e6));
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std::abs(small[j] - p[j]) <= 1e-4);
    CHECK(std::abs(large[j] - 1.0 / 3.0) <= 1e-4);
  }
}

TEST_CASE("laplace satisfies all four axioms with quotient 1/(1+nc)") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  for (int k = 0; k < 40; ++k) {
    const auto p = qdro::validate_distribution(oracle::random_grid_simplex(size(rng), rng));
    for (double c : {0.01, 0.1, 1.0, 10.0}) {
      const auto x = qdro::laplace_smooth(p, Pseudocount(c));
      const auto r = qdro::check_axioms(p, x, 1e-12);
      CHECK(r.positivity.pass);
      CHECK(r.symmetry.pass);
      CHECK(r.order_preservation.pass);
      CHECK(r.ratio_preservation.pass);
      if (r.ratio_preservation.pairs_checked > 0) {
        const double expected = 1.0 / (1.0 + static_cast<double>(p.size()) * c);
        CHECK(r.ratio_preservation.min_quotient == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }
}
