#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "fraclab/rearrange.hpp"
#include "fraclab/seminorm.hpp"
#include "test_helpers.hpp"

using namespace fraclab;
using Catch::Approx;

TEST_CASE("two blocks rearrange into one centred interval") {
  // indicator-like of [0,1] u [2,3] with thin ramps
  const double d = 1e-9;
  PiecewiseFunction1D u({0.0, d, 1.0 - d, 1.0, 2.0, 2.0 + d, 3.0 - d, 3.0},
                        {0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0});
  const auto star = rearrange(u);
  CHECK(star.monotone_nonincreasing());
  // total mass 2 -> ball (-1, 1)
  CHECK(star.support_radius() == Approx(1.0).margin(1e-6));
  CHECK(star(0.0) == Approx(1.0));
  CHECK(star(0.5) == Approx(1.0).margin(1e-6));
  for (double q : {1.0, 2.0})
    CHECK(lq_power_integral(star, q, 1) == Approx(lq_power_integral_line(u, q)).epsilon(1e-8));
}

TEST_CASE("already decreasing radial input is reproduced exactly") {
  RadialProfile u({0.0, 0.3, 1.0, 2.5}, {2.0, 1.5, 0.4, 0.0});
  for (int n : {1, 2, 3}) {
    const auto star = rearrange(u, n);
    for (double r : {0.0, 0.2, 0.45, 1.7, 2.49})
      CHECK(star(r) == Approx(u(r)).margin(1e-10));
    CHECK(star.support_radius() == Approx(u.support_radius()).margin(1e-12));
  }
}

TEST_CASE("equimeasurability: Lq norms preserved for 50 random tent sums") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const auto u = testing::random_tent_sum(rng, 3 + trial % 4);
    const auto star = rearrange(u);
    CHECK(star.monotone_nonincreasing());
    for (double q : {1.0, 2.0, 4.0}) {
      const double before = lq_power_integral_line(u, q);
      const double after = lq_power_integral(star, q, 1);
      if (before > 0.0) CHECK(after == Approx(before).epsilon(1e-9));
    }
  }
}

TEST_CASE("radial rearrangement preserves norms within the resampling error") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    // random non-monotone radial profile
    std::vector<double> r{0.0}, v{U(rng)};
    double rr = 0.0;
    for (int i = 0; i < 24; ++i) {
      rr += 0.05 + 0.2 * U(rng);
      r.push_back(rr);
      v.push_back(U(rng));
    }
    r.push_back(rr + 0.3);
    v.push_back(0.0);
    RadialProfile u(r, v);
    const auto star = rearrange(u, 2);
    CHECK(star.monotone_nonincreasing());
    for (double q : {1.0, 2.0})
      CHECK(lq_power_integral(star, q, 2) == Approx(lq_power_integral(u, q, 2)).epsilon(2e-4));
  }
}

TEST_CASE("Polya-Szego: rearrangement does not increase the seminorm") {
  std::mt19937_64 rng(31337);
  QuadratureSpec spec;
  spec.cells_per_dim = 96;
  spec.error_check = false;
  for (int trial = 0; trial < 25; ++trial) {
    const auto u = testing::random_tent_sum(rng, 3 + trial % 3);
    if (u.max_abs() == 0.0) continue;
    const auto star = rearrange(u);
    const double eu = gagliardo_1d_result(u, 0.5, 2.0, spec).value;
    const double es = gagliardo_1d_result(mirror_to_line(star), 0.5, 2.0, spec).value;
    CHECK(es <= eu * (1.0 + 1e-6));
  }
}

TEST_CASE("zero input") {
  PiecewiseFunction1D z({0.0, 1.0}, {0.0, 0.0});
  const auto star = rearrange(z);
  CHECK(star.values().back() == 0.0);
  CHECK(lq_power_integral(star, 2.0, 1) == 0.0);
}
