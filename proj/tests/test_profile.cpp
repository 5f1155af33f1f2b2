#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "fraclab/profile.hpp"
#include "test_helpers.hpp"

using namespace fraclab;
using Catch::Approx;

TEST_CASE("piecewise function basics") {
  PiecewiseFunction1D u({0.0, 1.0, 2.0}, {0.0, 3.0, 0.0});
  CHECK(u(0.5) == Approx(1.5));
  CHECK(u(1.5) == Approx(1.5));
  CHECK(u(-1.0) == 0.0);
  CHECK(u(5.0) == 0.0);
  CHECK(u.zero_boundary());
  CHECK_THROWS_AS(PiecewiseFunction1D({0.0, 0.0}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseFunction1D({0.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("radial profile validation and support") {
  RadialProfile u({0.0, 1.0, 2.0}, {2.0, 1.0, 0.0});
  CHECK(u.monotone_nonincreasing());
  CHECK(u.support_radius() == Approx(2.0));
  CHECK(u.compactly_supported());
  CHECK(u(0.5) == Approx(1.5));
  CHECK(u(3.0) == 0.0);
  CHECK_THROWS_AS(RadialProfile({0.5, 1.0}, {1.0, 0.0}), std::invalid_argument);
  RadialProfile w({0.0, 1.0, 2.0}, {1.0, 2.0, 0.0});
  CHECK_FALSE(w.monotone_nonincreasing());
}

TEST_CASE("mirror and transforms") {
  RadialProfile u({0.0, 1.0, 2.0}, {2.0, 1.0, 0.0});
  const auto line = mirror_to_line(u);
  CHECK(line.xs().front() == Approx(-2.0));
  CHECK(line(0.0) == Approx(2.0));
  CHECK(line(-1.0) == Approx(1.0));
  CHECK(line(1.0) == Approx(1.0));

  SECTION("dilate identity and support scaling") {
    const auto same = dilate(u, 1.0);
    CHECK(same.support_radius() == Approx(u.support_radius()));
    const auto half = dilate(u, 2.0);  // u(2x): support halves
    CHECK(half.support_radius() == Approx(1.0));
    const auto moved = translate_dilate(line, 3.0, 2.0);
    CHECK(moved.support_lo() == Approx(3.0 - 4.0));
    CHECK(moved.support_hi() == Approx(3.0 + 4.0));
    CHECK_THROWS_AS(dilate(u, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(dilate(u, -1.0), std::invalid_argument);
  }

  SECTION("composed norm law ||u((x-x0)/l)||_q^q = l^n ||u||_q^q") {
    for (double q : {1.0, 2.0, 3.5}) {
      const double base = lq_power_integral_line(line, q);
      const auto v = translate_dilate(line, 0.7, 3.0);
      CHECK(lq_power_integral_line(v, q) == Approx(3.0 * base).epsilon(1e-10));
    }
  }
}

TEST_CASE("exact Lq integrals") {
  // indicator-like block on [0,1] in n=1: ||u||_2^2 = omega_0 * 1 = 2
  RadialProfile block({0.0, 1.0 - 1e-9, 1.0}, {1.0, 1.0, 0.0});
  CHECK(lq_norm(block, 2.0, 1) == Approx(std::sqrt(2.0)).margin(1e-6));

  // triangle u = 1 - r on [0,1], n = 2: int r (1-r)^2 dr = 1/12
  RadialProfile cone({0.0, 1.0}, {1.0, 0.0});
  CHECK(lq_power_integral(cone, 2.0, 2) == Approx(2.0 * kPi / 12.0).epsilon(1e-12));
  // and n = 3: int r^2 (1-r)^3 dr = 1/60
  CHECK(lq_power_integral(cone, 3.0, 3) == Approx(4.0 * kPi / 60.0).epsilon(1e-12));

  SECTION("closed form matches dense Gauss on random signed segments") {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      const double a = 0.1 + U(rng), h = 0.01 + U(rng);
      const double va = -1.0 + 2.0 * U(rng);
      const double vb = (trial % 5 == 0) ? va + 1e-12 * U(rng) : -1.0 + 2.0 * U(rng);
      const double q = 1.0 + 3.0 * U(rng);
      const int n = 1 + static_cast<int>(3.0 * U(rng));
      RadialProfile seg({0.0, a, a + h, a + h + 0.1}, {0.0, va, vb, 0.0});
      // reference by adaptive quadrature (handles the |u|^q Holder points)
      auto f = [&](double x) { return std::pow(x, n - 1) * std::pow(std::abs(seg(x)), q); };
      double ref = 0.0;
      const double pts[3][2] = {{0.0, a}, {a, a + h}, {a + h, a + h + 0.1}};
      for (int piece = 0; piece < 3; ++piece) {
        const double lo = pts[piece][0], hi = pts[piece][1];
        std::vector<double> cuts{lo, hi};
        const double ulo = seg(lo), uhi = seg(hi);
        if ((ulo > 0 && uhi < 0) || (ulo < 0 && uhi > 0))
          cuts.insert(cuts.begin() + 1, lo + (hi - lo) * ulo / (ulo - uhi));
        for (size_t c = 0; c + 1 < cuts.size(); ++c)
          ref += adaptive_simpson(f, cuts[c], cuts[c + 1], 1e-14);
      }
      ref *= surface_measure(n);
      CHECK(lq_power_integral(seg, q, n) == Approx(ref).epsilon(2e-8).margin(1e-13));
    }
  }

  SECTION("radial n=1 agrees with the mirrored line integral") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      auto f = testing::random_tent_sum(rng);
      // build a radial profile from |x| >= 0 part of an even function
      std::vector<double> r{0.0}, v{f(0.0)};
      for (double x : f.xs())
        if (x > 0) {
          r.push_back(x);
          v.push_back(f(x));
        }
      if (r.size() < 2) continue;
      RadialProfile prof(r, v);
      const auto mirrored = mirror_to_line(prof);
      for (double q : {1.0, 2.0, 4.0})
        CHECK(lq_power_integral(prof, q, 1) ==
              Approx(lq_power_integral_line(mirrored, q)).epsilon(1e-11).margin(1e-14));
    }
  }
}

TEST_CASE("absolute splits at sign changes") {
  PiecewiseFunction1D u({0.0, 1.0, 2.0}, {0.0, -2.0, 0.0});
  const auto a = absolute(u);
  CHECK(a(1.0) == Approx(2.0));
  CHECK(a(0.5) == Approx(1.0));
  PiecewiseFunction1D w({0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, -1.0, 0.0});
  const auto aw = absolute(w);
  CHECK(aw(1.5) == Approx(0.0).margin(1e-14));
  CHECK(lq_power_integral_line(aw, 2.0) == Approx(lq_power_integral_line(w, 2.0)).epsilon(1e-13));
}

TEST_CASE("grid function sampling and rotation") {
  auto bump = [](double x, double y) {
    const double r2 = x * x + y * y;
    return r2 < 1.0 ? (1.0 - r2) * (1.0 - r2) : 0.0;
  };
  const auto g = GridFunction2D::sample(bump, -1.2, -1.2, 0.05, 0.05, 49, 49);
  CHECK(g(0.0, 0.0) == Approx(1.0));
  CHECK(g(2.0, 0.0) == 0.0);
  CHECK(g(0.3, -0.4) == Approx(bump(0.3, -0.4)).margin(2e-3));
  const auto r = g.rotated90();
  CHECK(r(0.3, -0.4) == Approx(g(-0.4, -0.3)).margin(1e-12));
}
