#include <catch2/catch_amalgamated.hpp>

#include "fraclab/constants.hpp"

using namespace fraclab;
using Catch::Approx;

TEST_CASE("surface measure of small spheres") {
  CHECK(surface_measure(1) == Approx(2.0).epsilon(1e-15));
  CHECK(std::abs(surface_measure(2) - 2.0 * kPi) <= 8 * std::numeric_limits<double>::epsilon() * kPi);
  CHECK(surface_measure(3) == Approx(4.0 * kPi).epsilon(1e-14));
  CHECK(surface_measure(7) == Approx(std::pow(kPi, 3.5) * 7 / std::tgamma(4.5)).epsilon(1e-14));
  CHECK_THROWS_AS(surface_measure(0), std::invalid_argument);
  CHECK_THROWS_AS(surface_measure(-2), std::invalid_argument);
}

TEST_CASE("limit constant K(p,n)") {
  CHECK(bbm_constant(2, 2) == Approx(kPi / 2).epsilon(1e-13));
  CHECK(bbm_constant(1, 1) == Approx(2.0).epsilon(1e-14));
  // Gamma(5/2) = (3/2) Gamma(3/2) collapses K(2,3) to 2 pi / 3
  CHECK(bbm_constant(2, 3) == Approx(2.0 * kPi / 3.0).epsilon(1e-13));
  CHECK_THROWS_AS(bbm_constant(0.5, 2), std::invalid_argument);
}

TEST_CASE("gamma series closed-form anchors") {
  const SeriesResult g12 = gamma_series(1, 2.0, 1e-10);
  CHECK(g12.value == Approx(2.0 * kPi * kPi).margin(1e-9));
  CHECK(g12.tail_bound <= 1e-10);
  CHECK(g12.terms_used >= 1);

  // references from 50-digit zeta/gamma evaluations
  CHECK(gamma_series(1, 2.5, 1e-10).value == Approx(29.360970283796614906).margin(1e-9));
  CHECK(gamma_series(2, 2.5, 1e-10).value == Approx(60.589383411413193434).margin(1e-9));
  CHECK(gamma_series(2, 4.0, 1e-10).value == Approx(71.182956610702660255).margin(1e-9));
  CHECK(gamma_series(3, 4.0, 1e-10).value == Approx(69.173299610908269936).margin(1e-9));
  CHECK(gamma_series(2, 3.0, 1e-10).value == Approx(48.704545517001218618).margin(1e-9));
}

TEST_CASE("gamma series brute-force cross-check") {
  // direct 1e7-term summation, trustworthy for fast-decaying terms (p >> n)
  const int n = 2;
  const double p = 4.0;
  double t = 1.0 / std::pow(2.0, p);  // (n-1)!/n^p with n=2
  double sum = t;
  for (long k = 0; k < 10000000; ++k) {
    const double y = n + 2.0 * k;
    t *= (n + static_cast<double>(k)) / (k + 1.0) * std::pow(y / (y + 2.0), p);
    sum += t;
  }
  const double pref = 2.0 * std::pow(surface_measure(2), 2) * std::tgamma(p + 1.0) / 2.0;
  CHECK(gamma_series(n, p, 1e-10).value == Approx(pref * sum).epsilon(1e-7));
}

TEST_CASE("gamma series partial sums increase") {
  for (int T = 1; T <= 40; ++T) {
    CHECK(gamma_series_partial_sum(1, 2.0, T) < gamma_series_partial_sum(1, 2.0, T + 1));
    CHECK(gamma_series_partial_sum(3, 3.5, T) < gamma_series_partial_sum(3, 3.5, T + 1));
  }
}

TEST_CASE("gamma series tail bound dominates the true remainder") {
  const std::pair<int, double> cases[] = {{1, 2.0}, {1, 2.5}, {1, 5.0}, {2, 2.2},  {2, 2.5},
                                          {2, 4.0}, {3, 3.3}, {3, 4.0}, {4, 4.25}, {5, 6.0}};
  for (const auto& [n, p] : cases) {
    const SeriesResult loose = gamma_series(n, p, 1e-5);
    const SeriesResult tight = gamma_series(n, p, 1e-12);
    CHECK(std::abs(loose.value - tight.value) <= loose.tail_bound + 1e-12 * tight.value);
  }
}

TEST_CASE("gamma series rejects bad arguments") {
  CHECK_THROWS_AS(gamma_series(1, 0.9, 1e-8), std::invalid_argument);
  CHECK_THROWS_AS(gamma_series(1, 1.0, 1e-8), std::invalid_argument);
  CHECK_THROWS_AS(gamma_series(0, 2.0, 1e-8), std::invalid_argument);
  // divergent region p <= n
  CHECK_THROWS_AS(gamma_series(2, 2.0, 1e-8), convergence_error);
  CHECK_THROWS_AS(gamma_series(3, 2.5, 1e-8), convergence_error);
}

TEST_CASE("alpha star") {
  const auto prm = CriticalParams::critical(1, 0.5);
  CHECK(prm.p == Approx(2.0));
  CHECK(alpha_star(prm) == Approx(2.0 * kPi * kPi).margin(1e-8));
  CHECK(alpha_star_from_gamma(3, 0.25, 1.0) == Approx(3.0));  // unit base
  const auto prm2 = CriticalParams::critical(2, 0.5);
  CHECK(alpha_star(prm2) > 0.0);
  CHECK(alpha_star(prm2) == Approx(2.0 * std::pow(71.182956610702660255, 1.0 / 3.0)).margin(1e-6));
}

TEST_CASE("critical params validation") {
  CHECK_THROWS_AS(CriticalParams::critical(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(CriticalParams::critical(1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(CriticalParams::general(2, 0.5, 0.5), std::invalid_argument);
  const auto prm = CriticalParams::critical(2, 0.5);
  CHECK(prm.is_critical());
  CHECK(prm.q() == Approx(2.0 / (2.0 - 0.5)));  // p/(p-1) == n/(n-s)
  CHECK_FALSE(CriticalParams::general(2, 0.5, 3.9).is_critical());
}

TEST_CASE("truncated exponential") {
  CHECK(truncated_exp(1, 0.0) == 0.0);
  CHECK(truncated_exp(2, 1.0) == Approx(std::exp(1.0) - 2.0).epsilon(1e-14));
  CHECK(truncated_exp(1, 1e-12) == Approx(1e-12).epsilon(1e-9));
  // ascending-series regime: Psi_3(z) ~ z^3/6 for tiny z
  CHECK(truncated_exp(3, 1e-8) == Approx(std::pow(1e-8, 3) / 6.0).epsilon(1e-7));
  CHECK_THROWS_AS(truncated_exp(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(truncated_exp(2, -0.1), std::invalid_argument);

  SECTION("derivative recurrence d/dz Psi_k = Psi_{k-1}") {
    const double h = 1e-6;
    for (int k : {2, 3, 5}) {
      for (double z : {0.3, 1.7, 6.0}) {
        const double fd = (truncated_exp(k, z + h) - truncated_exp(k, z - h)) / (2 * h);
        CHECK(fd == Approx(truncated_exp(k - 1, z)).epsilon(1e-7));
      }
    }
  }

  SECTION("pointwise ordering and monotonicity") {
    double prev = 0.0;
    for (double z = 0.0; z <= 12.0; z += 0.25) {
      const double v2 = truncated_exp(2, z);
      CHECK(v2 >= prev);
      prev = v2;
      CHECK(truncated_exp(3, z) <= v2 * (1 + 1e-14) + 1e-300);
      CHECK(v2 <= truncated_exp(1, z) * (1 + 1e-14) + 1e-300);
    }
  }

  SECTION("log form agrees and survives huge arguments") {
    CHECK(log_truncated_exp(2, 5.0) == Approx(std::log(truncated_exp(2, 5.0))).epsilon(1e-12));
    CHECK(log_truncated_exp(2, 900.0) == Approx(900.0).epsilon(1e-12));
    CHECK(std::isfinite(log_truncated_exp(3, 5000.0)));
  }
}

TEST_CASE("polynomial bound for Psi_k") {
  CHECK(psi_polynomial_bound(1, 1.0) == Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
  CHECK(psi_polynomial_bound(1, 1e-9) == Approx(1.0).epsilon(1e-8));
  CHECK(psi_polynomial_bound(3, 1e-9) == Approx(1.0 / 6.0).epsilon(1e-8));

  // sup property: Psi_k(z) <= C z^k on (0, M]
  for (int k : {1, 2, 4}) {
    const double M = 3.0;
    const double C = psi_polynomial_bound(k, M);
    for (int i = 1; i <= 1000; ++i) {
      const double z = M * i / 1000.0;
      CHECK(truncated_exp(k, z) <= C * std::pow(z, k) * (1 + 1e-12));
    }
    // attained at z = M
    CHECK(truncated_exp(k, M) == Approx(C * std::pow(M, k)).epsilon(1e-12));
  }
}

TEST_CASE("asymptotic ratio approaches the sphere measure") {
  // frozen 50-digit reference at (s, n) = (0.9, 2)
  CHECK(asymptotic_ratio(0.9, 2) == Approx(7.8729471062396089).epsilon(1e-8));
  // exact closed form at s = 1/2, n = 1: (1-s) gamma / K(2,1) = pi^2
  CHECK(asymptotic_ratio(0.5, 1) == Approx(kPi * kPi).epsilon(1e-9));

  const double w = 2.0 * kPi;
  const double e1 = std::abs(asymptotic_ratio(0.9, 2) - w);
  const double e2 = std::abs(asymptotic_ratio(0.99, 2) - w);
  const double e3 = std::abs(asymptotic_ratio(0.999, 2) - w);
  CHECK(e2 < e1);
  CHECK(e3 < e2);
  CHECK(e3 < 0.05 * w);
}
