#pragma once

#include "fraclab/common.hpp"

namespace fraclab {

// ---------------------------------------------------------------------------

/// The parameter triple (n, s, p). At the critical coupling s*p = n the
/// Sobolev space W^{s,p} embeds into exponential Orlicz classes; most
/// quantities in this library live there, but the general triple is accepted
/// wherever the formulas make sense.
struct CriticalParams {
  int n = 1;
  double s = 0.5;
  double p = 2.0;

  static CriticalParams critical(int n, double s) {
    require_arg(n >= 1, "CriticalParams: n must be >= 1");
    require_arg(s > 0.0 && s < 1.0, "CriticalParams: s must lie in (0,1)");
    CriticalParams prm{n, s, static_cast<double>(n) / s};
    return prm;
  }

  static CriticalParams general(int n, double s, double p) {
    require_arg(n >= 1, "CriticalParams: n must be >= 1");
    require_arg(s > 0.0 && s < 1.0, "CriticalParams: s must lie in (0,1)");
    require_arg(p > 1.0, "CriticalParams: p must be > 1");
    return CriticalParams{n, s, p};
  }

  bool is_critical() const { return std::abs(s * p - n) <= 1e-12 * std::max(1.0, double(n)); }

  void require_critical(const char* who) const {
    require_arg(is_critical(), std::string(who) + ": parameters must satisfy s*p = n");
  }

  /// Conjugate-type exponent q = p/(p-1); equals n/(n-s) at criticality.
  double q() const { return p / (p - 1.0); }
};

/// Value of a truncated series together with the number of explicitly summed
/// terms and a certified bound on |value - exact|.
struct SeriesResult {
  double value = 0.0;
  std::int64_t terms_used = 0;
  double tail_bound = 0.0;
};

// ---------------------------------------------------------------------------

/// omega_{n-1}: (n-1)-dimensional measure of the unit sphere in R^n.
inline double surface_measure(int n) {
  require_arg(n >= 1, "surface_measure: n must be >= 1");
  return n * std::pow(kPi, 0.5 * n) / std::tgamma(1.0 + 0.5 * n);
}

/// K(p,n) = 2 pi^{(n-1)/2} Gamma((p+1)/2) / (p Gamma((n+p)/2)), the constant
/// relating (1-s)[u]^p_{s,p} to ||grad u||_p^p in the s->1 limit.
inline double bbm_constant(double p, int n) {
  require_arg(p >= 1.0, "bbm_constant: p must be >= 1");
  require_arg(n >= 1, "bbm_constant: n must be >= 1");
  const double lg = std::log(2.0) + 0.5 * (n - 1) * std::log(kPi) + std::lgamma(0.5 * (p + 1.0)) -
                    std::log(p) - std::lgamma(0.5 * (n + p));
  return std::exp(lg);
}

namespace detail {

// Coefficients of R(y) = prod_{i=1..n-1} (y - (n - 2i)); the series term is
// t_k = 2^{-(n-1)} R(n+2k) (n+2k)^{-p}. Roots are the symmetric integers
// +-(n-2), +-(n-4), ..., so coefficients are small exact integers.
inline std::vector<double> reduced_term_poly(int n) {
  std::vector<double> c{1.0};
  for (int i = 1; i <= n - 1; ++i) {
    const double root = n - 2.0 * i;
    std::vector<double> nc(c.size() + 1, 0.0);
    for (size_t d = 0; d < c.size(); ++d) {
      nc[d + 1] += c[d];
      nc[d] -= root * c[d];
    }
    c = std::move(nc);
  }
  return c;
}

struct GammaTail {
  double correction;  // Euler-Maclaurin estimate of sum_{k>=K} t_k
  double remainder;   // certified bound on its error
};

// Euler-Maclaurin for the tail of sum_k f(k), f(x) = 2^{1-n} R(n+2x) (n+2x)^{-p},
// starting at k = K:
//   tail = int_K^inf f + f(K)/2 - f'(K)/12 + f'''(K)/720 + R,
//   |R| <= |B6|/6! * sum_d |r_d| |f_d^{(5)}(K)|   (termwise; each monomial is
//   completely monotone so the classical remainder bound applies per term).
inline GammaTail gamma_tail(int n, double p, const std::vector<double>& r, std::int64_t K) {
  const double y = n + 2.0 * static_cast<double>(K);
  const double scale = std::pow(2.0, 1.0 - n);
  double integral = 0.0, f0 = 0.0, f1 = 0.0, f3 = 0.0, f5abs = 0.0;
  for (size_t d = 0; d < r.size(); ++d) {
    const double a = static_cast<double>(d) - p;  // monomial y^a
    const double ya = std::pow(y, a);
    integral += r[d] * ya * y / (2.0 * (-a - 1.0));
    f0 += r[d] * ya;
    f1 += r[d] * a * 2.0 * ya / y;
    f3 += r[d] * a * (a - 1.0) * (a - 2.0) * 8.0 * ya / (y * y * y);
    f5abs += std::abs(r[d]) * std::abs(a * (a - 1.0) * (a - 2.0) * (a - 3.0) * (a - 4.0)) * 32.0 *
             ya / (y * y * y * y * y);
  }
  GammaTail t;
  t.correction = scale * (integral + 0.5 * f0 - f1 / 12.0 + f3 / 720.0);
  t.remainder = scale * f5abs / 30240.0;
  return t;
}

}  // namespace detail

/// Partial sum (prefactor included) of the gamma_{s,n} series with exactly
/// `terms` explicit terms, no tail estimate. Terms are generated by the ratio
/// recurrence, never through raw factorials.
inline double gamma_series_partial_sum(int n, double p, std::int64_t terms) {
  require_arg(n >= 1, "gamma_series: n must be >= 1");
  require_arg(p > 1.0, "gamma_series: p must be > 1");
  require_arg(terms >= 1, "gamma_series: need at least one term");
  const double log_omega =
      std::log(double(n)) + 0.5 * n * std::log(kPi) - std::lgamma(1.0 + 0.5 * n);
  const double prefactor =
      std::exp(std::log(2.0) + 2.0 * log_omega + std::lgamma(p + 1.0) - std::lgamma(n + 1.0));
  double t = std::exp(std::lgamma(double(n)) - p * std::log(double(n)));  // (n-1)!/n^p
  double sum = t;
  for (std::int64_t k = 0; k + 1 < terms; ++k) {
    const double y = n + 2.0 * static_cast<double>(k);
    t *= (n + static_cast<double>(k)) / (static_cast<double>(k) + 1.0) * std::pow(y / (y + 2.0), p);
    sum += t;
  }
  return prefactor * sum;
}

/// gamma_{s,n} = (2 omega_{n-1}^2 Gamma(p+1) / n!) * sum_{k>=0} (n+k-1)!/(k! (n+2k)^p),
/// evaluated to absolute accuracy `tol` (value carries the Euler-Maclaurin
/// tail; tail_bound certifies the remaining error). Requires p > n, the
/// convergence threshold of the series.
inline SeriesResult gamma_series(int n, double p, double tol) {
  require_arg(n >= 1, "gamma_series: n must be >= 1");
  require_arg(p > 1.0, "gamma_series: p must be > 1");
  require_arg(tol > 0.0, "gamma_series: tol must be > 0");
  if (p <= n + 1e-13)
    throw convergence_error("gamma_series: series diverges for p <= n (terms ~ k^{n-1-p})");

  const double log_omega =
      std::log(double(n)) + 0.5 * n * std::log(kPi) - std::lgamma(1.0 + 0.5 * n);
  const double prefactor =
      std::exp(std::log(2.0) + 2.0 * log_omega + std::lgamma(p + 1.0) - std::lgamma(n + 1.0));
  const std::vector<double> rpoly = detail::reduced_term_poly(n);

  const std::int64_t cap = 1 << 22;
  std::int64_t K = 256;
  double t = std::exp(std::lgamma(double(n)) - p * std::log(double(n)));
  double sum = t;
  std::int64_t k = 0;
  auto extend_to = [&](std::int64_t target) {
    for (; k + 1 < target; ++k) {
      const double y = n + 2.0 * static_cast<double>(k);
      t *= (n + static_cast<double>(k)) / (static_cast<double>(k) + 1.0) *
           std::pow(y / (y + 2.0), p);
      sum += t;
    }
  };

  for (;;) {
    extend_to(K);
    const auto tail = detail::gamma_tail(n, p, rpoly, K);
    const double value = prefactor * (sum + tail.correction);
    const double bound = prefactor * tail.remainder * 2.0 + 1e-15 * std::abs(value);
    if (bound <= tol) return SeriesResult{value, K, bound};
    if (K >= cap)
      throw convergence_error("gamma_series: tolerance unreachable within the iteration cap");
    K *= 2;
  }
}

/// alpha*_{s,n} = n * gamma_{s,n}^{s/(n-s)} for a given gamma value.
inline double alpha_star_from_gamma(int n, double s, double gamma_value) {
  require_arg(gamma_value > 0.0, "alpha_star: gamma must be positive");
  return n * std::pow(gamma_value, s / (n - s));
}

/// Critical Moser-Trudinger threshold alpha*_{s,n} = n * gamma_{s,n}^{s/(n-s)}.
inline double alpha_star(const CriticalParams& prm) {
  prm.require_critical("alpha_star");
  const SeriesResult g = gamma_series(prm.n, prm.p, 1e-10);
  return alpha_star_from_gamma(prm.n, prm.s, g.value);
}

// ---------------------------------------------------------------------------

/// Psi_k(z) = e^z - sum_{j<k} z^j/j!, the k-th order truncated exponential.
/// Small arguments (z < k/2) go through the ascending series to dodge the
/// cancellation in e^z minus its own leading partial sum.
inline double truncated_exp(int k, double z) {
  require_arg(k >= 1, "truncated_exp: k must be >= 1");
  require_arg(z >= 0.0, "truncated_exp: z must be >= 0");
  if (z == 0.0) return 0.0;
  if (k == 1) return std::expm1(z);
  if (z < 0.5 * k) {
    double term = std::exp(k * std::log(z) - std::lgamma(k + 1.0));  // z^k/k!
    double sum = term;
    for (int j = k + 1; j < k + 400; ++j) {
      term *= z / j;
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return sum;
  }
  double term = 1.0, partial = 1.0;
  for (int j = 1; j < k; ++j) {
    term *= z / j;
    partial += term;
  }
  return std::exp(z) - partial;
}

/// log(Psi_k(z)), finite for arbitrarily large z (where Psi_k ~ e^z).
inline double log_truncated_exp(int k, double z) {
  require_arg(k >= 1, "log_truncated_exp: k must be >= 1");
  require_arg(z >= 0.0, "log_truncated_exp: z must be >= 0");
  if (z == 0.0) return -kInf;
  if (z > 690.0) return z;  // subtracted polynomial is below e^z * 1e-250 here
  return std::log(truncated_exp(k, z));
}

/// Psi_k(z)/z^k, evaluated stably down to z -> 0 (limit 1/k!).
inline double truncated_exp_over_zk(int k, double z) {
  require_arg(k >= 1, "truncated_exp_over_zk: k must be >= 1");
  require_arg(z >= 0.0, "truncated_exp_over_zk: z must be >= 0");
  if (z < 0.5 * k) {
    double term = std::exp(-std::lgamma(k + 1.0));  // 1/k!
    double sum = term;
    for (int j = k + 1; j < k + 400; ++j) {
      term *= z / j;
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return sum;
  }
  return truncated_exp(k, z) / std::pow(z, k);
}

/// C(k,M) = sup_{0<z<=M} Psi_k(z)/z^k. The ratio is a power series with
/// nonnegative coefficients, hence nondecreasing, so the sup sits at z = M.
inline double psi_polynomial_bound(int k, double M) {
  require_arg(k >= 1, "psi_polynomial_bound: k must be >= 1");
  require_arg(M > 0.0, "psi_polynomial_bound: M must be > 0");
  return truncated_exp_over_zk(k, M);
}

/// (1-s) gamma_{s,n} / K(n/s, n); tends to omega_{n-1} as s -> 1^-.
inline double asymptotic_ratio(double s, int n) {
  require_arg(s > 0.0 && s < 1.0, "asymptotic_ratio: s must lie in (0,1)");
  require_arg(n >= 1, "asymptotic_ratio: n must be >= 1");
  const double p = n / s;
  const SeriesResult g = gamma_series(n, p, 1e-7);
  return (1.0 - s) * g.value / bbm_constant(p, n);
}

}  // namespace fraclab
