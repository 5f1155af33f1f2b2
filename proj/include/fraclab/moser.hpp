#pragma once

#include "fraclab/seminorm.hpp"

namespace fraclab {

/// The concentrating log-profile family: u_eps = |log eps|^{(n-s)/n} on
/// [0, eps], |log r| / |log eps|^{s/n} on (eps, 1), 0 beyond 1. The ring grid
/// is geometric so the logarithmic kink at r = eps stays resolved.
inline RadialProfile moser_profile(const CriticalParams& prm, double eps, int ring_nodes = 256) {
  prm.require_critical("moser_profile");
  require_arg(eps > 0.0 && eps < 1.0, "moser_profile: eps must lie in (0,1)");
  require_arg(ring_nodes >= 200, "moser_profile: need >= 200 ring nodes");
  const double L = std::log(1.0 / eps);
  const double cap = std::pow(L, (prm.n - prm.s) / prm.n);
  const double ring_scale = std::pow(L, prm.s / prm.n);
  std::vector<double> r, v;
  r.reserve(ring_nodes + 3);
  v.reserve(ring_nodes + 3);
  r.push_back(0.0);
  v.push_back(cap);
  for (int i = 0; i <= ring_nodes; ++i) {
    const double rr = std::pow(eps, 1.0 - static_cast<double>(i) / ring_nodes);
    if (rr <= r.back()) continue;
    r.push_back(rr);
    v.push_back(std::abs(std::log(rr)) / ring_scale);
  }
  if (r.back() < 1.0) {
    r.push_back(1.0);
    v.push_back(0.0);
  } else {
    v.back() = 0.0;
  }
  return RadialProfile(std::move(r), std::move(v));
}

// ---------------------------------------------------------------------------

struct DecayCheckReport {
  double bound_coefficient = 0.0;  // (n/omega)^{(p-1)/(kp)} ||u||_{kp/(p-1)}
  double min_margin = kInf;        // min over grid radii of (bound(r) - u(r))
  double worst_radius = 0.0;
  bool holds = false;
};

/// Checks the radial decay bound u(r) <= (n/omega_{n-1})^{(p-1)/(kp)}
/// ||u||_{kp/(p-1)} r^{-n(p-1)/(kp)} at every positive grid radius. A genuine
/// violation for nonincreasing u signals a broken norm quadrature.
inline DecayCheckReport radial_decay_check(const RadialProfile& u, int k,
                                           const CriticalParams& prm, double tol = 1e-10) {
  require_arg(k >= 1, "radial_decay_check: k must be >= 1");
  require_arg(u.monotone_nonincreasing(), "radial_decay_check: u must be nonincreasing");
  for (double v : u.values()) require_arg(v >= 0.0, "radial_decay_check: u must be nonnegative");
  const double q = k * prm.p / (prm.p - 1.0);
  const double expo = (prm.p - 1.0) / (k * prm.p);
  DecayCheckReport rep;
  rep.bound_coefficient =
      std::pow(prm.n / surface_measure(prm.n), expo) * lq_norm(u, q, prm.n);
  const double rexp = prm.n * (prm.p - 1.0) / (k * prm.p);
  for (size_t i = 1; i < u.radii().size(); ++i) {
    const double r = u.radii()[i];
    const double margin = rep.bound_coefficient * std::pow(r, -rexp) - u.values()[i];
    if (margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.worst_radius = r;
    }
  }
  rep.holds = rep.min_margin >= -tol * std::max(1.0, u.peak());
  return rep;
}

// ---------------------------------------------------------------------------

struct TruncationReport {
  double seminorm_u_p = 0.0;
  double seminorm_v_p = 0.0;
  bool seminorm_dominated = false;  // [v]^p <= [u]^p within quadrature slack
  double beta = 0.0;                // product reading of the displayed coefficient
  double beta_alt_reading = 0.0;    // alternative exponent grouping, reported only
  bool reading_ambiguous = true;
  double pointwise_const = 0.0;     // C in  u^q <= v^q (1 + beta ||u||^p) + C
  double pointwise_min_margin = 0.0;
  bool pointwise_holds = false;
};

/// v = (u - u(r0))^+ inside the r0-ball, 0 outside, for nonincreasing u.
/// The report verifies the seminorm comparison [v]^p <= [u]^p and the
/// pointwise power bound that drives the ball-splitting argument.
inline std::pair<RadialProfile, TruncationReport> truncation_split(
    const RadialProfile& u, double r0, const CriticalParams& prm, int k,
    const QuadratureSpec& spec = {}) {
  require_arg(r0 > 0.0, "truncation_split: r0 must be positive");
  require_arg(u.monotone_nonincreasing(), "truncation_split: u must be nonincreasing");
  prm.require_critical("truncation_split");
  require_arg(k >= 1, "truncation_split: k must be >= 1");

  const double ur0 = (r0 >= u.radii().back()) ? 0.0 : u(r0);
  std::vector<double> r, v;
  for (size_t i = 0; i < u.radii().size() && u.radii()[i] < r0; ++i) {
    r.push_back(u.radii()[i]);
    v.push_back(std::max(0.0, u.values()[i] - ur0));
  }
  r.push_back(r0);
  v.push_back(0.0);
  RadialProfile trunc(std::move(r), std::move(v));

  TruncationReport rep;
  rep.seminorm_u_p = seminorm_power(u, prm, spec);
  rep.seminorm_v_p = seminorm_power(trunc, prm, spec);
  const double slack = 2.0 * spec.target_rel_err * rep.seminorm_u_p;
  rep.seminorm_dominated = rep.seminorm_v_p <= rep.seminorm_u_p + slack;

  // beta = 2^{1/(p-1)}/(p-1) * (n/omega)^{(p-1)/k} * r0^{-n(p-1)/k}
  const double p = prm.p;
  const int n = prm.n;
  const double omega = surface_measure(n);
  rep.beta = std::pow(2.0, 1.0 / (p - 1.0)) / (p - 1.0) * std::pow(n / omega, (p - 1.0) / k) *
             std::pow(r0, -n * (p - 1.0) / k);
  rep.beta_alt_reading = std::pow(n, ((p - 1.0) / k) * std::pow(2.0, 1.0 / (p - 1.0))) /
                         ((p - 1.0) * std::pow(omega, (p - 1.0) / k) *
                          std::pow(r0, n * (p - 1.0) / k));

  // pointwise: u^q <= v^q (1 + beta ||u||_{kp/(p-1)}^p) + C with
  //   C = q 2^{q-1} b^q + q^{q-1} 2^{q(q-1)} b^q ((q-1)/(q beta ||u||^p))^{q-1},
  // b = u(r0), from Young's inequality on the cross term.
  const double q = prm.q();
  const double lq = lq_norm(u, k * p / (p - 1.0), n);
  const double lqp = std::pow(lq, p);
  const double b = ur0;
  rep.pointwise_const =
      q * std::pow(2.0, q - 1.0) * std::pow(b, q) +
      std::pow(q, q - 1.0) * std::pow(2.0, q * (q - 1.0)) * std::pow(b, q) *
          std::pow((q - 1.0) / (q * rep.beta * lqp), q - 1.0);
  rep.pointwise_min_margin = kInf;
  for (size_t i = 0; i < u.radii().size(); ++i) {
    const double uu = u.values()[i];
    const double vv = std::max(0.0, (u.radii()[i] <= r0 ? uu - ur0 : 0.0));
    const double lhs = std::pow(uu, q);
    const double rhs = std::pow(vv, q) * (1.0 + rep.beta * lqp) + rep.pointwise_const;
    rep.pointwise_min_margin = std::min(rep.pointwise_min_margin, rhs - lhs);
  }
  rep.pointwise_holds = rep.pointwise_min_margin >= -1e-9 * std::max(1.0, std::pow(u.peak(), q));
  return {std::move(trunc), rep};
}

/// Minimal truncation radius (times a 1.01 safety factor) making the
/// monotonicity argument close: r0^n > n (1+theta)^{k/(p-1)} 2^{k/(p-1)^2} / omega_{n-1}.
inline double split_radius(double theta, const CriticalParams& prm, int k) {
  require_arg(theta > 0.0, "split_radius: theta must be positive");
  require_arg(k >= 1, "split_radius: k must be >= 1");
  const double p = prm.p;
  const double r0n = prm.n * std::pow(1.0 + theta, k / (p - 1.0)) *
                     std::pow(2.0, k / ((p - 1.0) * (p - 1.0))) / surface_measure(prm.n);
  return 1.01 * std::pow(r0n, 1.0 / prm.n);
}

}  // namespace fraclab
