#pragma once

#include "fraclab/moser.hpp"
#include "fraclab/seminorm.hpp"

namespace fraclab {

/// Borel weight representatives f(t) in {1, t, log(1+t)}.
enum class WeightKind { one, identity, log1p };

inline double apply_weight(WeightKind w, double t) {
  switch (w) {
    case WeightKind::one: return 1.0;
    case WeightKind::identity: return t;
    case WeightKind::log1p: return std::log1p(t);
  }
  return 1.0;
}

inline const char* weight_name(WeightKind w) {
  switch (w) {
    case WeightKind::one: return "1";
    case WeightKind::identity: return "t";
    case WeightKind::log1p: return "log1p";
  }
  return "?";
}

enum class Normalization { seminorm_ball, full_norm_ball, lp_normalized };

inline const char* normalization_name(Normalization n) {
  switch (n) {
    case Normalization::seminorm_ball: return "seminorm_ball";
    case Normalization::full_norm_ball: return "full_norm_ball";
    case Normalization::lp_normalized: return "lp_normalized";
  }
  return "?";
}

struct FunctionalReport {
  double alpha = 0.0;
  int k = 1;
  double value = 0.0;        // inf when overflowed
  double log10_value = kNaN; // always valid when value > 0
  bool overflowed = false;
  Normalization normalization = Normalization::seminorm_ball;
  std::string candidate_id;
};

// ---------------------------------------------------------------------------

namespace detail {

struct ExpIntegral {
  double value = 0.0;
  double log_value = -kInf;  // natural log
  bool overflowed = false;
};

/// omega_{n-1} int_0^R r^{n-1} f(|u|) Phi(alpha |u|^q) dr with Phi = Psi_k or
/// the full exponential; domain_radius > 0 restricts to the ball B(0, R_dom)
/// and (full exponential only) adds the measure of the zero region where
/// Phi = 1. Switches to log-space accumulation once the exponent passes 700.
inline ExpIntegral weighted_exp_integral(const RadialProfile& u, double alpha, int k,
                                         const CriticalParams& prm, WeightKind weight,
                                         bool full_exp, double domain_radius) {
  require_arg(alpha > 0.0, "weighted_exp_integral: alpha must be positive");
  require_arg(k >= 1, "weighted_exp_integral: k must be >= 1");
  const double q = prm.q();
  const double omega = surface_measure(prm.n);
  const double R_int = (domain_radius > 0.0)
                           ? std::min(domain_radius, u.radii().back())
                           : u.radii().back();
  if (domain_radius > 0.0)
    require_arg(u.support_radius() <= domain_radius * (1.0 + 1e-12),
                "weighted_exp_integral: u must be supported in the domain ball");

  auto arg_of = [&](double r) { return alpha * std::pow(std::abs(u(r)), q); };
  double max_abs = 0.0;
  for (double v : u.values()) max_abs = std::max(max_abs, std::abs(v));
  const bool log_space = alpha * std::pow(max_abs, q) > 700.0;

  // quadrature nodes: per-segment Gauss, segments split until the exponent
  // varies by < 0.35 across each piece
  const GaussRule& g = gauss_rule(12);
  std::vector<std::pair<double, double>> pieces;
  {
    std::vector<std::pair<double, double>> stack;
    const auto& rr = u.radii();
    for (size_t i = 0; i + 1 < rr.size() && rr[i] < R_int; ++i)
      stack.push_back({rr[i], std::min(rr[i + 1], R_int)});
    while (!stack.empty()) {
      auto [a, b] = stack.back();
      stack.pop_back();
      if (b - a > 1e-14 * R_int && std::abs(arg_of(a) - arg_of(b)) > 0.35 &&
          pieces.size() + stack.size() < 20000) {
        stack.push_back({a, 0.5 * (a + b)});
        stack.push_back({0.5 * (a + b), b});
      } else {
        pieces.push_back({a, b});
      }
    }
    std::sort(pieces.begin(), pieces.end());
  }

  ExpIntegral out;
  if (!log_space) {
    double acc = 0.0;
    for (const auto& [a, b] : pieces) {
      for (size_t i = 0; i < g.x.size(); ++i) {
        const double r = 0.5 * (a + b) + 0.5 * (b - a) * g.x[i];
        const double uu = std::abs(u(r));
        const double f = apply_weight(weight, uu);
        if (f == 0.0) continue;
        const double z = alpha * std::pow(uu, q);
        const double phi = full_exp ? std::exp(z) : truncated_exp(k, z);
        acc += 0.5 * (b - a) * g.w[i] * std::pow(r, prm.n - 1) * f * phi;
      }
    }
    out.value = omega * acc;
    if (domain_radius > 0.0 && full_exp) {
      const double f0 = apply_weight(weight, 0.0);
      if (f0 != 0.0 && domain_radius > u.support_radius()) {
        const double vol = omega / prm.n *
                           (std::pow(domain_radius, prm.n) -
                            std::pow(std::min(u.support_radius(), domain_radius), prm.n));
        out.value += f0 * vol;
      }
    }
    out.log_value = out.value > 0.0 ? std::log(out.value) : -kInf;
    return out;
  }

  LogSumExp lse;
  for (const auto& [a, b] : pieces) {
    for (size_t i = 0; i < g.x.size(); ++i) {
      const double r = 0.5 * (a + b) + 0.5 * (b - a) * g.x[i];
      const double uu = std::abs(u(r));
      const double f = apply_weight(weight, uu);
      if (f == 0.0 || r == 0.0) {
        if (r == 0.0 && prm.n == 1 && f != 0.0) {
          const double z = alpha * std::pow(uu, q);
          lse.add(std::log(0.5 * (b - a) * g.w[i] * f) +
                  (full_exp ? z : log_truncated_exp(k, z)));
        }
        continue;
      }
      const double z = alpha * std::pow(uu, q);
      lse.add(std::log(0.5 * (b - a) * g.w[i] * std::pow(r, prm.n - 1) * f) +
              (full_exp ? z : log_truncated_exp(k, z)));
    }
  }
  if (domain_radius > 0.0 && full_exp) {
    const double f0 = apply_weight(weight, 0.0);
    if (f0 != 0.0 && domain_radius > u.support_radius()) {
      const double vol = omega / prm.n *
                         (std::pow(domain_radius, prm.n) -
                          std::pow(std::min(u.support_radius(), domain_radius), prm.n));
      lse.add(std::log(f0 * vol) - std::log(omega));
    }
  }
  out.overflowed = true;
  out.log_value = std::log(omega) + lse.value();
  out.value = out.log_value < 700.0 ? std::exp(out.log_value) : kInf;
  return out;
}

}  // namespace detail

/// Default truncation order k = ceil(p - 1).
inline int default_truncation_order(const CriticalParams& prm) {
  return std::max(1, static_cast<int>(std::ceil(prm.p - 1.0 - 1e-12)));
}

/// F_{R^n,k}(u) with weight f: int f(|u|) Psi_k(alpha |u|^{p/(p-1)}).
inline FunctionalReport moser_functional(const RadialProfile& u, double alpha, int k,
                                         const CriticalParams& prm,
                                         WeightKind weight = WeightKind::one,
                                         std::string candidate_id = {}) {
  const auto integral = detail::weighted_exp_integral(u, alpha, k, prm, weight, false, 0.0);
  FunctionalReport rep;
  rep.alpha = alpha;
  rep.k = k;
  rep.value = integral.overflowed ? kInf : integral.value;
  rep.log10_value = integral.log_value / std::log(10.0);
  rep.overflowed = integral.overflowed;
  rep.normalization = Normalization::seminorm_ball;
  rep.candidate_id = std::move(candidate_id);
  return rep;
}

// ---------------------------------------------------------------------------

/// Rescales u (with [u] <= 1) to unit L^p mass: v(x) = u(l x), l^n = ||u||_p^p,
/// which leaves the seminorm unchanged at criticality.
inline std::pair<RadialProfile, double> normalize_lp_unit(const RadialProfile& u,
                                                          const CriticalParams& prm) {
  const double lpp = lq_power_integral(u, prm.p, prm.n);
  require_arg(lpp > 0.0, "normalize_lp_unit: zero function");
  const double l = std::pow(lpp, 1.0 / prm.n);
  return {dilate(u, l), l};
}

/// Adachi-Tanaka candidate value: Psi-functional divided by ||u||_p^p, a
/// certified lower-bound contribution to the supremum over the seminorm ball.
inline FunctionalReport adachi_tanaka_value(const RadialProfile& u, double alpha,
                                            const CriticalParams& prm,
                                            const QuadratureSpec& spec = {},
                                            std::string candidate_id = {}) {
  prm.require_critical("adachi_tanaka_value");
  const double E = seminorm_power(u, prm, spec);
  require_arg(std::pow(E, 1.0 / prm.p) <= 1.0 + 1e-3,
              "adachi_tanaka_value: candidate violates the seminorm constraint [u] <= 1");
  const double lpp = lq_power_integral(u, prm.p, prm.n);
  require_arg(lpp > 0.0, "adachi_tanaka_value: zero function");
  const int k = default_truncation_order(prm);
  const auto integral = detail::weighted_exp_integral(u, alpha, k, prm, WeightKind::one,
                                                      false, 0.0);
  FunctionalReport rep;
  rep.alpha = alpha;
  rep.k = k;
  rep.overflowed = integral.overflowed;
  rep.log10_value = (integral.log_value - std::log(lpp)) / std::log(10.0);
  rep.value = integral.overflowed ? kInf : integral.value / lpp;
  rep.normalization = Normalization::lp_normalized;
  rep.candidate_id = std::move(candidate_id);
  return rep;
}

/// Full-norm (Zhang-type) candidate value under l ||u||_p^p + [u]^p <= 1.
inline FunctionalReport full_norm_value(const RadialProfile& u, double alpha,
                                        const CriticalParams& prm, double l_weight = 1.0,
                                        const QuadratureSpec& spec = {},
                                        std::string candidate_id = {}) {
  prm.require_critical("full_norm_value");
  require_arg(l_weight > 0.0, "full_norm_value: constraint weight must be positive");
  const double E = seminorm_power(u, prm, spec);
  const double lpp = lq_power_integral(u, prm.p, prm.n);
  require_arg(l_weight * lpp + E <= 1.0 + 1e-3,
              "full_norm_value: candidate violates the full-norm constraint");
  const int k = default_truncation_order(prm);
  const auto integral = detail::weighted_exp_integral(u, alpha, k, prm, WeightKind::one,
                                                      false, 0.0);
  FunctionalReport rep;
  rep.alpha = alpha;
  rep.k = k;
  rep.overflowed = integral.overflowed;
  rep.log10_value = integral.log_value / std::log(10.0);
  rep.value = integral.overflowed ? kInf : integral.value;
  rep.normalization = Normalization::full_norm_ball;
  rep.candidate_id = std::move(candidate_id);
  return rep;
}

// ---------------------------------------------------------------------------

struct CouplingReport {
  double C_p = 0.0;              // C^p = (alpha/alpha_eps)^{p-1}
  double l = 0.0;                // l^n = C^p / (1 - C^p)
  double full_norm_v_p = 0.0;    // ||v||_p^p + [v]^p, quadrature
  bool admissible = false;       // full norm <= 1 within tolerance
  double value_u = 0.0;          // int Psi(alpha |u|^q)
  double value_v = 0.0;          // int Psi(alpha_eps |v|^q)
  double relation_residual = 0.0;// |l^{-n} value_u - value_v| / value_v
};

/// Maps a seminorm-ball candidate with unit L^p mass to a full-norm-ball
/// candidate: v(x) = C u(l x) with C^p = (alpha/alpha_eps)^{p-1} and
/// l^n = C^p/(1-C^p). Then ||v||_{W^{s,p}}^p <= 1 and
/// l^{-n} int Psi(alpha |u|^q) = int Psi(alpha_eps |v|^q).
inline std::pair<RadialProfile, CouplingReport> full_norm_coupling(
    const RadialProfile& u, double alpha, double alpha_eps, const CriticalParams& prm,
    const QuadratureSpec& spec = {}) {
  prm.require_critical("full_norm_coupling");
  require_arg(alpha > 0.0, "full_norm_coupling: alpha must be positive");
  require_arg(alpha < alpha_eps,
              "full_norm_coupling: requires alpha < alpha_eps (else C^p >= 1 breaks l)");
  const double lpp = lq_power_integral(u, prm.p, prm.n);
  require_arg(std::abs(lpp - 1.0) <= 1e-3, "full_norm_coupling: needs ||u||_p = 1");
  const double E = seminorm_power(u, prm, spec);
  require_arg(std::pow(E, 1.0 / prm.p) <= 1.0 + 1e-3, "full_norm_coupling: needs [u] <= 1");

  CouplingReport rep;
  rep.C_p = std::pow(alpha / alpha_eps, prm.p - 1.0);
  const double ln = rep.C_p / (1.0 - rep.C_p);
  require_arg(ln >= 1e-300, "full_norm_coupling: l underflows for alpha near 0");
  rep.l = std::pow(ln, 1.0 / prm.n);
  const double C = std::pow(rep.C_p, 1.0 / prm.p);
  RadialProfile v = scale_values(dilate(u, rep.l), C);

  rep.full_norm_v_p = lq_power_integral(v, prm.p, prm.n) + seminorm_power(v, prm, spec);
  rep.admissible = rep.full_norm_v_p <= 1.0 + 1e-3;
  const int k = default_truncation_order(prm);
  rep.value_u =
      detail::weighted_exp_integral(u, alpha, k, prm, WeightKind::one, false, 0.0).value;
  rep.value_v =
      detail::weighted_exp_integral(v, alpha_eps, k, prm, WeightKind::one, false, 0.0).value;
  rep.relation_residual =
      rep.value_v > 0.0 ? std::abs(rep.value_u / ln - rep.value_v) / rep.value_v : 0.0;
  return {std::move(v), rep};
}

// ---------------------------------------------------------------------------

/// Onofri-type gap (1/p)[u]^p - lambda log( (1/|B_R|) int_{B_R} e^u ).
inline double onofri_gap(const RadialProfile& u, double lambda, double domain_radius,
                         const CriticalParams& prm, double alpha = -1.0) {
  prm.require_critical("onofri_gap");
  require_arg(domain_radius > 0.0, "onofri_gap: domain radius must be positive");
  require_arg(u.support_radius() <= domain_radius * (1.0 + 1e-12),
              "onofri_gap: u must be supported in the domain ball");
  const double astar = alpha_star(prm);
  if (alpha < 0.0) alpha = 0.9 * astar;
  require_arg(alpha < astar, "onofri_gap: alpha must be below alpha*");
  const double lmax = std::pow(prm.p * alpha / (prm.p - 1.0), prm.p - 1.0);
  require_arg(lambda >= 0.0 && lambda <= lmax,
              "onofri_gap: lambda outside [0, (p alpha/(p-1))^{p-1}]");

  const double E = seminorm_power(u, prm);
  if (lambda == 0.0) return E / prm.p;

  // log of (1/|Omega|) int_Omega e^u, accumulated in log space
  const double omega = surface_measure(prm.n);
  const double vol = omega / prm.n * std::pow(domain_radius, prm.n);
  const GaussRule& g = gauss_rule(12);
  LogSumExp lse;
  const auto& rr = u.radii();
  for (size_t i = 0; i + 1 < rr.size(); ++i) {
    const double a = rr[i], b = rr[i + 1];
    for (size_t j = 0; j < g.x.size(); ++j) {
      const double r = 0.5 * (a + b) + 0.5 * (b - a) * g.x[j];
      if (r == 0.0 && prm.n > 1) continue;
      lse.add(std::log(omega * 0.5 * (b - a) * g.w[j] * std::pow(r, prm.n - 1)) + u(r));
    }
  }
  if (domain_radius > u.radii().back()) {
    const double zero_vol =
        omega / prm.n * (std::pow(domain_radius, prm.n) - std::pow(u.radii().back(), prm.n));
    lse.add(std::log(zero_vol));  // e^0 on the untouched part of the ball
  }
  const double log_mean = lse.value() - std::log(vol);
  return E / prm.p - lambda * log_mean;
}

// ---------------------------------------------------------------------------

struct BlowupRow {
  double eps = 0.0;
  double seminorm_p = kNaN;
  double lp_norm_p = kNaN;
  double value = kNaN;
  double log10_value = kNaN;
  double inner_ball = kNaN;
  bool overflowed = false;
  bool failed = false;
};

struct BlowupTable {
  double alpha = 0.0;
  double alpha_star_value = 0.0;
  WeightKind weight = WeightKind::one;
  Normalization normalization = Normalization::seminorm_ball;
  std::vector<BlowupRow> rows;
};

struct BlowupOptions {
  int ring_nodes = 256;
  QuadratureSpec spec = {};
  int threads = 1;
};

/// Sweep of the Moser family: per eps, seminorm and L^p mass of u_eps, the
/// chosen functional value of the normalized candidate at alpha =
/// alpha_frac * alpha*, and the inner-ball quantity
/// int_{|x|<eps} exp(alpha* (u_eps/[u_eps])^{n/(n-s)}).
inline BlowupTable blowup_scan(double alpha_frac, WeightKind weight,
                               const std::vector<double>& eps_grid, const CriticalParams& prm,
                               Normalization normalization, const BlowupOptions& opt = {}) {
  prm.require_critical("blowup_scan");
  require_arg(alpha_frac > 0.0 && alpha_frac <= 1.2, "blowup_scan: alpha_frac in (0, 1.2]");
  require_arg(!eps_grid.empty(), "blowup_scan: empty eps grid");
  for (size_t i = 0; i + 1 < eps_grid.size(); ++i)
    require_arg(eps_grid[i] > eps_grid[i + 1], "blowup_scan: eps grid must decrease");

  BlowupTable table;
  table.alpha_star_value = alpha_star(prm);
  table.alpha = alpha_frac * table.alpha_star_value;
  table.weight = weight;
  table.normalization = normalization;
  const double q = prm.q();
  const int k = default_truncation_order(prm);

  auto run_row = [&](size_t idx) {
    BlowupRow row;
    row.eps = eps_grid[idx];
    try {
      const auto u = moser_profile(prm, row.eps, opt.ring_nodes);
      row.seminorm_p = seminorm_power(u, prm, opt.spec);
      row.lp_norm_p = lq_power_integral(u, prm.p, prm.n);
      const double snorm = std::pow(row.seminorm_p, 1.0 / prm.p);
      const RadialProfile v_semi = scale_values(u, 1.0 / snorm);

      detail::ExpIntegral integral;
      double lp_div = 1.0;
      if (normalization == Normalization::seminorm_ball) {
        integral = detail::weighted_exp_integral(v_semi, table.alpha, k, prm, weight, true, 1.0);
      } else if (normalization == Normalization::full_norm_ball) {
        const double full = std::pow(row.seminorm_p + row.lp_norm_p, 1.0 / prm.p);
        const RadialProfile v_full = scale_values(u, 1.0 / full);
        integral = detail::weighted_exp_integral(v_full, table.alpha, k, prm, weight, false, 0.0);
      } else {
        integral = detail::weighted_exp_integral(v_semi, table.alpha, k, prm, weight, false, 0.0);
        lp_div = lq_power_integral(v_semi, prm.p, prm.n);
      }
      row.overflowed = integral.overflowed;
      row.log10_value = (integral.log_value - std::log(lp_div)) / std::log(10.0);
      row.value = integral.overflowed ? kInf : integral.value / lp_div;

      // inner-ball quantity, always at alpha*, in log space first
      const double arg = table.alpha_star_value * std::pow(v_semi.peak(), q);
      const double log_inner = std::log(surface_measure(prm.n) / prm.n) +
                               prm.n * std::log(row.eps) + arg;
      row.inner_ball = std::exp(log_inner);
    } catch (const quadrature_error&) {
      row.failed = true;
    }
    return row;
  };

  table.rows = indexed_parallel_map<BlowupRow>(eps_grid.size(), run_row,
                                               std::max(1, opt.threads));
  return table;
}

}  // namespace fraclab
