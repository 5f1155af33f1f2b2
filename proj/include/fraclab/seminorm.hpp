#pragma once

#include "fraclab/profile.hpp"
#include "fraclab/quadrature.hpp"

namespace fraclab {

struct SeminormResult {
  double value = 0.0;          // [u]^p_{s,p} (the p-th power)
  double error_estimate = 0.0; // |value(fine grid) - value(coarse grid)|
};

namespace detail {

inline double stream_line_energy(const std::vector<double>& grid,
                                 const PiecewiseFunction1D& u, double s, double p,
                                 const WalkOptions& base_opt) {
  std::vector<double> v(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) v[i] = u(grid[i]);
  const std::vector<char> zc = zero_cells(v);
  std::vector<double> slopes(grid.size() - 1);
  for (size_t i = 0; i + 1 < grid.size(); ++i)
    slopes[i] = (v[i + 1] - v[i]) / (grid[i + 1] - grid[i]);
  WalkOptions opt = base_opt;
  opt.zero_cell = zc;
  opt.slopes = slopes;
  EnergySink sink(grid, v, p);
  const LineKernel kern{s * p};
  walk_cell_pairs(std::span<const double>(grid), p, kern, opt, sink);
  add_line_outside(std::span<const double>(grid), s * p, p, opt, sink);
  return sink.E;
}

inline double stream_radial_energy(const std::vector<double>& grid, const RadialProfile& u,
                                   int n, double s, double p, const WalkOptions& base_opt) {
  std::vector<double> v(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) v[i] = u(grid[i]);
  const std::vector<char> zc = zero_cells(v);
  std::vector<double> slopes(grid.size() - 1);
  for (size_t i = 0; i + 1 < grid.size(); ++i)
    slopes[i] = (v[i + 1] - v[i]) / (grid[i + 1] - grid[i]);
  WalkOptions opt = base_opt;
  opt.zero_cell = zc;
  opt.slopes = slopes;
  EnergySink sink(grid, v, p);
  const RadialKernel kern = RadialKernel::make(n, s * p);
  walk_cell_pairs(std::span<const double>(grid), p, kern, opt, sink);
  add_radial_outside(std::span<const double>(grid), p, kern, opt, sink);
  return sink.E;
}

}  // namespace detail

/// [u]^p_{s,p,R} of a compactly supported piecewise-linear line function:
/// the full double integral over R x R, diagonal cells in closed form,
/// exterior cross terms analytic.
inline SeminormResult gagliardo_1d_result(const PiecewiseFunction1D& u, double s, double p,
                                          const QuadratureSpec& spec = {}) {
  require_arg(s > 0.0 && s < 1.0, "gagliardo_1d: s must lie in (0,1)");
  require_arg(p >= 1.0, "gagliardo_1d: p must be >= 1");
  require_arg(u.zero_boundary(), "gagliardo_1d: u must vanish at its support endpoints");
  spec.validate(std::max(std::abs(u.support_lo()), std::abs(u.support_hi())));

  detail::WalkOptions opt;
  opt.diagonal_mode = spec.diagonal_mode;

  const int seg = static_cast<int>(u.xs().size()) - 1;
  const int coarse_cells = std::max(seg, spec.cells_per_dim / 2);
  const int fine_cells = std::max(2 * seg, spec.cells_per_dim);
  const auto fine = detail::refine_breakpoints(u.xs(), fine_cells);
  SeminormResult res;
  res.value = detail::stream_line_energy(fine, u, s, p, opt);
  if (spec.error_check) {
    const auto coarse = detail::refine_breakpoints(u.xs(), coarse_cells);
    const double vc = detail::stream_line_energy(coarse, u, s, p, opt);
    res.error_estimate = std::abs(res.value - vc);
  }
  return res;
}

inline double gagliardo_1d(const PiecewiseFunction1D& u, double s, double p,
                           const QuadratureSpec& spec = {}) {
  const SeminormResult r = gagliardo_1d_result(u, s, p, spec);
  if (spec.error_check && r.value > 0.0 && r.error_estimate > spec.target_rel_err * r.value)
    throw quadrature_error("gagliardo_1d: estimated relative error " +
                           format_double(r.error_estimate / r.value) + " exceeds target " +
                           format_double(spec.target_rel_err));
  return r.value;
}

/// [u]^p_{s,p,R^n} of a compactly supported radial profile, n >= 2, via the
/// angular-kernel reduction to a double integral in (r, rho).
inline SeminormResult gagliardo_radial_result(const RadialProfile& u, const CriticalParams& prm,
                                              const QuadratureSpec& spec = {}) {
  require_arg(prm.n >= 2, "gagliardo_radial: n must be >= 2 (use gagliardo_1d on the line)");
  require_arg(prm.s > 0.0 && prm.s < 1.0, "gagliardo_radial: s must lie in (0,1)");
  require_arg(prm.p >= 1.0, "gagliardo_radial: p must be >= 1");
  require_arg(u.compactly_supported(),
              "gagliardo_radial: profile must end with value 0 (compact support)");
  spec.validate(u.support_radius());

  detail::WalkOptions opt;
  opt.diagonal_mode = spec.diagonal_mode;

  const int seg = static_cast<int>(u.radii().size()) - 1;
  const int coarse_cells = std::max(seg, spec.cells_per_dim / 2);
  const int fine_cells = std::max(2 * seg, spec.cells_per_dim);
  const auto fine = detail::refine_breakpoints(u.radii(), fine_cells);
  SeminormResult res;
  res.value = detail::stream_radial_energy(fine, u, prm.n, prm.s, prm.p, opt);
  if (spec.error_check) {
    const auto coarse = detail::refine_breakpoints(u.radii(), coarse_cells);
    const double vc = detail::stream_radial_energy(coarse, u, prm.n, prm.s, prm.p, opt);
    res.error_estimate = std::abs(res.value - vc);
  }
  return res;
}

inline double gagliardo_radial(const RadialProfile& u, const CriticalParams& prm,
                               const QuadratureSpec& spec = {}) {
  const SeminormResult r = gagliardo_radial_result(u, prm, spec);
  if (spec.error_check && r.value > 0.0 && r.error_estimate > spec.target_rel_err * r.value)
    throw quadrature_error("gagliardo_radial: estimated relative error " +
                           format_double(r.error_estimate / r.value) + " exceeds target " +
                           format_double(spec.target_rel_err));
  return r.value;
}

/// Convenience: seminorm power of a radial profile in any dimension (mirrors
/// to the line for n = 1).
inline double seminorm_power(const RadialProfile& u, const CriticalParams& prm,
                             const QuadratureSpec& spec = {}) {
  if (prm.n == 1) return gagliardo_1d(mirror_to_line(u), prm.s, prm.p, spec);
  return gagliardo_radial(u, prm, spec);
}

// ---------------------------------------------------------------------------
// Loss-Sloane directional route (n = 2): one-dimensional sections
//
//   2 [u]^p = int_{S^1} dH(w) int_{P(w)} dH(x0) [section]^p_{s,p,R},
//
// discretized over n_directions angles on [0, pi) (the two half-circles give
// equal contributions) and a midpoint offset grid across the support.

struct DirectionalOptions {
  int n_offsets = 48;
  double sample_step_factor = 0.5;  // section sampling step, in units of min(hx, hy)
  QuadratureSpec section_spec = {64, DiagonalMode::closed_form_linear, 0.0, 1e-2, false};
  bool error_estimate = true;
};

struct DirectionalResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

namespace detail {

inline double directional_pass(const GridFunction2D& u, double s, double p, int n_dir,
                               int n_off, double step, const QuadratureSpec& sspec) {
  // bounding radius of the support box
  const double rx = std::max(std::abs(u.x_lo()), std::abs(u.x_hi()));
  const double ry = std::max(std::abs(u.y_lo()), std::abs(u.y_hi()));
  const double Rb = std::hypot(rx, ry);
  double total = 0.0;
  for (int k = 0; k < n_dir; ++k) {
    const double phi = kPi * (k + 0.5) / n_dir;
    const double wx = std::cos(phi), wy = std::sin(phi);
    double dir_sum = 0.0;
    for (int m = 0; m < n_off; ++m) {
      const double tau = -Rb + 2.0 * Rb * (m + 0.5) / n_off;
      const double ox = -tau * wy, oy = tau * wx;  // offset point in P(w)
      // sample u along x0 + t w
      const int nsamp = std::max(8, static_cast<int>(std::ceil(2.0 * Rb / step)));
      std::vector<double> ts(nsamp + 1), vs(nsamp + 1);
      bool nonzero = false;
      for (int i = 0; i <= nsamp; ++i) {
        const double t = -Rb + 2.0 * Rb * i / nsamp;
        ts[i] = t;
        vs[i] = u(ox + t * wx, oy + t * wy);
        if (vs[i] != 0.0) nonzero = true;
      }
      if (!nonzero) continue;
      vs.front() = 0.0;
      vs.back() = 0.0;
      PiecewiseFunction1D section(std::move(ts), std::move(vs));
      dir_sum += gagliardo_1d_result(section, s, p, sspec).value;
    }
    total += dir_sum * (2.0 * Rb / n_off);
  }
  return total * (kPi / n_dir);
}

}  // namespace detail

inline DirectionalResult directional_seminorm(const GridFunction2D& u, double s, double p,
                                              int n_directions,
                                              const DirectionalOptions& opt = {}) {
  require_arg(s > 0.0 && s < 1.0, "directional_seminorm: s must lie in (0,1)");
  require_arg(p >= 1.0, "directional_seminorm: p must be >= 1");
  require_arg(n_directions >= 2, "directional_seminorm: need at least 2 directions");
  const double step = opt.sample_step_factor * std::min(u.hx(), u.hy());
  DirectionalResult res;
  res.value = detail::directional_pass(u, s, p, n_directions, opt.n_offsets, step,
                                       opt.section_spec);
  if (opt.error_estimate) {
    const double coarse = detail::directional_pass(
        u, s, p, std::max(2, n_directions / 2), std::max(8, opt.n_offsets / 2), 2.0 * step,
        opt.section_spec);
    res.error_estimate = std::abs(res.value - coarse);
  }
  return res;
}

}  // namespace fraclab
