#pragma once

#include "fraclab/profile.hpp"

namespace fraclab {

namespace detail {

struct AbsSegment {
  double lo, hi;   // coordinate interval (line) or radius interval
  double a, b;     // |u| at the ends, linear between
};

// Lebesgue measure of {|u| > t} (strict) or {|u| >= t}; `radial_n` = 0 means
// line measure, otherwise the n-dimensional measure omega/n * (r_hi^n - r_lo^n).
inline double measure_above(const std::vector<AbsSegment>& segs, double t, bool strict,
                            int radial_n) {
  auto chunk = [&](double lo, double hi) {
    if (hi <= lo) return 0.0;
    if (radial_n == 0) return hi - lo;
    return (std::pow(hi, radial_n) - std::pow(lo, radial_n));  // omega/n factored in later
  };
  double m = 0.0;
  for (const auto& s : segs) {
    const bool plateau = (s.a == s.b);
    if (plateau) {
      if (s.a > t || (!strict && s.a == t)) m += chunk(s.lo, s.hi);
      continue;
    }
    // linear from a to b; subinterval where value > t
    const double vmin = std::min(s.a, s.b), vmax = std::max(s.a, s.b);
    if (vmax <= t) continue;
    if (vmin >= t) {
      m += chunk(s.lo, s.hi);
      continue;
    }
    const double tc = (t - s.a) / (s.b - s.a);  // crossing parameter in (0,1)
    const double xc = s.lo + tc * (s.hi - s.lo);
    if (s.a > t)
      m += chunk(s.lo, xc);
    else
      m += chunk(xc, s.hi);
  }
  return m;
}

inline std::vector<AbsSegment> abs_segments_line(const PiecewiseFunction1D& u) {
  const PiecewiseFunction1D a = absolute(u);
  std::vector<AbsSegment> segs;
  const auto& x = a.xs();
  const auto& v = a.values();
  for (size_t i = 0; i + 1 < x.size(); ++i) segs.push_back({x[i], x[i + 1], v[i], v[i + 1]});
  return segs;
}

inline std::vector<AbsSegment> abs_segments_radial(const RadialProfile& u) {
  std::vector<AbsSegment> segs;
  const auto& r = u.radii();
  const auto& v = u.values();
  for (size_t i = 0; i + 1 < r.size(); ++i) {
    double a = v[i], b = v[i + 1];
    if ((a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0)) {
      const double tc = a / (a - b);
      const double xc = r[i] + tc * (r[i + 1] - r[i]);
      segs.push_back({r[i], xc, std::abs(a), 0.0});
      segs.push_back({xc, r[i + 1], 0.0, std::abs(b)});
    } else {
      segs.push_back({r[i], r[i + 1], std::abs(a), std::abs(b)});
    }
  }
  return segs;
}

inline RadialProfile rearrange_impl(const std::vector<AbsSegment>& segs, int n, int radial_n,
                                    int levels_between) {
  const double omega = surface_measure(n);
  auto to_radius = [&](double raw) {
    // raw is the line measure (radial_n = 0) or sum of r^n differences
    const double meas = (radial_n == 0) ? raw : surface_measure(radial_n) / radial_n * raw;
    return std::pow(n * meas / omega, 1.0 / n);
  };

  std::vector<double> levels;
  for (const auto& s : segs) {
    levels.push_back(s.a);
    levels.push_back(s.b);
  }
  levels.push_back(0.0);
  std::sort(levels.begin(), levels.end(), std::greater<double>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.size() == 1 || levels.front() == 0.0) {
    return RadialProfile({0.0, 1.0}, {0.0, 0.0});  // |u| = 0 a.e.
  }

  std::vector<double> radii{0.0}, values{levels.front()};
  auto push_point = [&](double r, double t) {
    if (r > radii.back() + 1e-15 * std::max(1.0, radii.back())) {
      radii.push_back(r);
      values.push_back(t);
    }
  };
  for (size_t j = 0; j < levels.size(); ++j) {
    const double t = levels[j];
    if (j > 0) {
      // intermediate levels (the measure map is curved for radial inputs)
      for (int m = 1; m <= levels_between; ++m) {
        const double tm =
            levels[j - 1] + (t - levels[j - 1]) * m / static_cast<double>(levels_between + 1);
        push_point(to_radius(measure_above(segs, tm, true, radial_n)), tm);
      }
    }
    push_point(to_radius(measure_above(segs, t, true, radial_n)), t);
    const double m_ge = measure_above(segs, t, false, radial_n);
    push_point(to_radius(m_ge), t);  // flat piece when {|u| = t} has mass
  }
  return RadialProfile(std::move(radii), std::move(values));
}

}  // namespace detail

/// Symmetric decreasing rearrangement of a line function (measures are exact
/// on the piecewise-linear representation, so norms are preserved to rounding).
inline RadialProfile rearrange(const PiecewiseFunction1D& u, int n = 1) {
  require_arg(n == 1, "rearrange: line functions rearrange into n = 1");
  return detail::rearrange_impl(detail::abs_segments_line(u), 1, 0, 0);
}

/// Symmetric decreasing rearrangement of a (possibly non-monotone) radial
/// function on R^n.
inline RadialProfile rearrange(const RadialProfile& u, int n) {
  require_arg(n >= 1, "rearrange: n must be >= 1");
  // r(t) is piecewise n-th-root-of-polynomial; extra levels control the
  // piecewise-linear resampling error (none needed for n = 1)
  const int between = (n == 1) ? 0 : 12;
  return detail::rearrange_impl(detail::abs_segments_radial(u), n, n, between);
}

}  // namespace fraclab
