#pragma once

#include "fraclab/common.hpp"
#include "fraclab/constants.hpp"

namespace fraclab {

// ---------------------------------------------------------------------------

/// Continuous piecewise-linear function on a strictly increasing breakpoint
/// grid, identically zero outside [xs.front(), xs.back()].
class PiecewiseFunction1D {
 public:
  PiecewiseFunction1D() = default;

  PiecewiseFunction1D(std::vector<double> xs, std::vector<double> vs)
      : x_(std::move(xs)), v_(std::move(vs)) {
    require_arg(x_.size() >= 2, "PiecewiseFunction1D: need at least two breakpoints");
    require_arg(x_.size() == v_.size(), "PiecewiseFunction1D: size mismatch");
    for (size_t i = 0; i + 1 < x_.size(); ++i)
      require_arg(x_[i] < x_[i + 1], "PiecewiseFunction1D: breakpoints must increase strictly");
    for (double v : v_)
      require_arg(std::isfinite(v), "PiecewiseFunction1D: values must be finite");
  }

  double operator()(double x) const {
    if (x <= x_.front() || x >= x_.back()) {
      if (x == x_.front()) return v_.front();
      if (x == x_.back()) return v_.back();
      return 0.0;
    }
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const size_t i = static_cast<size_t>(it - x_.begin()) - 1;
    const double t = (x - x_[i]) / (x_[i + 1] - x_[i]);
    return v_[i] + t * (v_[i + 1] - v_[i]);
  }

  const std::vector<double>& xs() const { return x_; }
  const std::vector<double>& values() const { return v_; }
  double support_lo() const { return x_.front(); }
  double support_hi() const { return x_.back(); }
  bool zero_boundary(double tol = 0.0) const {
    return std::abs(v_.front()) <= tol && std::abs(v_.back()) <= tol;
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : v_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::vector<double> x_, v_;
};

// ---------------------------------------------------------------------------

/// Radial representative u(|x|) sampled on a strictly increasing radius grid
/// that starts at 0; zero beyond the last node.
class RadialProfile {
 public:
  RadialProfile() = default;

  RadialProfile(std::vector<double> radii, std::vector<double> values)
      : r_(std::move(radii)), v_(std::move(values)) {
    require_arg(r_.size() >= 2, "RadialProfile: need at least two radii");
    require_arg(r_.size() == v_.size(), "RadialProfile: size mismatch");
    require_arg(r_.front() == 0.0, "RadialProfile: grid must start at r = 0");
    for (size_t i = 0; i + 1 < r_.size(); ++i)
      require_arg(r_[i] < r_[i + 1], "RadialProfile: radii must increase strictly");
    for (double v : v_) require_arg(std::isfinite(v), "RadialProfile: values must be finite");
    size_t last_nz = 0;
    bool any = false;
    for (size_t i = 0; i < v_.size(); ++i)
      if (v_[i] != 0.0) {
        last_nz = i;
        any = true;
      }
    support_radius_ = any ? r_[std::min(last_nz + 1, r_.size() - 1)] : 0.0;
    monotone_ = true;
    for (size_t i = 0; i + 1 < v_.size(); ++i)
      if (v_[i + 1] > v_[i] + 1e-14 * std::max(1.0, std::abs(v_[i]))) monotone_ = false;
  }

  double operator()(double r) const {
    require_arg(r >= 0.0, "RadialProfile: radius must be >= 0");
    if (r >= r_.back()) return (r == r_.back()) ? v_.back() : 0.0;
    const auto it = std::upper_bound(r_.begin(), r_.end(), r);
    const size_t i = static_cast<size_t>(it - r_.begin()) - 1;
    const double t = (r - r_[i]) / (r_[i + 1] - r_[i]);
    return v_[i] + t * (v_[i + 1] - v_[i]);
  }

  const std::vector<double>& radii() const { return r_; }
  const std::vector<double>& values() const { return v_; }
  double support_radius() const { return support_radius_; }
  bool monotone_nonincreasing() const { return monotone_; }
  bool compactly_supported() const { return v_.back() == 0.0; }
  double peak() const { return v_.front(); }

 private:
  std::vector<double> r_, v_;
  double support_radius_ = 0.0;
  bool monotone_ = false;
};

// ---------------------------------------------------------------------------

/// Even extension of a radial profile to the real line.
inline PiecewiseFunction1D mirror_to_line(const RadialProfile& u) {
  const auto& r = u.radii();
  const auto& v = u.values();
  std::vector<double> xs, vs;
  xs.reserve(2 * r.size() - 1);
  vs.reserve(2 * r.size() - 1);
  for (size_t i = r.size(); i-- > 1;) {
    xs.push_back(-r[i]);
    vs.push_back(v[i]);
  }
  for (size_t i = 0; i < r.size(); ++i) {
    xs.push_back(r[i]);
    vs.push_back(v[i]);
  }
  return PiecewiseFunction1D(std::move(xs), std::move(vs));
}

/// x -> u(l x): support shrinks by 1/l.
inline RadialProfile dilate(const RadialProfile& u, double l) {
  require_arg(l > 0.0, "dilate: scale must be positive");
  std::vector<double> r = u.radii();
  for (double& x : r) x /= l;
  return RadialProfile(std::move(r), u.values());
}

inline PiecewiseFunction1D dilate(const PiecewiseFunction1D& u, double l) {
  require_arg(l > 0.0, "dilate: scale must be positive");
  std::vector<double> xs = u.xs();
  for (double& x : xs) x /= l;
  return PiecewiseFunction1D(std::move(xs), u.values());
}

/// x -> u((x - x0)/l): support stretches by l and recenters at x0.
inline PiecewiseFunction1D translate_dilate(const PiecewiseFunction1D& u, double x0, double l) {
  require_arg(l > 0.0, "translate_dilate: scale must be positive");
  std::vector<double> xs = u.xs();
  for (double& x : xs) x = x0 + l * x;
  return PiecewiseFunction1D(std::move(xs), u.values());
}

inline PiecewiseFunction1D translate_dilate(const RadialProfile& u, double x0, double l) {
  return translate_dilate(mirror_to_line(u), x0, l);
}

inline RadialProfile scale_values(const RadialProfile& u, double c) {
  std::vector<double> v = u.values();
  for (double& x : v) x *= c;
  return RadialProfile(u.radii(), std::move(v));
}

inline PiecewiseFunction1D scale_values(const PiecewiseFunction1D& u, double c) {
  std::vector<double> v = u.values();
  for (double& x : v) x *= c;
  return PiecewiseFunction1D(u.xs(), std::move(v));
}

/// Exact piecewise-linear |u|: inserts breakpoints at the sign changes.
inline PiecewiseFunction1D absolute(const PiecewiseFunction1D& u) {
  const auto& x = u.xs();
  const auto& v = u.values();
  std::vector<double> xs, vs;
  xs.push_back(x[0]);
  vs.push_back(std::abs(v[0]));
  for (size_t i = 0; i + 1 < x.size(); ++i) {
    if ((v[i] > 0.0 && v[i + 1] < 0.0) || (v[i] < 0.0 && v[i + 1] > 0.0)) {
      const double t = v[i] / (v[i] - v[i + 1]);
      const double xr = x[i] + t * (x[i + 1] - x[i]);
      if (xr > xs.back() && xr < x[i + 1]) {
        xs.push_back(xr);
        vs.push_back(0.0);
      }
    }
    xs.push_back(x[i + 1]);
    vs.push_back(std::abs(v[i + 1]));
  }
  return PiecewiseFunction1D(std::move(xs), std::move(vs));
}

// ---------------------------------------------------------------------------

/// Scalar samples on a uniform 2D grid with bilinear interpolation, zero
/// outside the grid box. Row-major: value(i,j) at (x0 + i hx, y0 + j hy).
class GridFunction2D {
 public:
  GridFunction2D(double x0, double y0, double hx, double hy, int nx, int ny,
                 std::vector<double> vals)
      : x0_(x0), y0_(y0), hx_(hx), hy_(hy), nx_(nx), ny_(ny), v_(std::move(vals)) {
    require_arg(nx_ >= 2 && ny_ >= 2, "GridFunction2D: need at least a 2x2 grid");
    require_arg(hx_ > 0.0 && hy_ > 0.0, "GridFunction2D: spacings must be positive");
    require_arg(v_.size() == static_cast<size_t>(nx_) * ny_, "GridFunction2D: size mismatch");
  }

  template <class F>
  static GridFunction2D sample(F&& f, double x0, double y0, double hx, double hy, int nx, int ny) {
    std::vector<double> vals(static_cast<size_t>(nx) * ny);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) vals[static_cast<size_t>(i) * ny + j] = f(x0 + i * hx, y0 + j * hy);
    return GridFunction2D(x0, y0, hx, hy, nx, ny, std::move(vals));
  }

  double operator()(double x, double y) const {
    const double fx = (x - x0_) / hx_;
    const double fy = (y - y0_) / hy_;
    if (fx <= 0.0 || fy <= 0.0 || fx >= nx_ - 1 || fy >= ny_ - 1) {
      // grid boundary values are expected to be 0 for compactly supported data
      if (fx < 0.0 || fy < 0.0 || fx > nx_ - 1 || fy > ny_ - 1) return 0.0;
    }
    const int i = std::min(static_cast<int>(fx), nx_ - 2);
    const int j = std::min(static_cast<int>(fy), ny_ - 2);
    const double tx = fx - i, ty = fy - j;
    const double v00 = at(i, j), v10 = at(i + 1, j), v01 = at(i, j + 1), v11 = at(i + 1, j + 1);
    return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 + tx * ty * v11;
  }

  double at(int i, int j) const { return v_[static_cast<size_t>(i) * ny_ + j]; }
  double x_lo() const { return x0_; }
  double y_lo() const { return y0_; }
  double x_hi() const { return x0_ + (nx_ - 1) * hx_; }
  double y_hi() const { return y0_ + (ny_ - 1) * hy_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }

  /// Quarter-turn rotation; requires a square grid on a centered box so the
  /// rotated samples land on the same grid.
  GridFunction2D rotated90() const {
    require_arg(nx_ == ny_ && hx_ == hy_, "rotated90: grid must be square");
    require_arg(std::abs(x0_ + x_hi()) < 1e-12 && std::abs(y0_ + y_hi()) < 1e-12,
                "rotated90: box must be centered at the origin");
    std::vector<double> w(v_.size());
    for (int i = 0; i < nx_; ++i)
      for (int j = 0; j < ny_; ++j)
        w[static_cast<size_t>(i) * ny_ + j] = at(j, nx_ - 1 - i);
    return GridFunction2D(x0_, y0_, hx_, hy_, nx_, ny_, std::move(w));
  }

 private:
  double x0_, y0_, hx_, hy_;
  int nx_, ny_;
  std::vector<double> v_;
};

// ---------------------------------------------------------------------------
// Exact L^q integrals of piecewise-linear functions. On each (sign-split)
// segment the integrand is x^{n-1} |a + b x|^q with integer n, which reduces
// to a binomial combination of power antiderivatives. Near-flat segments in
// n >= 2 would make the binomial expansion ill-conditioned; those fall back
// to a Gauss rule on what is then a smooth integrand.

namespace detail {

// t1^e - t0^e without cancellation for t1 ~ t0 (both >= 0).
inline double stable_pow_diff(double t0, double t1, double e) {
  if (t0 == 0.0) return std::pow(t1, e);
  if (t1 == 0.0) return -std::pow(t0, e);
  return std::pow(t0, e) * std::expm1(e * std::log1p((t1 - t0) / t0));
}

// int_{x0}^{x1} x^{n-1} |v0 + slope*(x - x0)|^q dx with u one-signed on the segment.
inline double segment_power_integral(double x0, double x1, double v0, double v1, double q, int n) {
  const double h = x1 - x0;
  const double vmax = std::max(std::abs(v0), std::abs(v1));
  if (vmax == 0.0 || h <= 0.0) return 0.0;
  const double slope = (v1 - v0) / h;
  const bool gentle = std::abs(v1 - v0) <= 0.5 * vmax;
  if (gentle && n > 1) {
    // u stays within a factor ~3 of vmax here, so the integrand is smooth
    const GaussRule& g = gauss_rule(20);
    double acc = 0.0;
    for (size_t i = 0; i < g.x.size(); ++i) {
      const double x = 0.5 * (x0 + x1) + 0.5 * h * g.x[i];
      const double u = v0 + slope * (x - x0);
      acc += g.w[i] * std::pow(x, n - 1) * std::pow(std::abs(u), q);
    }
    return 0.5 * h * acc;
  }
  if (std::abs(v1 - v0) <= 1e-15 * vmax) {
    return std::pow(std::abs(v0), q) * (std::pow(x1, n) - std::pow(x0, n)) / n;
  }
  // substitute w = u(x); x = c + w/slope with c = x0 - v0/slope
  const double c = x0 - v0 / slope;
  const double sgn = (v0 + v1 >= 0.0) ? 1.0 : -1.0;  // sign of u on the segment
  const double t0 = std::abs(v0), t1 = std::abs(v1);
  double result = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= n - 1; ++j) {
    const double coeff = binom * std::pow(c, n - 1 - j) / std::pow(slope, j);
    const double e = q + j + 1.0;
    const double anti = stable_pow_diff(t0, t1, e) / e;
    const double sign_factor = (j % 2 == 0) ? sgn : 1.0;  // sgn^{j+1} from |w|^q w^j dw
    result += coeff * sign_factor * anti;
    binom *= static_cast<double>(n - 1 - j) / (j + 1.0);
  }
  return result / slope;
}

}  // namespace detail

/// omega_{n-1} * int_0^inf r^{n-1} |u(r)|^q dr, exact per segment.
inline double lq_power_integral(const RadialProfile& u, double q, int n) {
  require_arg(q >= 1.0, "lq_norm: q must be >= 1");
  require_arg(n >= 1, "lq_norm: n must be >= 1");
  const auto& r = u.radii();
  const auto& v = u.values();
  double total = 0.0;
  for (size_t i = 0; i + 1 < r.size(); ++i) {
    double a = r[i], b = r[i + 1], va = v[i], vb = v[i + 1];
    if (va == 0.0 && vb == 0.0) continue;
    if ((va > 0.0 && vb < 0.0) || (va < 0.0 && vb > 0.0)) {
      const double t = va / (va - vb);
      const double xr = a + t * (b - a);
      total += detail::segment_power_integral(a, xr, va, 0.0, q, n);
      total += detail::segment_power_integral(xr, b, 0.0, vb, q, n);
    } else {
      total += detail::segment_power_integral(a, b, va, vb, q, n);
    }
  }
  return surface_measure(n) * total;
}

/// ||u||_{L^q} of a radial function on R^n.
inline double lq_norm(const RadialProfile& u, double q, int n) {
  return std::pow(lq_power_integral(u, q, n), 1.0 / q);
}

/// int_R |u|^q for a line function (no angular factor).
inline double lq_power_integral_line(const PiecewiseFunction1D& u, double q) {
  require_arg(q >= 1.0, "lq_norm: q must be >= 1");
  const auto& x = u.xs();
  const auto& v = u.values();
  double total = 0.0;
  for (size_t i = 0; i + 1 < x.size(); ++i) {
    double a = x[i], b = x[i + 1], va = v[i], vb = v[i + 1];
    if (va == 0.0 && vb == 0.0) continue;
    auto piece = [&](double pa, double pb, double wa, double wb) {
      const double h = pb - pa;
      const double vmax = std::max(std::abs(wa), std::abs(wb));
      if (vmax == 0.0 || h <= 0.0) return 0.0;
      if (std::abs(wb - wa) <= 1e-15 * vmax) return std::pow(std::abs(wa), q) * h;
      const double slope = (wb - wa) / h;
      const double e = q + 1.0;
      return std::abs(detail::stable_pow_diff(std::abs(wa), std::abs(wb), e) / (e * slope));
    };
    if ((va > 0.0 && vb < 0.0) || (va < 0.0 && vb > 0.0)) {
      const double t = va / (va - vb);
      const double xr = a + t * (b - a);
      total += piece(a, xr, va, 0.0);
      total += piece(xr, b, 0.0, vb);
    } else {
      total += piece(a, b, va, vb);
    }
  }
  return total;
}

inline double lq_norm_line(const PiecewiseFunction1D& u, double q) {
  return std::pow(lq_power_integral_line(u, q), 1.0 / q);
}

}  // namespace fraclab
