#pragma once

#include <memory>

#include "fraclab/common.hpp"
#include "fraclab/constants.hpp"

namespace fraclab {

enum class DiagonalMode { closed_form_linear, band_exclusion };

/// Resolution and accuracy control for the singular double integrals.
struct QuadratureSpec {
  int cells_per_dim = 160;
  DiagonalMode diagonal_mode = DiagonalMode::closed_form_linear;
  double tail_radius = 0.0;  // 0 = automatic (2x support radius); must exceed the support
  double target_rel_err = 1e-3;
  bool error_check = true;

  void validate(double support_radius) const {
    require_arg(cells_per_dim >= 8, "QuadratureSpec: cells_per_dim must be >= 8");
    require_arg(target_rel_err > 0.0, "QuadratureSpec: target_rel_err must be > 0");
    if (tail_radius != 0.0)
      require_arg(tail_radius > support_radius,
                  "QuadratureSpec: tail_radius must exceed the support radius");
  }
};

// ---------------------------------------------------------------------------
// Angular kernel of the radial reduction.
//
// For radial u on R^n,
//   [u]^p = omega_{n-1} int int r^{n-1} rho^{n-1} |u(r)-u(rho)|^p A(r,rho) dr drho,
//   A(r,rho) = omega_{n-2} int_0^pi sin^{n-2}(t) (r^2 + rho^2 - 2 r rho cos t)^{-(n+sp)/2} dt.
// A depends on (r,rho) only through zeta = |r-rho| / (2 sqrt(r rho)):
//   A = (4 r rho)^{-(n+sp)/2} G(zeta),  G(zeta) = omega_{n-2} int_0^pi sin^{n-2} t (zeta^2 + sin^2(t/2))^{-(n+sp)/2} dt,
// and g0(zeta) := zeta^{1+sp} G(zeta) is bounded on [0, inf), so one table per
// (n, sp) serves every kernel evaluation.

class AngularTable {
 public:
  AngularTable(int n, double sp) : n_(n), sp_(sp) {
    require_arg(n >= 2, "AngularTable: n must be >= 2");
    omega_nm2_ = surface_measure(n - 1);  // measure of S^{n-2} in R^{n-1}
    const double a = 0.5 * (n + sp);
    I_[0] = moment(0);
    I_[1] = moment(1);
    I_[2] = moment(2);
    I_[3] = moment(3);
    c_[0] = 1.0;
    c_[1] = a;
    c_[2] = a * (a + 1.0) / 2.0;
    c_[3] = a * (a + 1.0) * (a + 2.0) / 6.0;
    const int N = 2048;
    eta_max_ = zeta_switch_ / (1.0 + zeta_switch_);
    val_.resize(N);
    for (int i = 0; i < N; ++i) {
      const double eta = eta_max_ * i / (N - 1);
      const double zeta = eta / (1.0 - eta);
      val_[i] = (i == 0) ? g0_at_zero() : direct_g0(zeta);
    }
    slope_.resize(N);
    const double de = eta_max_ / (N - 1);
    for (int i = 0; i < N; ++i) {
      if (i == 0)
        slope_[i] = (val_[1] - val_[0]) / de;
      else if (i == N - 1)
        slope_[i] = (val_[N - 1] - val_[N - 2]) / de;
      else
        slope_[i] = (val_[i + 1] - val_[i - 1]) / (2.0 * de);
    }
  }

  double g0(double zeta) const {
    if (zeta >= zeta_switch_) {
      const double z2 = zeta * zeta;
      const double series = c_[0] * I_[0] - c_[1] * I_[1] / z2 + c_[2] * I_[2] / (z2 * z2) -
                            c_[3] * I_[3] / (z2 * z2 * z2);
      return omega_nm2_ * std::pow(zeta, 1.0 - n_) * series;
    }
    const double eta = zeta / (1.0 + zeta);
    const int N = static_cast<int>(val_.size());
    const double de = eta_max_ / (N - 1);
    int i = std::min(static_cast<int>(eta / de), N - 2);
    const double t = (eta - i * de) / de;
    // cubic Hermite on the eta grid
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    return h00 * val_[i] + h10 * de * slope_[i] + h01 * val_[i + 1] + h11 * de * slope_[i + 1];
  }

  /// g0 by direct quadrature (table-free); used to validate the interpolation.
  double direct_g0(double zeta) const {
    // geometric panels resolve the theta ~ zeta peak of the integrand
    auto f = [&](double th) {
      const double st = std::sin(0.5 * th);
      return std::pow(std::sin(th), n_ - 2.0) * std::pow(zeta * zeta + st * st, -0.5 * (n_ + sp_));
    };
    const GaussRule& g = gauss_rule(16);
    double acc = 0.0;
    double lo = 0.0, hi = std::min(zeta, kPi);
    for (;;) {
      if (hi > lo) {
        for (size_t q = 0; q < g.x.size(); ++q)
          acc += 0.5 * (hi - lo) * g.w[q] * f(0.5 * (lo + hi) + 0.5 * (hi - lo) * g.x[q]);
      }
      if (hi >= kPi) break;
      lo = hi;
      hi = std::min(2.0 * hi, kPi);
    }
    return omega_nm2_ * acc * std::pow(zeta, 1.0 + sp_);
  }

  double g0_at_zero() const {
    // omega_{n-2} 2^{n-2} B((n-1)/2, (sp+1)/2)
    const double lb = std::lgamma(0.5 * (n_ - 1.0)) + std::lgamma(0.5 * (sp_ + 1.0)) -
                      std::lgamma(0.5 * (n_ + sp_));
    return omega_nm2_ * std::pow(2.0, n_ - 2.0) * std::exp(lb);
  }

  static std::shared_ptr<const AngularTable> get(int n, double sp) {
    static std::mutex mu;
    static std::map<std::pair<int, long long>, std::shared_ptr<const AngularTable>> cache;
    const auto key = std::make_pair(n, static_cast<long long>(std::llround(sp * 1e12)));
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end())
      it = cache.emplace(key, std::make_shared<AngularTable>(n, sp)).first;
    return it->second;
  }

 private:
  double moment(int m) const {
    auto f = [&](double th) {
      const double st = std::sin(0.5 * th);
      return std::pow(std::sin(th), n_ - 2.0) * std::pow(st * st, static_cast<double>(m));
    };
    return adaptive_simpson(f, 0.0, kPi, 1e-13);
  }

  int n_;
  double sp_;
  double omega_nm2_;
  double zeta_switch_ = 32.0;
  double eta_max_;
  double I_[4], c_[4];
  std::vector<double> val_, slope_;
};

// ---------------------------------------------------------------------------
// Kernels. The full integrand weight is smooth(x,y) * |x-y|^{-1-sp}; the line
// kernel has smooth == 1, the radial kernel folds the angular reduction and
// the r^{n-1} rho^{n-1} volume factors into smooth.

struct LineKernel {
  double sp;
  static constexpr bool unit_smooth = true;
  double smooth(double, double) const { return 1.0; }
};

struct RadialKernel {
  int n;
  double sp;
  double omega;  // omega_{n-1}
  std::shared_ptr<const AngularTable> table;

  static constexpr bool unit_smooth = false;

  static RadialKernel make(int n, double sp) {
    return RadialKernel{n, sp, surface_measure(n), AngularTable::get(n, sp)};
  }

  double smooth(double r, double rho) const {
    if (r <= 0.0 || rho <= 0.0) return 0.0;
    const double rr = r * rho;
    const double zeta = std::abs(r - rho) / (2.0 * std::sqrt(rr));
    return omega * std::pow(2.0, 1.0 - n) * std::pow(rr, 0.5 * (n - 1.0)) * table->g0(zeta);
  }
};

// ---------------------------------------------------------------------------

namespace detail {

struct WalkOptions {
  DiagonalMode diagonal_mode = DiagonalMode::closed_form_linear;
  double band_fraction = 0.05;          // band width as a fraction of the cell size
  bool active_only = false;             // restrict the double integral to active x active cells
  std::span<const char> active;         // cell mask for active_only
  std::span<const char> zero_cell;      // cells where u is identically zero (skippable pairs)
  std::span<const double> slopes;       // when known, |m(w)|^p sign kinks get their own panels
};

/// Consumers of the decomposed double integral. Contributions come in four
/// shapes, all linear-in-quadrature-weight:
///   slope_term:  E += |slope(cell)|^p * coeff
///   adj_point:   E += w * |a*slope(cell) + b*slope(cell+1)|^p
///   far_point:   E += w * |u(x(cx,tx)) - u(y(cy,ty))|^p
///   bnd_point:   E += w * |u(x(cell,t))|^p
template <class Kern, class Sink>
void walk_cell_pairs(std::span<const double> x, double p, const Kern& kern,
                     const WalkOptions& opt, Sink& sink) {
  const double sp = kern.sp;
  const double lam = p - 1.0 - sp;  // same-cell exponent, > -1 since s < 1 <= p
  const int C = static_cast<int>(x.size()) - 1;
  const GaussRule& gw8 = gauss_rule(8);
  const GaussRule& gt10 = gauss_rule(10);
  const GaussRule& gd12 = gauss_rule(12);
  const bool band = opt.diagonal_mode == DiagonalMode::band_exclusion;

  auto cell_usable = [&](int i) {
    if (opt.active_only && !opt.active.empty() && !opt.active[i]) return false;
    return true;
  };
  auto cell_zero = [&](int i) { return !opt.zero_cell.empty() && opt.zero_cell[i]; };

  for (int i = 0; i < C; ++i) {
    if (!cell_usable(i)) continue;
    const double hi_ = x[i + 1] - x[i];

    // -- same cell -------------------------------------------------------
    if (!cell_zero(i)) {
      const double dlo = band ? opt.band_fraction * hi_ : 0.0;
      double coeff = 0.0;
      if constexpr (Kern::unit_smooth) {
        if (dlo == 0.0) {
          coeff = 2.0 * std::pow(hi_, lam + 2.0) / ((lam + 1.0) * (lam + 2.0));
        } else {
          const double a1 = (std::pow(hi_, lam + 1.0) - std::pow(dlo, lam + 1.0)) / (lam + 1.0);
          const double a2 = (std::pow(hi_, lam + 2.0) - std::pow(dlo, lam + 2.0)) / (lam + 2.0);
          coeff = 2.0 * (hi_ * a1 - a2);
        }
      } else {
        // coeff = 2 int_dlo^h d^lam [ int_lo^{hi-d} S(rho+d, rho) drho ] dd
        auto Gd = [&](double d) {
          const double w = hi_ - d;
          if (w <= 0.0) return 0.0;
          double acc = 0.0;
          for (size_t q = 0; q < gw8.x.size(); ++q) {
            const double rho = x[i] + 0.5 * w * (1.0 + gw8.x[q]);
            acc += 0.5 * w * gw8.w[q] * kern.smooth(rho + d, rho);
          }
          return acc;
        };
        if (dlo == 0.0) {
          const double nu = 1.0 / (lam + 1.0);
          double acc = 0.0;
          for (size_t q = 0; q < gt10.x.size(); ++q) {
            const double t = 0.5 * (1.0 + gt10.x[q]);
            acc += 0.5 * gt10.w[q] * Gd(hi_ * std::pow(t, nu));
          }
          coeff = 2.0 * std::pow(hi_, lam + 1.0) / (lam + 1.0) * acc;
        } else {
          double acc = 0.0;
          for (size_t q = 0; q < gd12.x.size(); ++q) {
            const double d = 0.5 * (dlo + hi_) + 0.5 * (hi_ - dlo) * gd12.x[q];
            acc += 0.5 * (hi_ - dlo) * gd12.w[q] * std::pow(d, lam) * Gd(d);
          }
          coeff = 2.0 * acc;
        }
      }
      sink.slope_term(i, coeff);
    }

    // -- adjacent cells (shared node) -------------------------------------
    if (i + 1 < C && cell_usable(i + 1) && !(cell_zero(i) && cell_zero(i + 1))) {
      const double h2 = x[i + 2] - x[i + 1];
      const double c = x[i + 1];
      const double dlo = band ? opt.band_fraction * std::min(hi_, h2) : 0.0;
      std::vector<double> splits{0.0, hi_ / (hi_ + h2), 1.0};
      if (!opt.slopes.empty()) {
        const double s1 = opt.slopes[i], s2 = opt.slopes[i + 1];
        if ((s1 > 0.0 && s2 < 0.0) || (s1 < 0.0 && s2 > 0.0)) {
          const double wr = s2 / (s2 - s1);  // s1*w + s2*(1-w) = 0
          if (wr > 1e-12 && wr < 1.0 - 1e-12) splits.push_back(wr);
        }
      }
      std::sort(splits.begin(), splits.end());
      for (size_t pnl = 0; pnl + 1 < splits.size(); ++pnl) {
        const double wa = splits[pnl], wb = splits[pnl + 1];
        if (wb - wa < 1e-15) continue;
        for (size_t q = 0; q < gw8.x.size(); ++q) {
          const double w = 0.5 * (wa + wb) + 0.5 * (wb - wa) * gw8.x[q];
          const double gw = 0.5 * (wb - wa) * gw8.w[q];
          const double D = std::min(hi_ / std::max(w, 1e-300),
                                    h2 / std::max(1.0 - w, 1e-300));
          double dint = 0.0;
          if constexpr (Kern::unit_smooth) {
            dint = (std::pow(D, lam + 2.0) - (dlo > 0.0 ? std::pow(dlo, lam + 2.0) : 0.0)) /
                   (lam + 2.0);
          } else {
            if (dlo == 0.0) {
              const double nu = 1.0 / (lam + 2.0);
              double acc = 0.0;
              for (size_t r = 0; r < gt10.x.size(); ++r) {
                const double t = 0.5 * (1.0 + gt10.x[r]);
                const double d = D * std::pow(t, nu);
                acc += 0.5 * gt10.w[r] * kern.smooth(c - d * w, c + d * (1.0 - w));
              }
              dint = std::pow(D, lam + 2.0) / (lam + 2.0) * acc;
            } else if (D > dlo) {
              double acc = 0.0;
              for (size_t r = 0; r < gd12.x.size(); ++r) {
                const double d = 0.5 * (dlo + D) + 0.5 * (D - dlo) * gd12.x[r];
                acc += 0.5 * (D - dlo) * gd12.w[r] * std::pow(d, lam + 1.0) *
                       kern.smooth(c - d * w, c + d * (1.0 - w));
              }
              dint = acc;
            }
          }
          sink.adj_point(i, w, 1.0 - w, 2.0 * gw * dint);
        }
      }
    }

    // -- separated cells ---------------------------------------------------
    for (int j = i + 2; j < C; ++j) {
      if (!cell_usable(j)) continue;
      if (cell_zero(i) && cell_zero(j)) continue;
      const double hj = x[j + 1] - x[j];
      const double gap = x[j] - x[i + 1];
      const double ratio = gap / std::max(hi_, hj);
      const int order = ratio < 0.7 ? 10 : ratio < 1.5 ? 8 : ratio < 4.0 ? 6 : 4;
      const GaussRule& g = gauss_rule(order);
      const double mx = 0.5 * (x[i] + x[i + 1]), my = 0.5 * (x[j] + x[j + 1]);
      for (int a = 0; a < order; ++a) {
        const double xa = mx + 0.5 * hi_ * g.x[a];
        const double ta = 0.5 * (1.0 + g.x[a]);
        for (int b = 0; b < order; ++b) {
          const double yb = my + 0.5 * hj * g.x[b];
          const double tb = 0.5 * (1.0 + g.x[b]);
          const double w = 0.5 * hi_ * g.w[a] * 0.5 * hj * g.w[b] *
                           kern.smooth(xa, yb) * std::pow(yb - xa, -1.0 - sp) * 2.0;
          sink.far_point(i, j, ta, tb, w);
        }
      }
    }
  }
}

/// Cross terms with the exterior of the support on the line:
/// 2 int |u(x)|^p [ (x-A)^{-sp} + (B-x)^{-sp} ] / sp dx, exact in y.
template <class Sink>
void add_line_outside(std::span<const double> x, double sp, double p, const WalkOptions& opt,
                      Sink& sink) {
  const int C = static_cast<int>(x.size()) - 1;
  const double A = x.front(), B = x.back();
  const GaussRule& g8 = gauss_rule(8);
  auto cell_zero = [&](int i) { return !opt.zero_cell.empty() && opt.zero_cell[i]; };
  const double mu = p - sp;  // edge exponent of |u|^p (x-A)^{-sp}
  for (int i = 0; i < C; ++i) {
    if (cell_zero(i)) continue;
    const double h = x[i + 1] - x[i];
    if (i == 0) {
      sink.slope_term(0, 2.0 * std::pow(h, mu + 1.0) / ((mu + 1.0) * sp));
    } else {
      for (size_t q = 0; q < g8.x.size(); ++q) {
        const double xx = 0.5 * (x[i] + x[i + 1]) + 0.5 * h * g8.x[q];
        sink.bnd_point(i, 0.5 * (1.0 + g8.x[q]),
                       2.0 * 0.5 * h * g8.w[q] * std::pow(xx - A, -sp) / sp);
      }
    }
    if (i == C - 1) {
      sink.slope_term(C - 1, 2.0 * std::pow(h, mu + 1.0) / ((mu + 1.0) * sp));
    } else {
      for (size_t q = 0; q < g8.x.size(); ++q) {
        const double xx = 0.5 * (x[i] + x[i + 1]) + 0.5 * h * g8.x[q];
        sink.bnd_point(i, 0.5 * (1.0 + g8.x[q]),
                       2.0 * 0.5 * h * g8.w[q] * std::pow(B - xx, -sp) / sp);
      }
    }
  }
}

/// Cross terms with { |y| > R } for the radial kernel. The inner integral is
/// W(r) = int_R^inf S(r,rho) (rho-r)^{-1-sp} drho, mapped onto [0,1) with the
/// distance-to-support pacing rho = R + (R-r) xi/(1-xi).
template <class Kern, class Sink>
void add_radial_outside(std::span<const double> x, double p, const Kern& kern,
                        const WalkOptions& opt, Sink& sink) {
  const double sp = kern.sp;
  const int C = static_cast<int>(x.size()) - 1;
  const double R = x.back();
  const GaussRule& g24 = gauss_rule(24);
  const GaussRule& g8 = gauss_rule(8);
  const GaussRule& gt12 = gauss_rule(12);
  auto cell_zero = [&](int i) { return !opt.zero_cell.empty() && opt.zero_cell[i]; };

  auto W = [&](double r) {  // = (R-r)^{-sp} * Wtilde(r)
    double acc = 0.0;
    for (size_t q = 0; q < g24.x.size(); ++q) {
      const double xi = 0.5 * (1.0 + g24.x[q]);
      const double rho = R + (R - r) * xi / (1.0 - xi);
      acc += 0.5 * g24.w[q] * kern.smooth(r, rho) * std::pow(1.0 - xi, sp - 1.0);
    }
    return acc * std::pow(R - r, -sp);
  };

  const double mu = p - sp;
  for (int i = 0; i < C; ++i) {
    if (cell_zero(i)) continue;
    const double h = x[i + 1] - x[i];
    if (i == C - 1) {
      // u = slope*(R - r) here; graded nodes absorb the (R-r)^{p-sp} edge power
      const double nu = 1.0 / (mu + 1.0);
      double acc = 0.0;
      for (size_t q = 0; q < gt12.x.size(); ++q) {
        const double t = 0.5 * (1.0 + gt12.x[q]);
        const double xi = h * std::pow(t, nu);
        acc += 0.5 * gt12.w[q] * std::pow(xi, sp) * W(R - xi);
      }
      sink.slope_term(i, 2.0 * std::pow(h, mu + 1.0) / (mu + 1.0) * acc);
    } else {
      for (size_t q = 0; q < g8.x.size(); ++q) {
        const double r = 0.5 * (x[i] + x[i + 1]) + 0.5 * h * g8.x[q];
        sink.bnd_point(i, 0.5 * (1.0 + g8.x[q]), 2.0 * 0.5 * h * g8.w[q] * W(r));
      }
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// Decomposed, u-independent quadrature of the double integral, reusable
/// across many evaluations on the same grid (energy minimization) and
/// assemblable into a dense quadratic form when p = 2.
class PairEngine {
 public:
  struct SlopeTerm {
    int cell;
    double coeff;
  };
  struct AdjPoint {
    int cell;
    double a, b, w;
  };
  struct FarPoint {
    int cx, cy;
    float tx, ty;
    double w;
  };
  struct BndPoint {
    int cell;
    float t;
    double w;
  };

  PairEngine(std::vector<double> nodes, double p) : x_(std::move(nodes)), p_(p) {
    const size_t C = x_.size() - 1;
    inv_h_.resize(C);
    for (size_t i = 0; i < C; ++i) inv_h_[i] = 1.0 / (x_[i + 1] - x_[i]);
  }

  void slope_term(int cell, double coeff) { same_.push_back({cell, coeff}); }
  void adj_point(int cell, double a, double b, double w) {
    if (w != 0.0) adj_.push_back({cell, a, b, w});
  }
  void far_point(int cx, int cy, double tx, double ty, double w) {
    far_.push_back({cx, cy, static_cast<float>(tx), static_cast<float>(ty), w});
  }
  void bnd_point(int cell, double t, double w) {
    bnd_.push_back({cell, static_cast<float>(t), w});
  }

  const std::vector<double>& nodes() const { return x_; }
  size_t node_count() const { return x_.size(); }

  double energy(std::span<const double> v) const {
    return eval(v, nullptr);
  }

  double energy_and_gradient(std::span<const double> v, std::span<double> grad) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    return eval(v, grad.data());
  }

  /// Dense symmetric matrix of the p = 2 quadratic form on the nodal basis.
  std::vector<double> assemble_p2() const {
    require_arg(p_ == 2.0, "assemble_p2: only valid for p = 2");
    const size_t N = x_.size();
    std::vector<double> A(N * N, 0.0);
    auto add = [&](size_t a, size_t b, double val) {
      A[a * N + b] += val;
      if (a != b) A[b * N + a] += val;
    };
    for (const auto& t : same_) {
      const double c = t.coeff * inv_h_[t.cell] * inv_h_[t.cell];
      add(t.cell, t.cell, c);
      add(t.cell + 1, t.cell + 1, c);
      add(t.cell, t.cell + 1, -c);
    }
    for (const auto& a : adj_) {
      // m = a.a*s1 + a.b*s2 with s1 = (v[c+1]-v[c])/h1, s2 = (v[c+2]-v[c+1])/h2
      const int c = a.cell;
      const double c1 = a.a * inv_h_[c], c2 = a.b * inv_h_[c + 1];
      const double g[3] = {-c1, c1 - c2, c2};  // coefficients on v[c], v[c+1], v[c+2]
      for (int r = 0; r < 3; ++r)
        for (int s = r; s < 3; ++s) add(c + r, c + s, a.w * g[r] * g[s]);
    }
    for (const auto& f : far_) {
      // far pairs are separated (cy >= cx + 2), so the four node indices are distinct
      const double g[4] = {1.0 - f.tx, f.tx, -(1.0 - f.ty), -static_cast<double>(f.ty)};
      const size_t idx[4] = {static_cast<size_t>(f.cx), static_cast<size_t>(f.cx) + 1,
                             static_cast<size_t>(f.cy), static_cast<size_t>(f.cy) + 1};
      for (int r = 0; r < 4; ++r)
        for (int s = r; s < 4; ++s) add(idx[r], idx[s], f.w * g[r] * g[s]);
    }
    for (const auto& b : bnd_) {
      const double g[2] = {1.0 - b.t, b.t};
      for (int r = 0; r < 2; ++r)
        for (int s = r; s < 2; ++s) add(b.cell + r, b.cell + s, b.w * g[r] * g[s]);
    }
    return A;
  }

 private:
  double eval(std::span<const double> v, double* grad) const {
    const size_t C = x_.size() - 1;
    slopes_.resize(C);
    for (size_t i = 0; i < C; ++i) slopes_[i] = (v[i + 1] - v[i]) * inv_h_[i];
    const bool p2 = (p_ == 2.0);
    auto powp = [&](double a) { return p2 ? a * a : std::pow(std::abs(a), p_); };
    auto dpow = [&](double a) {
      return p2 ? 2.0 * a : (a == 0.0 ? 0.0 : p_ * std::copysign(std::pow(std::abs(a), p_ - 1.0), a));
    };
    double E = 0.0;
    for (const auto& t : same_) {
      const double s = slopes_[t.cell];
      E += powp(s) * t.coeff;
      if (grad) {
        const double d = dpow(s) * t.coeff * inv_h_[t.cell];
        grad[t.cell] -= d;
        grad[t.cell + 1] += d;
      }
    }
    for (const auto& a : adj_) {
      const double m = a.a * slopes_[a.cell] + a.b * slopes_[a.cell + 1];
      E += a.w * powp(m);
      if (grad) {
        const double d = a.w * dpow(m);
        const double d1 = d * a.a * inv_h_[a.cell];
        const double d2 = d * a.b * inv_h_[a.cell + 1];
        grad[a.cell] -= d1;
        grad[a.cell + 1] += d1 - d2;
        grad[a.cell + 2] += d2;
      }
    }
    for (const auto& f : far_) {
      const double ux = v[f.cx] + f.tx * (v[f.cx + 1] - v[f.cx]);
      const double uy = v[f.cy] + f.ty * (v[f.cy + 1] - v[f.cy]);
      const double du = ux - uy;
      E += f.w * powp(du);
      if (grad) {
        const double d = f.w * dpow(du);
        grad[f.cx] += d * (1.0 - f.tx);
        grad[f.cx + 1] += d * f.tx;
        grad[f.cy] -= d * (1.0 - f.ty);
        grad[f.cy + 1] -= d * f.ty;
      }
    }
    for (const auto& b : bnd_) {
      const double u = v[b.cell] + b.t * (v[b.cell + 1] - v[b.cell]);
      E += b.w * powp(u);
      if (grad) {
        const double d = b.w * dpow(u);
        grad[b.cell] += d * (1.0 - b.t);
        grad[b.cell + 1] += d * b.t;
      }
    }
    return E;
  }

  std::vector<double> x_, inv_h_;
  std::vector<SlopeTerm> same_;
  std::vector<AdjPoint> adj_;
  std::vector<FarPoint> far_;
  std::vector<BndPoint> bnd_;
  mutable std::vector<double> slopes_;
  double p_;
};

// ---------------------------------------------------------------------------

namespace detail {

/// Streaming one-shot evaluation: no intermediate storage.
struct EnergySink {
  std::span<const double> x, v;
  double p;
  std::vector<double> slopes;
  double E = 0.0;
  bool p2;

  EnergySink(std::span<const double> xs, std::span<const double> vs, double pp)
      : x(xs), v(vs), p(pp), p2(pp == 2.0) {
    slopes.resize(x.size() - 1);
    for (size_t i = 0; i + 1 < x.size(); ++i) slopes[i] = (v[i + 1] - v[i]) / (x[i + 1] - x[i]);
  }
  double powp(double a) const { return p2 ? a * a : std::pow(std::abs(a), p); }
  void slope_term(int cell, double coeff) { E += powp(slopes[cell]) * coeff; }
  void adj_point(int cell, double a, double b, double w) {
    E += w * powp(a * slopes[cell] + b * slopes[cell + 1]);
  }
  void far_point(int cx, int cy, double tx, double ty, double w) {
    const double ux = v[cx] + tx * (v[cx + 1] - v[cx]);
    const double uy = v[cy] + ty * (v[cy + 1] - v[cy]);
    E += w * powp(ux - uy);
  }
  void bnd_point(int cell, double t, double w) {
    E += w * powp(v[cell] + t * (v[cell + 1] - v[cell]));
  }
};

/// Splits segments (longest first, proportional to length) until the grid has
/// at least `target` cells. Existing breakpoints are always kept.
inline std::vector<double> refine_breakpoints(const std::vector<double>& xs, int target) {
  const int cur = static_cast<int>(xs.size()) - 1;
  if (cur >= target) return xs;
  double total = xs.back() - xs.front();
  std::vector<int> mult(cur, 1);
  int cells = cur;
  // proportional first pass
  for (int i = 0; i < cur; ++i) {
    const double h = xs[i + 1] - xs[i];
    const int m = std::max(1, static_cast<int>(std::floor(target * h / total)));
    cells += m - mult[i];
    mult[i] = m;
  }
  // top up by splitting the widest effective cells
  while (cells < target) {
    int best = 0;
    double best_w = 0.0;
    for (int i = 0; i < cur; ++i) {
      const double w = (xs[i + 1] - xs[i]) / mult[i];
      if (w > best_w) {
        best_w = w;
        best = i;
      }
    }
    ++mult[best];
    ++cells;
  }
  std::vector<double> out;
  out.reserve(cells + 1);
  for (int i = 0; i < cur; ++i) {
    const double a = xs[i], h = (xs[i + 1] - xs[i]) / mult[i];
    for (int m = 0; m < mult[i]; ++m) out.push_back(a + m * h);
  }
  out.push_back(xs.back());
  return out;
}

inline std::vector<char> zero_cells(std::span<const double> v) {
  std::vector<char> z(v.size() - 1, 0);
  for (size_t i = 0; i + 1 < v.size(); ++i) z[i] = (v[i] == 0.0 && v[i + 1] == 0.0) ? 1 : 0;
  return z;
}

}  // namespace detail

}  // namespace fraclab
