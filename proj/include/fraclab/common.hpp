#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fraclab {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Quadrature could not reach the requested accuracy.
struct quadrature_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An iterative process (series, minimization) failed to converge.
struct convergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_arg(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules on [-1, 1], computed once per order by Newton iteration
// on the Legendre recurrence (accurate to ~1e-15).

struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

namespace detail {

inline GaussRule make_gauss_rule(int order) {
  GaussRule r;
  r.x.resize(order);
  r.w.resize(order);
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = order * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.x[i] = -x;
    r.x[order - 1 - i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    r.w[order - 1 - i] = r.w[i];
  }
  return r;
}

}  // namespace detail

inline const GaussRule& gauss_rule(int order) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, detail::make_gauss_rule(order)).first;
  return it->second;
}

// ---------------------------------------------------------------------------

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 48) {
  struct Impl {
    const std::remove_reference_t<F>& fn;
    int max_depth;
    double run(double a, double c, double b, double fa, double fc, double fb, double whole,
               double tol, int depth) const {
      const double lm = 0.5 * (a + c), rm = 0.5 * (c + b);
      const double flm = fn(lm), frm = fn(rm);
      const double left = (c - a) / 6.0 * (fa + 4.0 * flm + fc);
      const double right = (b - c) / 6.0 * (fc + 4.0 * frm + fb);
      const double err = left + right - whole;
      if (depth >= max_depth || std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
      return run(a, lm, c, fa, flm, fc, left, 0.5 * tol, depth + 1) +
             run(c, rm, b, fc, frm, fb, right, 0.5 * tol, depth + 1);
    }
  };
  const double c = 0.5 * (a + b);
  const double fa = f(a), fc = f(c), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
  return Impl{f, max_depth}.run(a, c, b, fa, fc, fb, whole, tol, 0);
}

// ---------------------------------------------------------------------------

/// Accumulates log(sum_i exp(t_i)) with a deterministic reduction order.
class LogSumExp {
 public:
  void add(double log_term) {
    if (log_term == -kInf) return;
    terms_.push_back(log_term);
  }
  double value() const {
    if (terms_.empty()) return -kInf;
    const double m = *std::max_element(terms_.begin(), terms_.end());
    if (m == -kInf) return -kInf;
    double s = 0.0;
    for (double t : terms_) s += std::exp(t - m);
    return m + std::log(s);
  }

 private:
  std::vector<double> terms_;
};

// ---------------------------------------------------------------------------
// Small fit helpers used by scans and acceptance checks.

struct OriginFit {
  double slope = 0.0;
  double r_squared = 0.0;  // uncentered R^2, appropriate for a through-origin fit
};

inline OriginFit fit_through_origin(std::span<const double> x, std::span<const double> y) {
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
  }
  OriginFit f;
  f.slope = sxy / sxx;
  double ss_res = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.slope * x[i];
    ss_res += r * r;
  }
  f.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
  return f;
}

/// Least-squares slope of y against x (with intercept).
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
  const size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < n; ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

// ---------------------------------------------------------------------------

inline int env_thread_cap() {
  if (const char* e = std::getenv("FRAC_LAB_THREADS")) {
    const int v = std::atoi(e);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(std::min(hc, 8u));
}

/// Applies fn to every index in [0, count) with at most `threads` concurrent
/// workers. Results are stored by index, so the output order never depends on
/// scheduling.
template <class Result, class Fn>
std::vector<Result> indexed_parallel_map(size_t count, Fn&& fn, int threads) {
  std::vector<Result> out(count);
  if (threads <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= count) return;
      out[i] = fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int nw = static_cast<int>(std::min<size_t>(threads, count));
  pool.reserve(nw);
  for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

/// Shortest deterministic text form that round-trips a double.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace fraclab
