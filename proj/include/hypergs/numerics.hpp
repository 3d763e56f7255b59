#pragma once

// Small numeric kernels shared across the library: adaptive quadrature,
// Gauss-Legendre rules, linear least squares, and a tridiagonal solver.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypergs::num {

// ---------------------------------------------------------------- quadrature

namespace detail {
template <class F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm,
                            double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

// Adaptive Simpson on [a,b]; tol is an absolute tolerance. The interval is
// first split into `panels` uniform pieces so localized mass cannot slip
// through the coarse initial probes.
template <class F>
double integrate_adaptive(const F& f, double a, double b, double tol = 1e-10,
                          int max_depth = 48, int panels = 16) {
  if (a == b) return 0.0;
  double total = 0.0;
  const double ptol = tol / panels;
  for (int k = 0; k < panels; ++k) {
    const double x0 = a + (b - a) * k / panels;
    const double x1 = a + (b - a) * (k + 1) / panels;
    const double fa = f(x0), fb = f(x1), fm = f(0.5 * (x0 + x1));
    const double whole = (x1 - x0) / 6.0 * (fa + 4.0 * fm + fb);
    total += detail::adaptive_simpson_rec(f, x0, x1, fa, fm, fb, whole, ptol, max_depth);
  }
  return total;
}

// Integral over [a, infinity): dyadic blocks until a block contributes less
// than tol_rel of the accumulated value.
template <class F>
double integrate_to_infinity(const F& f, double a, double block0, double tol = 1e-11,
                             double tol_rel = 1e-12, int max_blocks = 80) {
  double total = 0.0, lo = a, len = block0;
  for (int k = 0; k < max_blocks; ++k) {
    const double part = integrate_adaptive(f, lo, lo + len, tol);
    total += part;
    if (std::abs(part) < tol_rel * (std::abs(total) + 1e-300) && k > 2) return total;
    lo += len;
    len *= 2.0;
  }
  return total;
}

// Nodes/weights of an n-point Gauss-Legendre rule on [-1,1] (Newton on
// Legendre polynomials; n modest).
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

// ------------------------------------------------------------- least squares

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double ss_residual = 0.0;
  size_t n = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need >= 2 matched samples");
  const size_t n = x.size();
  double sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.n = n;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    f.ss_residual += r * r;
  }
  return f;
}

// ---------------------------------------------------------------- tridiagonal

// Solves the tridiagonal system with diagonals (lower a, main b, upper c).
// Thomas algorithm; throws on a vanishing pivot with a crude condition hint.
inline std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b,
                                             std::vector<double> c, std::vector<double> d) {
  const size_t n = b.size();
  if (a.size() != n || c.size() != n || d.size() != n)
    throw std::invalid_argument("solve_tridiagonal: band size mismatch");
  double scale = 0.0;
  for (size_t i = 0; i < n; ++i)
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i]), std::abs(c[i])});
  double min_pivot = std::numeric_limits<double>::infinity();
  for (size_t i = 1; i < n; ++i) {
    if (std::abs(b[i - 1]) < 1e-300)
      throw std::runtime_error("solve_tridiagonal: zero pivot at row " + std::to_string(i - 1));
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    d[i] -= m * d[i - 1];
    min_pivot = std::min(min_pivot, std::abs(b[i]));
  }
  if (min_pivot < 1e-14 * scale)
    throw std::runtime_error(
        "solve_tridiagonal: ill-conditioned system, pivot ratio ~ " +
        std::to_string(min_pivot / (scale + 1e-300)));
  std::vector<double> x(n);
  x[n - 1] = d[n - 1] / b[n - 1];
  for (size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
  return x;
}

// coth with the small-argument series to avoid cancellation near 0.
inline double coth(double r) {
  if (r < 1e-6) {
    if (r <= 0.0) throw std::invalid_argument("coth: r must be > 0");
    return 1.0 / r + r / 3.0;
  }
  return 1.0 / std::tanh(r);
}

// C^2 quintic smoothstep: 0 at x<=0, 1 at x>=1.
inline double smoothstep5(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

inline double smoothstep5_deriv(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return 30.0 * x * x * (1.0 - x) * (1.0 - x);
}

}  // namespace hypergs::num
