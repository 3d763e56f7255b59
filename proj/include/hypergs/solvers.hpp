#pragma once

// Nonlinear solvers for the radial problem: the monotone sub/supersolution
// iteration, IVP shooting with event classification and bisection, Newton
// refinement of the discrete boundary-value problem, and the single-power
// companion profiles with their Poincare-Sobolev quotient.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypergs/closed_forms.hpp"
#include "hypergs/grid.hpp"
#include "hypergs/numerics.hpp"

namespace hypergs {

enum class SolveMethod { Monotone, Shooting, Newton };

struct SolveReport {
  RadialFunction solution;
  bool converged = false;
  int iterations = 0;
  double final_residual = std::numeric_limits<double>::infinity();
  SolveMethod method = SolveMethod::Shooting;
  double wall_time_seconds = 0.0;

  std::optional<double> decay_fit;       // fitted tail rate in geodesic radius
  std::optional<double> support_radius;  // finite support edge when q < 1
  double worst_monotonicity_violation = 0.0;
  double domain_drift = 0.0;  // sup-change under the 1.25 R_max re-solve
  std::string note;
};

inline const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::Monotone: return "monotone";
    case SolveMethod::Shooting: return "shooting";
    case SolveMethod::Newton: return "newton";
  }
  return "?";
}

namespace detail {
struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

struct TridiagonalOperator {
  std::vector<double> lower, diag, upper;

  // bands of L - lambda_shift + K with the Dirichlet row at M
  static TridiagonalOperator assemble(const RadialGrid& g, double K, double lambda_shift) {
    const size_t M = g.last();
    const int N = g.N;
    TridiagonalOperator T;
    T.lower.assign(M + 1, 0.0);
    T.diag.assign(M + 1, 0.0);
    T.upper.assign(M + 1, 0.0);
    {
      const double h0 = g.r[1] - g.r[0];
      T.diag[0] = 2.0 * N / (h0 * h0) + (K - lambda_shift);
      T.upper[0] = -2.0 * N / (h0 * h0);
    }
    for (size_t i = 1; i < M; ++i) {
      const double hm = g.r[i] - g.r[i - 1];
      const double hp = g.r[i + 1] - g.r[i];
      const double c = double(N - 1) * num::coth(g.r[i]);
      T.lower[i] = -2.0 / (hm * (hm + hp)) + c * hp / (hm * (hm + hp));
      T.diag[i] = 2.0 / (hm * hp) - c * (hp - hm) / (hm * hp) + (K - lambda_shift);
      T.upper[i] = -2.0 / (hp * (hm + hp)) - c * hm / (hp * (hm + hp));
    }
    T.diag[M] = 1.0;
    return T;
  }

  std::vector<double> solve(std::vector<double> rhs) const {
    return num::solve_tridiagonal(lower, diag, upper, std::move(rhs));
  }
};
}  // namespace detail

// Tridiagonal solve of (L - lambda_shift + K) u = rhs with u(R_max) = far_value.
inline RadialFunction solve_linear_shifted(double K, const RadialFunction& rhs,
                                           double lambda_shift = 0.0,
                                           double far_value = 0.0) {
  if (!(K > std::max(0.0, lambda_shift)))
    throw std::invalid_argument("solve_linear_shifted: need K > max(0, lambda_shift)");
  const RadialGrid& g = *rhs.grid;
  auto T = detail::TridiagonalOperator::assemble(g, K, lambda_shift);
  std::vector<double> b = rhs.values;
  b[g.last()] = far_value;
  return RadialFunction(rhs.grid, T.solve(std::move(b)));
}

// Default shift constant: exceeds the Lipschitz bound of f on [0, sup super],
// with the q < 1 slope taken from the regularized nonlinearity.
inline double default_shift_constant(const ProblemParams& pr, double super_max,
                                     double delta = 1e-8) {
  double K = 1.0 + std::abs(pr.lambda) + pr.p * std::pow(std::max(super_max, 1e-12), pr.p - 1.0);
  if (pr.q < 1.0)
    K += pr.q * std::pow(delta, pr.q - 1.0);
  else
    K += pr.q * std::pow(std::max(super_max, 1e-12), pr.q - 1.0);
  return K;
}

struct MonotoneOptions {
  double tol = 1e-9;
  int max_iter = 400000;
  double mono_tol = 1e-7;  // tolerated pointwise decrease after the first sweep
  double regularization_delta = 1e-8;
  std::optional<double> dirichlet_value;  // defaults to sub(R_max)
  bool polish = true;                     // Newton-polish the unregularized system (q<1)
};

inline void newton_refine(RadialFunction& u, const DoublePower& np, double tol,
                          int max_iter = 60, bool nonnegative = false);

// Monotone iteration u_{n+1} = (L+K)^{-1}( f(u_n) + K u_n ) starting from the
// subsolution. The first sweep may relax discretization kinks of min-type
// barriers; from the second sweep on a pointwise decrease beyond mono_tol
// aborts, since it signals an invalid pair or a too-small K.
inline SolveReport monotone_iterate(const RadialFunction& sub, const RadialFunction& super,
                                    const ProblemParams& pr, double K,
                                    MonotoneOptions opts = {}) {
  detail::Stopwatch clock;
  if (sub.grid != super.grid && sub.grid->r != super.grid->r)
    throw std::invalid_argument("monotone_iterate: sub/super must share a grid");
  const size_t n = sub.size();
  double super_max = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (sub.values[i] < -1e-14 || sub.values[i] > super.values[i] + 1e-12)
      throw std::invalid_argument("monotone_iterate: requires 0 <= sub <= super");
    super_max = std::max(super_max, super.values[i]);
  }
  const double delta = opts.regularization_delta;
  const bool reg = pr.q < 1.0;
  const double delta_q = reg ? std::pow(delta, pr.q) : 0.0;
  auto g_of = [&](double s) {
    double v = pr.lambda * s + std::pow(s, pr.p) + K * s;
    v -= reg ? (std::pow(s + delta, pr.q) - delta_q) : std::pow(s, pr.q);
    return v;
  };

  const RadialGrid& grid = *sub.grid;
  const size_t M = grid.last();
  auto T = detail::TridiagonalOperator::assemble(grid, K, 0.0);
  const double far = opts.dirichlet_value.value_or(sub.values[M]);

  SolveReport rep;
  rep.method = SolveMethod::Monotone;
  RadialFunction u = sub;
  std::vector<double> rhs(n);
  double worst_violation = 0.0;
  int dip_streak = 0;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    rhs.resize(n);
    for (size_t i = 0; i < n; ++i) rhs[i] = g_of(std::max(u.values[i], 0.0));
    rhs[M] = far;
    std::vector<double> next = T.solve(std::move(rhs));
    double diff = 0.0, dip = 0.0;
    for (size_t i = 0; i < n; ++i) {
      diff = std::max(diff, std::abs(next[i] - u.values[i]));
      dip = std::max(dip, u.values[i] - next[i]);
    }
    if (it >= 1) {
      worst_violation = std::max(worst_violation, dip);
      // transient kink relaxation decays and stays local while the bulk
      // rises; a persistent decrease that drags the sup norm down signals an
      // invalid pair or a too-small K
      dip_streak = (dip > opts.mono_tol) ? dip_streak + 1 : 0;
      double cur_max = 0.0;
      for (size_t i = 0; i < n; ++i) cur_max = std::max(cur_max, next[i]);
      if (dip_streak > 25 && cur_max < 0.8 * sub.max_abs())
        throw std::runtime_error(
            "monotone_iterate: iterates collapsed (last dip " + std::to_string(dip) +
            "); invalid barrier pair or too-small K");
      if (dip_streak > 4000)
        throw std::runtime_error(
            "monotone_iterate: iterates kept decreasing (last dip " +
            std::to_string(dip) + "); invalid barrier pair or too-small K");
    }
    if (diff < opts.tol) {
      // fixed point: keep the previous iterate (exact for constant data)
      ++it;
      break;
    }
    u.values = std::move(next);
  }
  rep.iterations = it;
  rep.worst_monotonicity_violation = worst_violation;

  if (reg && opts.polish) newton_refine(u, DoublePower::from(pr), opts.tol, 60, true);

  rep.solution = u;
  rep.final_residual = pde_residual(u, pr).sup;
  rep.converged = (it < opts.max_iter) && rep.final_residual < 10.0 * opts.tol;
  rep.solution.decay_tag = fit_decay_exponent(u);
  rep.decay_fit = rep.solution.decay_tag;
  rep.wall_time_seconds = clock.seconds();
  return rep;
}

// Newton iteration on the discrete system L u - lambda u = powers(u) with the
// Dirichlet far row. A Levenberg-style diagonal boost handles the soft modes
// that appear when lambda approaches the spectral bottom; optional clamping
// to u >= 0 for fractional q.
inline void newton_refine(RadialFunction& u, const DoublePower& np, double tol,
                          int max_iter, bool nonnegative) {
  const RadialGrid& g = *u.grid;
  const size_t M = g.last();
  auto T0 = detail::TridiagonalOperator::assemble(g, 1.0, 0.0);  // bands of L + 1
  auto residual_sup = [&](const RadialFunction& v) { return pde_residual_general(v, np).sup; };

  auto take_step = [&](const RadialFunction& v, double mu) {
    ResidualReport rr = pde_residual_general(v, np);
    std::vector<double> lower = T0.lower, diag = T0.diag, upper = T0.upper, rhs(g.size());
    for (size_t i = 0; i < M; ++i) {
      // replace the assembled +1 shift by the nonlinear diagonal, plus boost
      diag[i] += -1.0 - np.df(v.values[i]) + mu;
      rhs[i] = -rr.node_values[i];
    }
    diag[M] = 1.0 + mu;
    rhs[M] = -v.values[M];
    std::vector<double> step = num::solve_tridiagonal(lower, diag, upper, rhs);
    RadialFunction trial = v;
    for (size_t i = 0; i < g.size(); ++i) {
      trial.values[i] += step[i];
      if (nonnegative && trial.values[i] < 0.0) trial.values[i] = 0.0;
    }
    return trial;
  };

  double res = residual_sup(u);
  double mu = 0.0;
  for (int it = 0; it < max_iter && res > tol; ++it) {
    RadialFunction trial = take_step(u, mu);
    double tres = residual_sup(trial);
    if (tres < res) {
      u = std::move(trial);
      res = tres;
      mu *= 0.25;
      if (mu < 1e-14) mu = 0.0;
      continue;
    }
    if (mu == 0.0) {
      // watchdog: Newton is often non-monotone one step before the
      // quadratic phase; look one full step ahead before damping
      RadialFunction trial2 = take_step(trial, 0.0);
      const double tres2 = residual_sup(trial2);
      if (tres2 < res) {
        u = std::move(trial2);
        res = tres2;
        continue;
      }
    }
    mu = std::max(4.0 * mu, 1e-3);
    if (mu > 1e12) break;  // no progress possible
  }

  // fractional defocusing keeps a super-exponential tail past the support
  // edge whose cells Newton resolves poorly; relax them one by one with the
  // scalar cell equation (Gauss-Seidel, monotone in u_i for tiny values)
  if (nonnegative && res > tol) {
    const double tail_level = 1e-5 * u.max_abs();
    auto T1 = detail::TridiagonalOperator::assemble(g, 1.0, 0.0);
    for (int sweep = 0; sweep < 800; ++sweep) {
      double change = 0.0;
      for (size_t i = 1; i < M; ++i) {
        if (u.values[i] > tail_level) continue;
        const double off =
            T1.lower[i] * u.values[i - 1] + T1.upper[i] * u.values[i + 1];
        const double diag = T1.diag[i] - 1.0;  // pure operator diagonal
        auto cell = [&](double x) {
          const double ax = std::abs(x);
          double powers = std::pow(ax, np.p - 1.0) * x;
          if (np.with_q && ax > 0.0) powers -= std::pow(ax, np.q - 1.0) * x;
          return diag * x + off - np.lambda * x - powers;
        };
        double lo = 0.0, hi = std::max(4.0 * u.values[i], 1e-18);
        while (cell(hi) < 0.0 && hi < 1.0) hi *= 4.0;
        if (cell(hi) < 0.0) continue;
        for (int b = 0; b < 80; ++b) {
          const double mid = 0.5 * (lo + hi);
          (cell(mid) < 0.0 ? lo : hi) = mid;
        }
        const double nv = 0.5 * (lo + hi);
        change = std::max(change, std::abs(nv - u.values[i]));
        u.values[i] = nv;
      }
      if (change < 1e-18) break;
    }
    res = residual_sup(u);
  }
}

// Principal mode of the linearization L - lambda - f'(u) around a profile,
// by inverse power iteration on the shifted tridiagonal system. Returns the
// eigenvalue and the positive normalized mode (sup = 1). u - delta * mode is
// a genuine smooth subsolution for small delta when the eigenvalue is
// negative, which seeds monotone runs in regimes without usable closed-form
// barriers.
struct GroundMode {
  double eigenvalue = 0.0;
  RadialFunction mode;
};

inline GroundMode linearization_ground_mode(const RadialFunction& u, const DoublePower& np,
                                            int iters = 300) {
  const RadialGrid& g = *u.grid;
  const size_t M = g.last();
  double fmax = 0.0;
  for (double v : u.values) fmax = std::max(fmax, np.df(v));
  const double shift = 1.0 + std::max(0.0, fmax);  // J + shift is coercive
  auto T = detail::TridiagonalOperator::assemble(g, shift, 0.0);
  std::vector<double> lower = T.lower, diag = T.diag, upper = T.upper;
  for (size_t i = 0; i < M; ++i) diag[i] += -np.df(u.values[i]);
  diag[M] = 1.0;

  std::vector<double> x(g.size(), 1.0);
  x[M] = 0.0;
  double mu = 0.0;
  for (int it = 0; it < iters; ++it) {
    std::vector<double> y = num::solve_tridiagonal(lower, diag, upper, x);
    y[M] = 0.0;
    double nrm = 0.0;
    for (double v : y) nrm = std::max(nrm, std::abs(v));
    for (auto& v : y) v /= nrm;
    mu = nrm;
    x = std::move(y);
  }
  GroundMode gm;
  gm.eigenvalue = 1.0 / mu - shift;
  if (x[0] < 0.0)
    for (auto& v : x) v = -v;
  gm.mode = RadialFunction(u.grid, std::move(x));
  return gm;
}

// ------------------------------------------------------------------ shooting

enum class ShootOutcome { CrossesZero, Blows, Decays };

inline const char* to_string(ShootOutcome o) {
  switch (o) {
    case ShootOutcome::CrossesZero: return "crosses_zero";
    case ShootOutcome::Blows: return "blows";
    case ShootOutcome::Decays: return "decays";
  }
  return "?";
}

struct ShootResult {
  ShootOutcome outcome = ShootOutcome::Blows;
  double event_r = 0.0;
  double a = 0.0;
  std::vector<double> r, u, du;  // accepted-step trajectory
};

struct ShootingOptions {
  double R_max = 0.0;  // 0 -> automatic from the decay rate
  int M = 0;           // 0 -> automatic from R_max
  double tol = 1e-9;
  double rk_tol = 1e-10;
  double a_min = 5e-3;
  double a_max = 2000.0;
  int scan_points = 40;
  bool check_domain = true;
  double lambda1_guard = 0.05;
  int max_steps = 4000000;
  Spacing spacing = Spacing::Uniform;
};

inline double auto_r_max(int N, double lambda, double guard = 0.05) {
  const double lam_eff = std::min(lambda, lambda1(N) - guard);
  const double c = decay_exponent(N, lam_eff);
  return std::clamp(23.0 / c, 15.0, 42.0);
}

// Integrates u'' + (N-1) coth(r) u' + f(u) = 0 from u(0)=a, u'(0)=0 and
// classifies the first event: a sign change (CrossesZero), |u| > 10 a
// (Blows), or decay below the regime floor (Decays). An orbit that reaches
// r_stop without decaying is grouped with Blows; it failed to decay and sits
// on the same side of the shooting dichotomy.
inline ShootResult shoot_ivp(int N, const DoublePower& np, double a, double r_stop,
                             const ShootingOptions& opts = {}) {
  if (!(a > 0.0)) throw std::invalid_argument("shoot_ivp: a must be > 0");
  ShootResult out;
  out.a = a;

  const bool compact_regime = np.with_q && np.q < 1.0;
  const double floor_u = compact_regime ? 1e-9 * std::max(1.0, a) : 0.0;
  double decay_floor = 0.0, c_fast = 0.0, rate_tol = 0.0;
  double c_slow_rate = 0.0;
  if (!compact_regime) {
    const double lam_eff = std::min(np.lambda, lambda1(N) - opts.lambda1_guard);
    c_fast = decay_exponent(N, lam_eff);
    const double c_slow = double(N - 1) - c_fast;
    c_slow_rate = c_slow;
    decay_floor = a * std::exp(-0.5 * c_fast * r_stop);
    rate_tol = std::max(0.35 * (c_fast - c_slow), 0.05 * c_fast);
  }

  auto rhs = [&](double r, double u, double v, double& du, double& dv) {
    du = v;
    dv = -double(N - 1) * num::coth(r) * v - np.f(u);
  };

  // Dormand-Prince 5(4)
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double fa = np.f(a);
  // series start; the radius shrinks with the core curvature so tall
  // concentrated profiles stay inside the expansion's validity range
  double r0 = std::clamp(std::sqrt(2.0 * N * 1e-9 * a / std::max(std::abs(fa), 1e-30)),
                         1e-8, 1e-4);
  double u = a - fa * r0 * r0 / (2.0 * N);
  double v = -fa * r0 / N;
  double h = r0;
  out.r.push_back(0.0);
  out.u.push_back(a);
  out.du.push_back(0.0);
  out.r.push_back(r0);
  out.u.push_back(u);
  out.du.push_back(v);

  double k1u, k1v;
  rhs(r0, u, v, k1u, k1v);
  const double atol = 1e-13 * std::max(1.0, a);

  auto hermite_zero = [&](double ra, double ua, double va, double rb, double ub,
                          double vb) {
    // cubic Hermite root location on [ra, rb]
    double lo = 0.0, hi = 1.0;
    const double hseg = rb - ra;
    auto val = [&](double t) {
      const double t2 = t * t, t3 = t2 * t;
      return (2 * t3 - 3 * t2 + 1) * ua + (t3 - 2 * t2 + t) * hseg * va +
             (-2 * t3 + 3 * t2) * ub + (t3 - t2) * hseg * vb;
    };
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      if ((val(lo) <= 0) == (val(mid) <= 0))
        lo = mid;
      else
        hi = mid;
    }
    return ra + 0.5 * (lo + hi) * hseg;
  };

  for (int step = 0; step < opts.max_steps; ++step) {
    if (r0 >= r_stop) break;
    h = std::min(h, r_stop - r0);
    double k2u, k2v, k3u, k3v, k4u, k4v, k5u, k5v, k6u, k6v, k7u, k7v;
    rhs(r0 + c2 * h, u + h * a21 * k1u, v + h * a21 * k1v, k2u, k2v);
    rhs(r0 + c3 * h, u + h * (a31 * k1u + a32 * k2u), v + h * (a31 * k1v + a32 * k2v), k3u,
        k3v);
    rhs(r0 + c4 * h, u + h * (a41 * k1u + a42 * k2u + a43 * k3u),
        v + h * (a41 * k1v + a42 * k2v + a43 * k3v), k4u, k4v);
    rhs(r0 + c5 * h, u + h * (a51 * k1u + a52 * k2u + a53 * k3u + a54 * k4u),
        v + h * (a51 * k1v + a52 * k2v + a53 * k3v + a54 * k4v), k5u, k5v);
    rhs(r0 + h, u + h * (a61 * k1u + a62 * k2u + a63 * k3u + a64 * k4u + a65 * k5u),
        v + h * (a61 * k1v + a62 * k2v + a63 * k3v + a64 * k4v + a65 * k5v), k6u, k6v);
    const double unew = u + h * (b1 * k1u + b3 * k3u + b4 * k4u + b5 * k5u + b6 * k6u);
    const double vnew = v + h * (b1 * k1v + b3 * k3v + b4 * k4v + b5 * k5v + b6 * k6v);
    rhs(r0 + h, unew, vnew, k7u, k7v);
    const double erru =
        h * (e1 * k1u + e3 * k3u + e4 * k4u + e5 * k5u + e6 * k6u + e7 * k7u);
    const double errv =
        h * (e1 * k1v + e3 * k3v + e4 * k4v + e5 * k5v + e6 * k6v + e7 * k7v);
    const double sc_u = atol + opts.rk_tol * std::max(std::abs(u), std::abs(unew));
    const double sc_v = atol + opts.rk_tol * std::max(std::abs(v), std::abs(vnew));
    const double err = std::sqrt(0.5 * ((erru / sc_u) * (erru / sc_u) +
                                        (errv / sc_v) * (errv / sc_v)));
    if (err <= 1.0) {
      const double rold = r0, uold = u, vold = v;
      r0 += h;
      u = unew;
      v = vnew;
      k1u = k7u;
      k1v = k7v;
      out.r.push_back(r0);
      out.u.push_back(u);
      out.du.push_back(v);

      if ((uold > 0.0 && u <= 0.0) || (uold < 0.0 && u >= 0.0)) {
        out.outcome = ShootOutcome::CrossesZero;
        out.event_r = hermite_zero(rold, uold, vold, r0, u, v);
        return out;
      }
      if (std::abs(u) > 10.0 * a) {
        out.outcome = ShootOutcome::Blows;
        out.event_r = r0;
        return out;
      }
      if (compact_regime && u < floor_u && std::abs(v) < 1e-5 * std::max(1.0, a)) {
        out.outcome = ShootOutcome::Decays;
        out.event_r = r0;
        return out;
      }
      // a positive orbit through the floor at the fast rate certifies decay;
      // slow tails fail the rate test, and the extrapolated non-fast
      // remainder must stay under the floor at r_stop so orbits that merely
      // pass near the fast manifold cannot certify
      if (!compact_regime && u > 0.0 && r0 > 0.4 * r_stop && u < decay_floor) {
        const double a_loc = (c_fast * u + v) / std::max(c_fast - c_slow_rate, 1e-6);
        const double slow_proj = std::abs(a_loc) * std::exp(-c_slow_rate * (r_stop - r0));
        if (std::abs(v / u + c_fast) < rate_tol && slow_proj < decay_floor) {
          out.outcome = ShootOutcome::Decays;
          out.event_r = r0;
          return out;
        }
      }
    }
    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    fac = std::clamp(fac, 0.2, 5.0);
    h *= fac;
    if (h < 1e-14)
      throw std::runtime_error("shoot_ivp: step-size underflow at r = " + std::to_string(r0));
  }

  if (!compact_regime && u > 0.0 && u < decay_floor) {
    // arrival under the floor certifies only when the tail is genuinely on
    // the fast manifold; a slow-dominated arrival is not a decaying solution
    const double a_loc = (c_fast * u + v) / std::max(c_fast - c_slow_rate, 1e-6);
    if (std::abs(v / u + c_fast) < rate_tol && std::abs(a_loc) < decay_floor) {
      out.outcome = ShootOutcome::Decays;
      out.event_r = r_stop;
      return out;
    }
  }
  {
    out.outcome = ShootOutcome::Blows;  // bounded non-decaying orbits included
    out.event_r = r_stop;
  }
  return out;
}

inline ShootResult shoot(double a, const ProblemParams& pr, double r_stop,
                         const ShootingOptions& opts = {}) {
  return shoot_ivp(pr.N, DoublePower::from(pr), a, r_stop, opts);
}

// Samples an accepted-step trajectory onto a grid with cubic Hermite
// interpolation; radii past the stored trajectory get zero.
inline RadialFunction trajectory_to_grid(const ShootResult& t,
                                         std::shared_ptr<const RadialGrid> g) {
  std::vector<double> vals(g->size(), 0.0);
  size_t k = 0;
  for (size_t i = 0; i < g->size(); ++i) {
    const double rr = g->r[i];
    if (rr > t.r.back()) break;
    while (k + 1 < t.r.size() && t.r[k + 1] < rr) ++k;
    if (k + 1 >= t.r.size()) {
      vals[i] = t.u.back();
      continue;
    }
    const double ra = t.r[k], rb = t.r[k + 1];
    const double hseg = rb - ra;
    if (hseg <= 0) {
      vals[i] = t.u[k];
      continue;
    }
    const double x = (rr - ra) / hseg;
    const double x2 = x * x, x3 = x2 * x;
    vals[i] = (2 * x3 - 3 * x2 + 1) * t.u[k] + (x3 - 2 * x2 + x) * hseg * t.du[k] +
              (-2 * x3 + 3 * x2) * t.u[k + 1] + (x3 - x2) * hseg * t.du[k + 1];
  }
  return RadialFunction(std::move(g), std::move(vals));
}

// Integrates the IVP landing exactly on the grid nodes, so the sampled
// profile carries no interpolation error (residual is pure truncation).
// Clamps at zero after a crossing; used to seed Newton.
inline RadialFunction integrate_onto_grid(int N, const DoublePower& np, double a,
                                          std::shared_ptr<const RadialGrid> g,
                                          double rk_tol = 1e-12) {
  std::vector<double> vals(g->size(), 0.0);
  vals[0] = a;
  const double fa = np.f(a);
  double r = std::clamp(std::sqrt(2.0 * N * 1e-10 * a / std::max(std::abs(fa), 1e-30)),
                        1e-9, 1e-6);
  double u = a - fa * r * r / (2.0 * N);
  double v = -fa * r / N;
  bool crossed = false;
  auto rhs = [&](double rr, double uu, double vv, double& du, double& dv) {
    du = vv;
    dv = -double(N - 1) * num::coth(rr) * vv - np.f(uu);
  };
  const double atol = 1e-14 * std::max(1.0, a);
  double h = 1e-5;
  for (size_t i = 1; i < g->size(); ++i) {
    const double target = g->r[i];
    while (r < target && !crossed) {
      h = std::min(h, target - r);
      double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v, k5u, k5v, k6u, k6v;
      rhs(r, u, v, k1u, k1v);
      rhs(r + h / 5, u + h / 5 * k1u, v + h / 5 * k1v, k2u, k2v);
      rhs(r + 3 * h / 10, u + h * (3 * k1u + 9 * k2u) / 40, v + h * (3 * k1v + 9 * k2v) / 40,
          k3u, k3v);
      rhs(r + 4 * h / 5, u + h * (44 * k1u / 45 - 56 * k2u / 15 + 32 * k3u / 9),
          v + h * (44 * k1v / 45 - 56 * k2v / 15 + 32 * k3v / 9), k4u, k4v);
      rhs(r + 8 * h / 9,
          u + h * (19372 * k1u / 6561 - 25360 * k2u / 2187 + 64448 * k3u / 6561 -
                   212 * k4u / 729),
          v + h * (19372 * k1v / 6561 - 25360 * k2v / 2187 + 64448 * k3v / 6561 -
                   212 * k4v / 729),
          k5u, k5v);
      rhs(r + h,
          u + h * (9017 * k1u / 3168 - 355 * k2u / 33 + 46732 * k3u / 5247 +
                   49 * k4u / 176 - 5103 * k5u / 18656),
          v + h * (9017 * k1v / 3168 - 355 * k2v / 33 + 46732 * k3v / 5247 +
                   49 * k4v / 176 - 5103 * k5v / 18656),
          k6u, k6v);
      const double unew =
          u + h * (35 * k1u / 384 + 500 * k3u / 1113 + 125 * k4u / 192 -
                   2187 * k5u / 6784 + 11 * k6u / 84);
      const double vnew =
          v + h * (35 * k1v / 384 + 500 * k3v / 1113 + 125 * k4v / 192 -
                   2187 * k5v / 6784 + 11 * k6v / 84);
      double k7u, k7v;
      rhs(r + h, unew, vnew, k7u, k7v);
      const double erru = h * (71 * k1u / 57600 - 71 * k3u / 16695 + 71 * k4u / 1920 -
                               17253 * k5u / 339200 + 22 * k6u / 525 - k7u / 40);
      const double errv = h * (71 * k1v / 57600 - 71 * k3v / 16695 + 71 * k4v / 1920 -
                               17253 * k5v / 339200 + 22 * k6v / 525 - k7v / 40);
      const double sc_u = atol + rk_tol * std::max(std::abs(u), std::abs(unew));
      const double sc_v = atol + rk_tol * std::max(std::abs(v), std::abs(vnew));
      const double err = std::sqrt(0.5 * ((erru / sc_u) * (erru / sc_u) +
                                          (errv / sc_v) * (errv / sc_v)));
      if (err <= 1.0) {
        r += h;
        u = unew;
        v = vnew;
        if (u <= 0.0) crossed = true;
      }
      double fac = 0.9 * std::pow(std::max(err, 1e-12), -0.2);
      h *= std::clamp(fac, 0.2, 5.0);
      if (h < 1e-15) throw std::runtime_error("integrate_onto_grid: step underflow");
    }
    vals[i] = crossed ? 0.0 : u;
  }
  return RadialFunction(std::move(g), std::move(vals));
}

namespace detail {

// Scan-and-bisect driver shared by the double-power and single-power solvers.
inline SolveReport shoot_to_ground_state(int N, const DoublePower& np,
                                         const ShootingOptions& opts_in) {
  Stopwatch clock;
  ShootingOptions opts = opts_in;
  if (opts.R_max <= 0.0) opts.R_max = auto_r_max(N, np.lambda, opts.lambda1_guard);
  if (opts.M <= 0) opts.M = std::clamp(int(opts.R_max * 800.0), 4000, 32000);

  SolveReport rep;
  rep.method = SolveMethod::Shooting;

  auto classify = [&](double a) { return shoot_ivp(N, np, a, opts.R_max, opts); };

  // coarse scan, plus creep heights just under the largest zero of f when the
  // defocusing power caps the admissible maxima (the descending band there can
  // be extremely narrow)
  std::vector<double> heights;
  const double la = std::log(opts.a_min), lb = std::log(opts.a_max);
  for (int i = 0; i < opts.scan_points; ++i)
    heights.push_back(std::exp(la + (lb - la) * i / double(opts.scan_points - 1)));
  if (np.with_q && np.q > np.p) {
    auto gpos = [&](double s) {
      return np.lambda + std::pow(s, np.p - 1.0) - std::pow(s, np.q - 1.0);
    };
    const double tpk = lambda_pq(np.p, np.q).t_pq;
    if (gpos(tpk) > 0.0) {
      double lo = tpk, hi = tpk;
      while (gpos(hi) > 0.0 && hi < 1e6) hi *= 2.0;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (lo + hi);
        (gpos(m) > 0.0 ? lo : hi) = m;
      }
      const double s2 = 0.5 * (lo + hi);
      for (int k = 2; k <= 11; ++k) heights.push_back(s2 * (1.0 - std::pow(10.0, -k)));
    }
  }
  std::sort(heights.begin(), heights.end());
  std::vector<ShootOutcome> outcomes(heights.size());
  for (size_t i = 0; i < heights.size(); ++i) outcomes[i] = classify(heights[i]).outcome;

  // bisect every crossing/non-crossing sign change until a Decays orbit shows
  ShootResult best;
  bool found = false;
  for (size_t i = 0; i + 1 < heights.size() && !found; ++i) {
    const bool ca = outcomes[i] == ShootOutcome::CrossesZero;
    const bool cb = outcomes[i + 1] == ShootOutcome::CrossesZero;
    if (ca == cb) continue;
    double lo = heights[i], hi = heights[i + 1];
    bool lo_crosses = ca;
    ShootResult candidate;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      ShootResult sr = classify(mid);
      if (sr.outcome == ShootOutcome::Decays) {
        candidate = std::move(sr);
        found = true;
        break;
      }
      if ((sr.outcome == ShootOutcome::CrossesZero) == lo_crosses)
        lo = mid;
      else
        hi = mid;
      if (hi - lo < 1e-14 * hi) {
        // final check at the midpoint
        ShootResult fin = classify(0.5 * (lo + hi));
        if (fin.outcome == ShootOutcome::Decays) {
          candidate = std::move(fin);
          found = true;
        }
        break;
      }
    }
    if (found) best = std::move(candidate);
  }

  if (!found) {
    rep.converged = false;
    rep.note = "no decaying orbit found in the scan window (evidence, not proof)";
    rep.wall_time_seconds = clock.seconds();
    return rep;
  }

  auto polish_on = [&](double R, int M) {
    auto g = std::make_shared<RadialGrid>(build_grid(N, R, M, opts.spacing));
    RadialFunction u = integrate_onto_grid(N, np, best.a, g, 0.1 * opts.rk_tol);
    const bool nonneg = np.with_q && np.q < 1.0;
    if (nonneg)
      for (auto& v : u.values) v = std::max(v, 0.0);
    newton_refine(u, np, opts.tol * 0.1, 120, nonneg);
    return u;
  };

  RadialFunction u = polish_on(opts.R_max, opts.M);
  rep.final_residual = pde_residual_general(u, np).sup;
  rep.iterations = int(best.r.size());
  double nl_scale = 1.0;
  for (double v : u.values) nl_scale = std::max(nl_scale, std::abs(np.f(v)));
  rep.converged = rep.final_residual < 10.0 * opts.tol * nl_scale && u.max_abs() > 0.0;

  if (opts.check_domain && rep.converged) {
    const double h = opts.R_max / opts.M;
    const int M2 = int(std::ceil(1.25 * opts.M));
    RadialFunction u2 = polish_on(h * M2, M2);
    double drift = 0.0;
    for (size_t i = 0; i < u.size(); ++i)
      drift = std::max(drift, std::abs(u.values[i] - u2.values[i]));
    rep.domain_drift = drift;
    if (drift > 1e-6 * std::max(1.0, u.max_abs()))
      rep.note += "domain drift above 1e-6; ";
  }

  if (np.with_q && np.q < 1.0) {
    // support probe: last node above the support floor
    double support = 0.0;
    bool infinite = u.values[u.grid->last()] > 1e-9 || u.values[u.size() - 2] > 1e-9;
    for (size_t i = 0; i < u.size(); ++i)
      if (u.values[i] > 1e-9) support = u.grid->r[i];
    if (!infinite) rep.support_radius = support;
  } else {
    u.decay_tag = fit_decay_exponent(u);
    rep.decay_fit = u.decay_tag;
  }
  rep.solution = std::move(u);
  rep.wall_time_seconds = clock.seconds();
  return rep;
}

}  // namespace detail

// Positive decaying solution of the double-power equation by shooting plus
// Newton refinement. A NotFound (non-converged) report is evidence of
// nonexistence on the scanned window, not a proof.
inline SolveReport ground_state_by_shooting(const ProblemParams& pr,
                                            const ShootingOptions& opts = {}) {
  return detail::shoot_to_ground_state(pr.N, DoublePower::from(pr), opts);
}

// The single-power companion profile U_{lambda,p}: positive, radially
// decreasing, with tail rate c(N,lambda). Parameters must satisfy the
// subcritical window (any lambda < lambda1) or the critical window
// (N >= 4 and N(N-2)/4 < lambda < lambda1).
inline SolveReport mancini_sandeep_profile(int N, double p, double lambda,
                                           const ShootingOptions& opts = {}) {
  if (N < 3) throw std::invalid_argument("mancini_sandeep_profile: N >= 3 required");
  const double pc = critical_equation_exponent(N);
  const Criticality crit = classify_criticality(N, p);
  if (crit == Criticality::Supercritical)
    throw std::invalid_argument("mancini_sandeep_profile: p must be <= (N+2)/(N-2)");
  if (!(lambda < lambda1(N)))
    throw std::invalid_argument("mancini_sandeep_profile: requires lambda < lambda1");
  if (crit == Criticality::Critical) {
    if (N < 4)
      throw std::invalid_argument(
          "mancini_sandeep_profile: critical exponent requires N >= 4");
    if (!(lambda > pohozaev_threshold(N)))
      throw std::invalid_argument(
          "mancini_sandeep_profile: critical exponent requires lambda > N(N-2)/4");
  }
  if (!(p > 1.0) || p > pc)
    throw std::invalid_argument("mancini_sandeep_profile: requires 1 < p <= (N+2)/(N-2)");
  ShootingOptions o = opts;
  if (crit == Criticality::Critical) {
    // bubble-like cores can be tall and thin near the lower spectral bound
    o.a_max = std::max(o.a_max, 2e4);
    if (o.M <= 0) {  // caller-specified grids are honored as-is
      o.spacing = Spacing::Graded;
      if (o.R_max <= 0.0) o.R_max = auto_r_max(N, lambda);
      o.M = std::clamp(int(o.R_max * 1600), 8000, 32000);
    }
  }
  SolveReport rep = detail::shoot_to_ground_state(N, DoublePower::single(lambda, p), o);
  if (rep.converged) {
    for (size_t i = 0; i + 1 < rep.solution.size(); ++i)
      if (rep.solution.values[i + 1] > rep.solution.values[i] + 1e-12) {
        rep.note += "profile not radially decreasing; ";
        rep.converged = false;
        break;
      }
  }
  return rep;
}

// S_{lambda,p} estimated on the computed extremal profile.
inline double poincare_sobolev_constant(int N, double p, double lambda,
                                        const ShootingOptions& opts = {}) {
  SolveReport rep = mancini_sandeep_profile(N, p, lambda, opts);
  if (!rep.converged)
    throw std::runtime_error("poincare_sobolev_constant: profile solve failed");
  const double num = norm_lambda_sq(rep.solution, lambda);
  const double den = std::pow(integrate(rep.solution, p + 1.0), 2.0 / (p + 1.0));
  return num / den;
}

}  // namespace hypergs
