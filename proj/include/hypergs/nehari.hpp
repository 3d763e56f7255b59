#pragma once

// The energy functional, its fibering map, Nehari projection and
// classification, and constrained minimization (projected gradient descent
// with Newton polish), including the subcritical-approximation route to the
// critical exponent.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypergs/closed_forms.hpp"
#include "hypergs/grid.hpp"
#include "hypergs/solvers.hpp"

namespace hypergs {

struct NehariPoint {
  RadialFunction profile;
  double t_projection = 1.0;
  double phi_second_at_one = 0.0;
  double energy = 0.0;
  double norm_lambda_sq = 0.0;  // ||u||_lambda^2
  double lp_mass = 0.0;         // int |u|^{p+1}
  double lq_mass = 0.0;         // int |u|^{q+1}
};

namespace detail {
struct EnergyParts {
  double A = 0.0, B = 0.0, C = 0.0;  // ||u||_lambda^2, int|u|^{p+1}, int|u|^{q+1}
};

inline EnergyParts energy_parts(const RadialFunction& u, const ProblemParams& pr) {
  EnergyParts e;
  e.A = norm_lambda_sq(u, pr.lambda);
  e.B = integrate(u, pr.p + 1.0);
  e.C = integrate(u, pr.q + 1.0);
  return e;
}

inline void check_norm_regime(const ProblemParams& pr) {
  if (pr.q > 1.0 && pr.lambda >= lambda1(pr.N))
    throw std::invalid_argument(
        "energy: for q > 1 the quadratic part is a norm only for lambda < lambda1");
}
}  // namespace detail

inline double energy(const RadialFunction& u, const ProblemParams& pr) {
  detail::check_norm_regime(pr);
  auto e = detail::energy_parts(u, pr);
  return 0.5 * e.A - e.B / (pr.p + 1.0) + e.C / (pr.q + 1.0);
}

struct Fibering {
  double phi = 0.0, phi_prime = 0.0, phi_second = 0.0;
};

inline Fibering fibering(const RadialFunction& u, double t, const ProblemParams& pr) {
  if (!(t > 0.0)) throw std::invalid_argument("fibering: t must be > 0");
  detail::check_norm_regime(pr);
  auto e = detail::energy_parts(u, pr);
  const double p = pr.p, q = pr.q;
  Fibering f;
  f.phi = 0.5 * t * t * e.A - std::pow(t, p + 1.0) / (p + 1.0) * e.B +
          std::pow(t, q + 1.0) / (q + 1.0) * e.C;
  f.phi_prime = t * e.A - std::pow(t, p) * e.B + std::pow(t, q) * e.C;
  f.phi_second = e.A - p * std::pow(t, p - 1.0) * e.B + q * std::pow(t, q - 1.0) * e.C;
  return f;
}

// Exact gradient of the discrete energy with respect to the node values
// (Dirichlet far node held at zero). Dividing component k by the lumped
// measure gives the weighted-L2 gradient used as the descent direction.
inline std::vector<double> energy_gradient(const RadialFunction& u, const ProblemParams& pr) {
  detail::check_norm_regime(pr);
  const RadialGrid& g = *u.grid;
  const size_t M = g.last();
  std::vector<double> grad(g.size(), 0.0);
  for (size_t i = 0; i < M; ++i) {
    const double h = g.r[i + 1] - g.r[i];
    const double sig = g.sigma(0.5 * (g.r[i] + g.r[i + 1]));
    const double du = (u.values[i + 1] - u.values[i]) / h;
    grad[i] -= sig * du;      // d/du_i of (1/2) sum sig (du)^2 h
    grad[i + 1] += sig * du;  // d/du_{i+1}
  }
  for (size_t i = 0; i < M; ++i) {
    const double ui = u.values[i];
    const double a = std::abs(ui);
    double nl = -pr.lambda * ui - std::pow(a, pr.p - 1.0) * ui;
    if (a > 0.0) nl += std::pow(a, pr.q - 1.0) * ui;
    grad[i] += g.w[i] * nl;
  }
  grad[M] = 0.0;  // far boundary node is pinned
  return grad;
}

// Unique positive root of the fibering derivative; the projected profile
// t1 * u with its cached masses.
inline NehariPoint project_to_nehari(const RadialFunction& u, const ProblemParams& pr) {
  detail::check_norm_regime(pr);
  auto e = detail::energy_parts(u, pr);
  const double p = pr.p, q = pr.q;
  if (e.B <= 0.0)
    throw std::runtime_error("project_to_nehari: focusing mass vanishes (degenerate input)");
  auto psi = [&](double t) {
    // phi'(t)/t
    return e.A - std::pow(t, p - 1.0) * e.B + std::pow(t, q - 1.0) * e.C;
  };

  // root-count scan; the fibering analysis says exactly one positive root
  int sign_changes = 0;
  double prev = psi(1e-6);
  for (int k = 1; k <= 240; ++k) {
    const double t = std::pow(10.0, -6.0 + 12.0 * k / 240.0);
    const double cur = psi(t);
    if ((prev <= 0.0) != (cur <= 0.0)) ++sign_changes;
    prev = cur;
  }
  if (sign_changes != 1)
    throw std::runtime_error(
        "project_to_nehari: fibering derivative has " + std::to_string(sign_changes) +
        " sign changes on the scan; quadrature breakdown suspected");

  double lo = 1.0, hi = 1.0;
  if (psi(1.0) > 0.0) {
    hi = 2.0;
    while (psi(hi) > 0.0 && hi < 1e12) hi *= 2.0;
    lo = 0.5 * hi;
  } else {
    lo = 0.5;
    while (psi(lo) <= 0.0 && lo > 1e-12) lo *= 0.5;
    hi = 2.0 * lo;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (psi(mid) > 0.0 ? lo : hi) = mid;
    if (hi - lo < 1e-14 * hi) break;
  }
  const double t1 = 0.5 * (lo + hi);

  NehariPoint pt;
  pt.t_projection = t1;
  pt.profile = u;
  for (auto& v : pt.profile.values) v *= t1;
  pt.norm_lambda_sq = t1 * t1 * e.A;
  pt.lp_mass = std::pow(t1, p + 1.0) * e.B;
  pt.lq_mass = std::pow(t1, q + 1.0) * e.C;
  pt.phi_second_at_one = pt.norm_lambda_sq - p * pt.lp_mass + q * pt.lq_mass;
  pt.energy = 0.5 * pt.norm_lambda_sq - pt.lp_mass / (p + 1.0) + pt.lq_mass / (q + 1.0);
  return pt;
}

enum class NehariClass { Nminus, Nzero, Nplus };

// Sign of phi''(1) at a projected point. The variational argument shows the
// zero and plus branches are empty; hitting the dead band means the
// quadrature (not the theory) broke down.
inline NehariClass classify(const NehariPoint& pt) {
  const double scale =
      pt.norm_lambda_sq + std::abs(pt.phi_second_at_one) + pt.lp_mass + pt.lq_mass;
  if (std::abs(pt.phi_second_at_one) <= 1e-10 * scale)
    throw std::runtime_error(
        "classify: phi''(1) vanishes within tolerance; numerical breakdown");
  return pt.phi_second_at_one < 0.0 ? NehariClass::Nminus : NehariClass::Nplus;
}

enum class MinimizeMode { Subcritical, CriticalViaApproximation };

struct MinimizeOptions {
  int max_iter = 1200;
  double energy_tol = 1e-12;
  bool multi_start = true;
  bool newton_polish = true;
  int critical_stages = 8;
  std::optional<double> compactness_threshold;  // (1/N) S^{N/2} when supplied
};

struct MinimizeResult {
  NehariPoint point;
  double m_pq = 0.0;
  bool compactness_warning = false;
  int iterations = 0;
  std::string note;
};

namespace detail {

// single projected-gradient run from one starting profile
inline NehariPoint minimize_single(const ProblemParams& pr, RadialFunction u,
                                   const MinimizeOptions& opts, int& iters) {
  const RadialGrid& g = *u.grid;
  const size_t M = g.last();
  u.values[M] = 0.0;
  NehariPoint cur = project_to_nehari(u, pr);

  // lumped measure; the origin node gets its cell volume so the direction
  // stays finite there
  std::vector<double> lump = g.w;
  lump[0] = std::max(lump[0], sphere_area(g.N) * std::pow(0.5 * (g.r[1] - g.r[0]), g.N) /
                                  g.N);
  double step = 0.1;
  int tiny_progress = 0;
  for (int it = 0; it < opts.max_iter; ++it) {
    ++iters;
    std::vector<double> grad = energy_gradient(cur.profile, pr);
    double gnorm2 = 0.0;
    for (size_t i = 0; i < M; ++i) gnorm2 += grad[i] * grad[i] / lump[i];
    if (gnorm2 <= 0.0) break;

    bool accepted = false;
    double gained = 0.0;
    for (int ls = 0; ls < 30; ++ls) {
      RadialFunction trial = cur.profile;
      for (size_t i = 0; i < M; ++i) {
        trial.values[i] -= step * grad[i] / lump[i];
        if (pr.q < 1.0 && trial.values[i] < 0.0) trial.values[i] = 0.0;
      }
      NehariPoint proj;
      try {
        proj = project_to_nehari(trial, pr);
      } catch (const std::exception&) {
        step *= 0.5;
        continue;
      }
      if (proj.energy < cur.energy - 1e-4 * step * gnorm2) {
        gained = cur.energy - proj.energy;
        cur = std::move(proj);
        accepted = true;
        step = std::min(step * 1.5, 1e3);
        break;
      }
      step *= 0.5;
    }
    if (!accepted && std::abs(step) < 1e-14) break;
    tiny_progress =
        (accepted && gained > opts.energy_tol * (1.0 + std::abs(cur.energy))) ? 0
                                                                              : tiny_progress + 1;
    if (tiny_progress >= 3) break;
    if (!std::isfinite(cur.energy) || cur.energy < -1e12)
      throw std::runtime_error("minimize: energy diverged along the iterates");
  }
  return cur;
}

inline RadialFunction default_bump(std::shared_ptr<const RadialGrid> g, double width,
                                   double height) {
  return sample_function(std::move(g), [=](double r) {
    return height * std::exp(-r * r / (width * width));
  });
}

}  // namespace detail

// Constrained minimization of J over the Nehari set. Multi-start perturbs the
// initial profile deterministically and keeps the lowest minimizer; local
// minimality is all the descent certifies.
inline MinimizeResult minimize(const ProblemParams& pr, const RadialFunction& init,
                               MinimizeMode mode, const MinimizeOptions& opts = {}) {
  detail::check_norm_regime(pr);
  if (!(pr.q < pr.p))
    throw std::invalid_argument(
        "minimize: the variational route covers defocusing exponents q < p only");
  MinimizeResult res;

  auto run_at = [&](const ProblemParams& stage_pr, const RadialFunction& u0,
                    int& iters) -> NehariPoint {
    std::vector<RadialFunction> starts;
    starts.push_back(u0);
    if (opts.multi_start) {
      for (double c : {0.5, 2.0}) {
        RadialFunction v = u0;
        for (auto& x : v.values) x *= c;
        starts.push_back(std::move(v));
      }
      starts.push_back(detail::default_bump(u0.grid, 1.0, u0.max_abs() + 0.5));
      starts.push_back(detail::default_bump(u0.grid, 2.5, u0.max_abs() + 0.5));
    }
    std::optional<NehariPoint> best;
    for (auto& s : starts) {
      if (s.max_abs() <= 0.0) continue;
      try {
        NehariPoint pt = detail::minimize_single(stage_pr, s, opts, iters);
        if (!best || pt.energy < best->energy) best = std::move(pt);
      } catch (const std::exception&) {
        // a degenerate start is skipped, not fatal
      }
    }
    if (!best) throw std::runtime_error("minimize: every start degenerated");
    return *best;
  };

  NehariPoint pt;
  if (mode == MinimizeMode::Subcritical) {
    pt = run_at(pr, init, res.iterations);
  } else {
    // approach the critical exponent from below, warm-starting each stage
    RadialFunction warm = init;
    for (int n = 1; n <= opts.critical_stages; ++n) {
      const double pn = pr.p - std::pow(2.0, -n);
      if (pn <= 1.0) continue;
      ProblemParams stage(pr.N, pn, pr.q, pr.lambda);
      NehariPoint st = run_at(stage, warm, res.iterations);
      warm = st.profile;
    }
    pt = project_to_nehari(warm, pr);
    int extra = 0;
    pt = detail::minimize_single(pr, pt.profile, opts, extra);
    res.iterations += extra;
  }

  if (opts.newton_polish) {
    RadialFunction u = pt.profile;
    if (pr.q < 1.0)
      for (auto& v : u.values) v = std::max(v, 0.0);
    newton_refine(u, DoublePower::from(pr), 1e-10, 80, pr.q < 1.0);
    try {
      NehariPoint polished = project_to_nehari(u, pr);
      if (polished.energy <= pt.energy + 1e-9 * (1.0 + std::abs(pt.energy)))
        pt = std::move(polished);
    } catch (const std::exception&) {
      // keep the descent result when the polish degenerates
    }
  }

  res.point = std::move(pt);
  res.m_pq = res.point.energy;
  if (opts.compactness_threshold &&
      res.m_pq >= *opts.compactness_threshold - 1e-9 * std::abs(*opts.compactness_threshold)) {
    res.compactness_warning = true;
    res.note += "minimization level reached the compactness threshold; ";
  }
  return res;
}

inline nlohmann::json to_json(const NehariPoint& pt) {
  nlohmann::json j;
  j["t_projection"] = pt.t_projection;
  j["phi_second_at_one"] = pt.phi_second_at_one;
  j["energy"] = pt.energy;
  j["norms"] = {{"norm_lambda_sq", pt.norm_lambda_sq},
                {"lp_mass", pt.lp_mass},
                {"lq_mass", pt.lq_mass}};
  j["profile"] = to_json(pt.profile);
  return j;
}

}  // namespace hypergs
