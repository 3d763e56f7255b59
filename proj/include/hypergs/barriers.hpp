#pragma once

// Explicit sub/supersolution pairs, built strategy by strategy from the
// single-power companion profiles, with their parameter-selection
// inequalities checked and the weak residual signs verified on the grid.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypergs/closed_forms.hpp"
#include "hypergs/grid.hpp"
#include "hypergs/solvers.hpp"

namespace hypergs {

enum class BarrierStrategy {
  A1,
  CritPos,
  A2_SmallNeg,
  Thm10_Endpoint,
  A3_Interior,
  A4_CritNeg,
  CritEndpoint,
  A5_Supercrit,
  A6_SupercritNeg,
  C1_QltP_Crit,
  CompactSupport,
};

inline const char* to_string(BarrierStrategy s) {
  switch (s) {
    case BarrierStrategy::A1: return "A1";
    case BarrierStrategy::CritPos: return "CritPos";
    case BarrierStrategy::A2_SmallNeg: return "A2_SmallNeg";
    case BarrierStrategy::Thm10_Endpoint: return "Thm10_Endpoint";
    case BarrierStrategy::A3_Interior: return "A3_Interior";
    case BarrierStrategy::A4_CritNeg: return "A4_CritNeg";
    case BarrierStrategy::CritEndpoint: return "CritEndpoint";
    case BarrierStrategy::A5_Supercrit: return "A5_Supercrit";
    case BarrierStrategy::A6_SupercritNeg: return "A6_SupercritNeg";
    case BarrierStrategy::C1_QltP_Crit: return "C1_QltP_Crit";
    case BarrierStrategy::CompactSupport: return "CompactSupport";
  }
  return "?";
}

struct BarrierPair {
  RadialFunction sub, super;
  BarrierStrategy strategy = BarrierStrategy::A1;
  std::map<std::string, double> chosen_parameters;
  std::vector<double> kink_radii;  // min-construction switch radii
  bool sub_ok = false, super_ok = false, ordering_ok = false;
};

enum class BarrierSide { Sub, Super };

struct BarrierVerdict {
  bool ok = false;
  double worst_violation = 0.0;  // signed: positive means the inequality failed
  size_t worst_node = 0;
};

// Sign check of the discrete weak residual: Sub requires
// L u - lambda u - (u^p - u^q) <= tol, Super the reverse. Nodes within one
// cell of a declared kink are exempted (the min construction is verified
// branch-wise; the switching sphere has measure zero).
inline BarrierVerdict verify_barrier(const RadialFunction& candidate,
                                     const ProblemParams& pr, BarrierSide side,
                                     const std::vector<double>& kink_radii = {},
                                     double tol = 1e-7) {
  for (double v : candidate.values)
    if (v < -1e-12)
      throw std::invalid_argument("verify_barrier: candidate must be nonnegative");
  ResidualReport rr = pde_residual_general(candidate, DoublePower::from(pr));
  const RadialGrid& g = *candidate.grid;
  BarrierVerdict out;
  out.ok = true;
  for (size_t i = 0; i < g.last(); ++i) {
    const double h_local =
        (i + 1 < g.size() ? g.r[i + 1] - g.r[i] : g.r[i] - g.r[i - 1]);
    bool exempt = false;
    for (double kr : kink_radii)
      if (std::abs(g.r[i] - kr) <= 1.5 * h_local) exempt = true;
    if (exempt) continue;
    const double sgn = (side == BarrierSide::Sub) ? rr.node_values[i] : -rr.node_values[i];
    if (sgn > out.worst_violation) {
      out.worst_violation = sgn;
      out.worst_node = i;
    }
  }
  out.ok = out.worst_violation <= tol;
  return out;
}

struct BarrierOptions {
  double R_max = 0.0;  // 0 -> automatic
  int M = 0;           // 0 -> automatic
  double profile_tol = 1e-7;
  double compact_probe_radius = 2.0;  // geodesic radius of the local supersolution ball
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument("build_pair: " + what);
}

struct PairWorkspace {
  std::shared_ptr<const RadialGrid> grid;
  ShootingOptions popts;

  RadialFunction profile(int N, double lambda, double p) const {
    ShootingOptions o = popts;
    SolveReport rep = detail_profile(N, lambda, p, o);
    if (!rep.converged)
      throw std::runtime_error("build_pair: companion profile solve failed at lambda=" +
                               std::to_string(lambda) + ", p=" + std::to_string(p));
    return RadialFunction(grid, rep.solution.values);
  }

 private:
  static SolveReport detail_profile(int N, double lambda, double p, ShootingOptions o) {
    return mancini_sandeep_profile(N, p, lambda, o);
  }
};

inline RadialFunction capped(const RadialFunction& f, double cap, double& kink_r) {
  RadialFunction out = f;
  kink_r = -1.0;
  for (size_t i = 0; i < out.size(); ++i) {
    if (out.values[i] >= cap) {
      out.values[i] = cap;
      kink_r = out.grid->r[i];
    }
  }
  return out;
}

inline bool ordered(const RadialFunction& lo, const RadialFunction& hi, double slack = 1e-12) {
  for (size_t i = 0; i < lo.size(); ++i)
    if (lo.values[i] > hi.values[i] + slack) return false;
  return true;
}

// smallest multiplier putting hi above lo (for L-type supersolutions)
inline double dominating_ratio(const RadialFunction& lo, const RadialFunction& hi) {
  double L = 0.0;
  for (size_t i = 0; i < lo.size(); ++i) {
    if (hi.values[i] > 1e-290)
      L = std::max(L, lo.values[i] / hi.values[i]);
    else if (lo.values[i] > 1e-280)
      return std::numeric_limits<double>::infinity();
  }
  return L;
}

inline RadialFunction scaled(const RadialFunction& f, double c) {
  RadialFunction out = f;
  for (auto& v : out.values) v *= c;
  return out;
}

}  // namespace detail

// Builds the sub/supersolution pair of the given strategy, checking the
// theorem hypotheses and recording every chosen constant. Throws naming the
// violated hypothesis or inequality when the selection is infeasible.
inline BarrierPair build_pair(const ProblemParams& pr, BarrierStrategy strategy,
                              const BarrierOptions& opts = {}) {
  using detail::require;
  const int N = pr.N;
  const double lam = pr.lambda, p = pr.p, q = pr.q;
  const double lam1 = lambda1(N);
  const double pc = critical_equation_exponent(N);
  const double nn4 = pohozaev_threshold(N);

  BarrierPair out;
  out.strategy = strategy;

  if (strategy == BarrierStrategy::CompactSupport) {
    require(q < 1.0 && p > 1.0, "CompactSupport requires 0 < q < 1 < p");
    const double gamma = 2.0 / (1.0 - q);
    const double R = opts.compact_probe_radius;
    const double CR = gamma * ((gamma - 1.0) + double(N - 1) * R / std::tanh(R));
    // feasibility of eps^{q-1} >= C_R + |lam| R^2 + eps^{p-1} R^{(p-1)gamma+2}
    auto margin = [&](double le) {
      const double e = std::exp(le);
      return std::pow(e, q - 1.0) - CR - std::abs(lam) * R * R -
             std::pow(e, p - 1.0) * std::pow(R, (p - 1.0) * gamma + 2.0);
    };
    double lo = -80.0, hi = 10.0;
    require(margin(lo) > 0.0, "CompactSupport: no feasible epsilon");
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (lo + hi);
      (margin(m) > 0.0 ? lo : hi) = m;
    }
    const double eps = 0.5 * std::exp(lo);
    const int M = opts.M > 0 ? opts.M : 2000;
    auto g = std::make_shared<RadialGrid>(build_grid(N, R, M));
    out.super = sample_function(g, [&](double t) { return eps * std::pow(t, gamma); });
    out.sub = constant_function(g, 0.0);
    out.chosen_parameters = {{"gamma", gamma}, {"eps", eps}, {"probe_radius", R}};
    out.super_ok = verify_barrier(out.super, pr, BarrierSide::Super).ok;
    out.sub_ok = verify_barrier(out.sub, pr, BarrierSide::Sub).ok;
    out.ordering_ok = detail::ordered(out.sub, out.super);
    return out;
  }

  // all remaining strategies sandwich with companion profiles on one grid
  detail::PairWorkspace ws;
  {
    double R = opts.R_max;
    if (R <= 0.0) R = auto_r_max(N, std::min(lam1 - 0.05, std::max(lam, 0.0) + 1.0));
    const int M = opts.M > 0 ? opts.M : std::clamp(int(R * 600), 4000, 24000);
    ws.grid = std::make_shared<RadialGrid>(build_grid(N, R, M));
    ws.popts.R_max = R;
    ws.popts.M = M;
    ws.popts.tol = opts.profile_tol;
    ws.popts.check_domain = false;
  }
  auto& P = out.chosen_parameters;

  switch (strategy) {
    case BarrierStrategy::A1: {
      require(p < q, "A1 requires p < q");
      require(p < pc, "A1 requires subcritical p");
      require(lam >= 0.0 && lam < lam1, "A1 requires 0 <= lambda < lambda1");
      out.super = ws.profile(N, lam, p);
      double eps = 0.5, kink = -1.0;
      for (int k = 0; k < 40; ++k) {
        const double lamp = lam - 2.0 * std::pow(eps, q - 1.0);
        RadialFunction base = ws.profile(N, lamp, p);
        RadialFunction sub = detail::capped(base, eps, kink);
        if (detail::ordered(sub, out.super)) {
          out.sub = std::move(sub);
          P["eps"] = eps;
          P["lambda_prime"] = lamp;
          break;
        }
        eps *= 0.5;
      }
      require(!out.sub.values.empty(), "A1: no epsilon gave the sub <= super ordering");
      require(lam - P["lambda_prime"] > std::pow(P["eps"], q - 1.0),
              "A1: lambda - lambda' > eps^{q-1} violated");
      require(-lam * P["eps"] <= std::pow(P["eps"], p) - std::pow(P["eps"], q),
              "A1: -lambda eps <= eps^p - eps^q violated");
      if (kink > 0.0) out.kink_radii.push_back(kink);
      break;
    }

    case BarrierStrategy::CritPos: {
      require(p >= pc - 1e-12 && p < q, "CritPos requires q > p >= 2*-1");
      require(N >= 4, "CritPos requires N >= 4 (critical companion profile)");
      require(lam >= 0.0 && lam < lam1, "CritPos requires 0 <= lambda < lambda1");
      // nearer lambda1 the critical companion profile is tame
      const double lamp = std::max(nn4, lam) + 0.8 * (lam1 - std::max(nn4, lam));
      out.super = ws.profile(N, lamp, p);
      const double r = 0.5 * (1.0 + pc);
      const double lampp = lam - 1.5;
      RadialFunction base = ws.profile(N, lampp, r);
      double eps = 0.5 * std::min({std::pow(0.5, 1.0 / (q - 1.0)),
                                   std::pow(0.5, 1.0 / (r - 1.0)), 0.5});
      double kink = -1.0;
      bool ok = false;
      for (int k = 0; k < 40 && !ok; ++k) {
        RadialFunction sub = detail::capped(base, eps, kink);
        if (detail::ordered(sub, out.super)) {
          out.sub = std::move(sub);
          ok = true;
          break;
        }
        eps *= 0.5;
      }
      require(ok, "CritPos: no epsilon gave the sub <= super ordering");
      require(std::pow(eps, q - 1.0) + std::pow(eps, r - 1.0) < 1.0,
              "CritPos: inf inequality margin violated");
      P["lambda_prime"] = lamp;
      P["lambda_second"] = lampp;
      P["r"] = r;
      P["eps"] = eps;
      if (kink > 0.0) out.kink_radii.push_back(kink);
      break;
    }

    case BarrierStrategy::A2_SmallNeg: {
      require(p < q && p < pc, "A2 requires subcritical p < q");
      const double lpq = lambda_pq(p, q).lambda_pq;
      require(lam < 0.0 && lam >= -lpq,
              "A2: eps^{p-1} - eps^{q-1} = -lambda unsolvable (lambda outside [-lambda_pq, 0))");
      // increasing branch root of h_pq(eps) = -lambda
      const double tpq = lambda_pq(p, q).t_pq;
      double lo = 0.0, hi = tpq;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (lo + hi);
        (h_pq(m, p, q) < -lam ? lo : hi) = m;
      }
      const double eps = 0.5 * (lo + hi);
      const double lamp = lam - std::pow(eps, q - 1.0);
      out.super = ws.profile(N, lam, p);
      RadialFunction base = ws.profile(N, lamp, p);
      double kink = -1.0;
      out.sub = detail::capped(base, eps, kink);
      P["eps"] = eps;
      P["lambda_prime"] = lamp;
      P["t_pq"] = tpq;
      if (kink > 0.0) out.kink_radii.push_back(kink);
      require(detail::ordered(out.sub, out.super), "A2: sub <= super ordering violated");
      break;
    }

    case BarrierStrategy::Thm10_Endpoint: {
      require(p < q && p < pc, "Thm10 requires subcritical p < q");
      auto [lpq, tpq] = lambda_pq(p, q);
      require(std::abs(lam + lpq) < 1e-9, "Thm10 requires lambda = -lambda_pq exactly");
      const double lamp = -lpq - std::pow(tpq, q - 1.0);
      RadialFunction base = ws.profile(N, lamp, p);
      double kink = -1.0;
      out.sub = detail::capped(base, tpq, kink);
      RadialFunction u0 = ws.profile(N, 0.0, p);
      double L = detail::dominating_ratio(out.sub, u0);
      require(std::isfinite(L), "Thm10: comparison profile decays too fast");
      L = std::max(1.0, 1.1 * L);
      out.super = detail::scaled(u0, L);
      P["lambda_prime"] = lamp;
      P["t_pq"] = tpq;
      P["L"] = L;
      if (kink > 0.0) out.kink_radii.push_back(kink);
      break;
    }

    case BarrierStrategy::A3_Interior: {
      require(p < q && p < pc, "A3 requires subcritical p < q");
      const double lpq = lambda_pq(p, q).lambda_pq;
      require(lam > -lpq && lam < 0.0, "A3 requires -lambda_pq < lambda < 0");
      // the endpoint subsolution remains a subsolution for lambda > -lambda_pq
      ProblemParams at_endpoint(N, p, q, -lpq);
      BarrierOptions nested = opts;
      nested.R_max = ws.grid->r_max();
      nested.M = int(ws.grid->size()) - 1;
      BarrierPair endpoint = build_pair(at_endpoint, BarrierStrategy::Thm10_Endpoint, nested);
      out.sub = endpoint.sub;
      out.kink_radii = endpoint.kink_radii;
      const double lam0 = 1.0 + lam;
      require(lam0 > 0.0 && lam0 < lam1, "A3: lambda0 = 1 + lambda outside (0, lambda1)");
      RadialFunction u0 = ws.profile(N, lam0, p);
      double L = detail::dominating_ratio(out.sub, u0);
      require(std::isfinite(L), "A3: comparison profile decays too fast");
      L = std::max(1.0, 1.1 * L);
      out.super = detail::scaled(u0, L);
      P["lambda0"] = lam0;
      P["L"] = L;
      P["lambda_prime"] = endpoint.chosen_parameters.at("lambda_prime");
      P["t_pq"] = endpoint.chosen_parameters.at("t_pq");
      break;
    }

    case BarrierStrategy::A4_CritNeg: {
      require(std::abs(p - pc) < 1e-12 && q > p, "A4 requires p = 2*-1 < q");
      require(N >= 4, "A4 requires N >= 4");
      const double lpq = lambda_pq(p, q).lambda_pq;
      require(lam > -lpq && lam < 0.0, "A4 requires -lambda_pq < lambda < 0");
      // terminating search along r_k = p - 2^{-k} for lambda_{r,p} < lambda_pq + lambda
      double r = -1.0;
      for (int k = 1; k <= 40; ++k) {
        const double rk = p - std::pow(2.0, -k);
        if (rk <= 1.0) continue;
        if (lambda_pq(rk, p).lambda_pq < lpq + lam) {
          r = rk;
          break;
        }
      }
      require(r > 1.0, "A4: no r in {p - 2^-k} satisfies lambda_{r,p} < lambda_pq + lambda");
      auto [lrq, trq] = lambda_pq(r, q);
      const double lamp = -lrq - std::pow(trq, q - 1.0);
      RadialFunction base = ws.profile(N, lamp, r);
      double kink = -1.0;
      out.sub = detail::capped(base, trq, kink);
      const double lam0 = nn4 + 0.8 * (lam1 - nn4);
      RadialFunction u0 = ws.profile(N, lam0, p);
      double L = detail::dominating_ratio(out.sub, u0);
      require(std::isfinite(L), "A4: comparison profile decays too fast");
      L = std::max(1.0, 1.1 * L);
      out.super = detail::scaled(u0, L);
      require(lam0 - lam > 2.0, "A4: dominant-term inequality lambda0 - lambda > 2 violated");
      P["r"] = r;
      P["lambda_prime"] = lamp;
      P["t_rq"] = trq;
      P["lambda0"] = lam0;
      P["L"] = L;
      if (kink > 0.0) out.kink_radii.push_back(kink);
      break;
    }

    case BarrierStrategy::CritEndpoint: {
      require(std::abs(p - pc) < 1e-12 && q > p, "CritEndpoint requires p = 2*-1 < q");
      require(N >= 4, "CritEndpoint requires N >= 4");
      auto [lpq, tpq] = lambda_pq(p, q);
      require(lam >= -lpq - 1e-12 && lam < 0.0,
              "CritEndpoint requires lambda in [-lambda_pq, 0)");
      const double r = 0.5 * (1.0 + pc);
      const double lamp = -lpq - std::pow(tpq, r - 1.0) - std::pow(tpq, q - 1.0);
      RadialFunction base = ws.profile(N, lamp, r);
      double kink = -1.0;
      out.sub = detail::capped(base, tpq, kink);
      const double lam0 = nn4 + 0.8 * (lam1 - nn4);
      RadialFunction u0 = ws.profile(N, lam0, p);
      double L = detail::dominating_ratio(out.sub, u0);
      require(std::isfinite(L), "CritEndpoint: comparison profile decays too fast");
      L = std::max(1.0, 1.1 * L);
      out.super = detail::scaled(u0, L);
      P["r"] = r;
      P["lambda_prime"] = lamp;
      P["t_pq"] = tpq;
      P["lambda0"] = lam0;
      P["L"] = L;
      if (kink > 0.0) out.kink_radii.push_back(kink);
      break;
    }

    case BarrierStrategy::A5_Supercrit: {
      require(q > p && p >= pc - 1e-12, "A5 requires q > p >= 2*-1");
      require(lam >= 0.0 && lam < lam1, "A5 requires 0 <= lambda < lambda1");
      const double r = 0.5 * (1.0 + pc);
      out.super = ws.profile(N, lam, r);
      const double lampp = lam - 1.5;
      RadialFunction base = ws.profile(N, lampp, r);
      double eps = 0.25, kink = -1.0;
      bool ok = false;
      for (int k = 0; k < 40 && !ok; ++k) {
        if (std::pow(eps, q - 1.0) + std::pow(eps, r - 1.0) < 1.0) {
          RadialFunction sub = detail::capped(base, eps, kink);
          if (detail::ordered(sub, out.super)) {
            out.sub = std::move(sub);
            ok = true;
            break;
          }
        }
        eps *= 0.5;
      }
      require(ok, "A5: no epsilon gave the sub <= super ordering");
      P["r"] = r;
      P["lambda_second"] = lampp;
      P["eps"] = eps;
      if (kink > 0.0) out.kink_radii.push_back(kink);
      break;
    }

    case BarrierStrategy::A6_SupercritNeg: {
      require(q > p && p >= pc - 1e-12, "A6 requires q > p >= 2*-1");
      auto [lpq, tpq] = lambda_pq(p, q);
      require(lam >= -lpq - 1e-12 && lam < 0.0, "A6 requires lambda in [-lambda_pq, 0)");
      const double r = 0.5 * (1.0 + pc);
      // increasing-branch root of h_pq(eps) = -lambda gives the plateau level
      double lo = 0.0, hi = tpq;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (lo + hi);
        (h_pq(m, p, q) < -lam ? lo : hi) = m;
      }
      const double eps = hi;  // h(eps) >= -lambda
      require(std::pow(eps, q - 1.0) + std::pow(eps, r - 1.0) < 1.0,
              "A6: inf inequality margin violated");
      const double lampp = lam - 1.5;
      RadialFunction base = ws.profile(N, lampp, r);
      double kink = -1.0;
      out.sub = detail::capped(base, eps, kink);
      const double lam0 = 1.0 + lam;
      require(lam0 > 0.0 && lam0 < lam1, "A6: lambda0 = 1 + lambda outside (0, lambda1)");
      RadialFunction u0 = ws.profile(N, lam0, r);
      double L = detail::dominating_ratio(out.sub, u0);
      require(std::isfinite(L), "A6: comparison profile decays too fast");
      L = std::max(1.0, 1.1 * L);
      out.super = detail::scaled(u0, L);
      P["r"] = r;
      P["eps"] = eps;
      P["lambda_second"] = lampp;
      P["lambda0"] = lam0;
      P["L"] = L;
      if (kink > 0.0) out.kink_radii.push_back(kink);
      break;
    }

    case BarrierStrategy::C1_QltP_Crit: {
      require(q > 1.0 && q < p && std::abs(p - pc) < 1e-12,
              "C1 requires 1 < q < p = 2*-1");
      require(N >= 4, "C1 requires N >= 4");
      require(lam > nn4 && lam < lam1, "C1 requires N(N-2)/4 < lambda < lambda1");
      out.super = ws.profile(N, lam, p);
      const double lam0 = lam - 0.1 * (lam - nn4);
      RadialFunction base = ws.profile(N, lam0, p);
      double eps = 0.5, kink = -1.0;
      bool ok = false;
      for (int k = 0; k < 50 && !ok; ++k) {
        const bool ineq1 = std::pow(eps, q - 1.0) < lam - lam0;
        const bool ineq2 = -lam <= std::pow(eps, p - 1.0) - std::pow(eps, q - 1.0);
        if (ineq1 && ineq2) {
          RadialFunction sub = detail::capped(base, eps, kink);
          if (detail::ordered(sub, out.super)) {
            out.sub = std::move(sub);
            ok = true;
            break;
          }
        }
        eps *= 0.5;
      }
      require(ok, "C1: eps^{q-1} < lambda - lambda0 selection failed");
      P["lambda0"] = lam0;
      P["eps"] = eps;
      if (kink > 0.0) out.kink_radii.push_back(kink);
      break;
    }

    case BarrierStrategy::CompactSupport:
      break;  // handled above
  }

  out.sub_ok = verify_barrier(out.sub, pr, BarrierSide::Sub, out.kink_radii).ok;
  out.super_ok = verify_barrier(out.super, pr, BarrierSide::Super, out.kink_radii).ok;
  out.ordering_ok = detail::ordered(out.sub, out.super, 1e-10);
  return out;
}

// Largest radius where |u| exceeds the support floor. Returns {finite=false}
// when the profile is still above the floor at the domain edge.
struct SupportProbe {
  bool finite = true;
  double radius = 0.0;
};

inline SupportProbe compact_support_probe(const RadialFunction& u, const ProblemParams& pr,
                                          double floor = 1e-9) {
  (void)pr;  // the probe itself is regime-agnostic; callers gate on q < 1
  SupportProbe probe;
  const size_t M = u.grid->last();
  if (std::abs(u.values[M]) > floor || std::abs(u.values[M - 1]) > floor) {
    probe.finite = false;
    probe.radius = u.grid->r_max();
    return probe;
  }
  probe.radius = 0.0;
  for (size_t i = 0; i < u.size(); ++i)
    if (std::abs(u.values[i]) > floor) probe.radius = u.grid->r[i];
  return probe;
}

inline nlohmann::json to_json(const BarrierPair& bp) {
  nlohmann::json j;
  j["strategy"] = to_string(bp.strategy);
  j["chosen_parameters"] = bp.chosen_parameters;
  j["verified"] = {{"sub_ok", bp.sub_ok},
                   {"super_ok", bp.super_ok},
                   {"ordering_ok", bp.ordering_ok}};
  j["kink_radii"] = bp.kink_radii;
  j["sub"] = to_json(bp.sub);
  j["super"] = to_json(bp.super);
  return j;
}

}  // namespace hypergs
