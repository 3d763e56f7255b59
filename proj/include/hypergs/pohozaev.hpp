#pragma once

// Conformal lift to the Euclidean ball and the integral audits: boundary
// decay fits, annulus gradient orders, both variants of the integral
// identity, and shooting-sweep nonexistence evidence.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypergs/closed_forms.hpp"
#include "hypergs/geometry.hpp"
#include "hypergs/grid.hpp"
#include "hypergs/solvers.hpp"

#include "json.hpp"

namespace hypergs {

struct DecayAudit {
  bool compact_support = false;
  std::optional<double> exponent;  // fitted power of (1 - s^2) near the sphere
};

// Fits log |v| against log(1 - s^2) over the outer fifth of the lifted grid,
// skipping nodes below the floating noise floor. Profiles that vanish on the
// whole window are reported as compactly supported.
inline DecayAudit lift_and_decay_audit(const RadialFunction& u, const ProblemParams& pr) {
  (void)pr;
  LiftedProfile lp = conformal_lift(u.grid->r, u.values, u.grid->N);
  DecayAudit out;
  double vmax = 0.0;
  for (double v : lp.v) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0.0) {
    out.compact_support = true;
    return out;
  }
  const size_t n = lp.s.size();
  const size_t start = n - n / 5;
  std::vector<double> xs, ys;
  for (size_t i = start; i + 1 < n; ++i) {  // final node carries the hard zero
    const double v = std::abs(lp.v[i]);
    if (v < 1e-12 * vmax) continue;
    xs.push_back(std::log(1.0 - lp.s[i] * lp.s[i]));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 8) {
    out.compact_support = true;
    return out;
  }
  out.exponent = num::fit_line(xs, ys).slope;
  return out;
}

struct AnnulusAudit {
  std::vector<double> epsilons;
  std::vector<double> integrals;  // int_{A_eps} |grad v|^2 dx
  std::optional<double> slope;
  bool all_zero_tail = false;
};

// Gradient mass of the annuli A_eps = {1-2eps < |x| < 1-eps}, with the
// log-log slope over the decreasing schedule.
inline AnnulusAudit annulus_gradient_audit(const RadialFunction& u, const ProblemParams& pr) {
  const int N = u.grid->N;
  const double nn4 = pohozaev_threshold(N);
  if (pr.q > 1.0 && !(pr.lambda < nn4))
    throw std::invalid_argument(
        "annulus_gradient_audit: q > 1 requires lambda < N(N-2)/4");
  if (pr.q < 1.0 && !(pr.lambda <= nn4))
    throw std::invalid_argument(
        "annulus_gradient_audit: q < 1 requires lambda <= N(N-2)/4");

  LiftedProfile lp = conformal_lift(u.grid->r, u.values, N);
  const size_t n = lp.s.size();
  std::vector<double> dv(n, 0.0);
  for (size_t i = 1; i + 1 < n; ++i)
    dv[i] = (lp.v[i + 1] - lp.v[i - 1]) / (lp.s[i + 1] - lp.s[i - 1]);

  AnnulusAudit out;
  const double s_max = lp.s.back();
  const double eps_min = std::max(2.0 * (1.0 - s_max), 1e-5);
  for (double e = 0.125; e >= eps_min; e *= 0.5) out.epsilons.push_back(e);
  if (out.epsilons.size() < 4)
    throw std::invalid_argument("annulus_gradient_audit: domain too short for a schedule");

  const double omega = sphere_area(N);
  for (double e : out.epsilons) {
    const double lo = 1.0 - 2.0 * e, hi = 1.0 - e;
    double acc = 0.0;
    for (size_t i = 1; i + 1 < n; ++i) {
      if (lp.s[i] < lo || lp.s[i] > hi) continue;
      const double ds = 0.5 * (lp.s[i + 1] - lp.s[i - 1]);
      acc += dv[i] * dv[i] * std::pow(lp.s[i], N - 1) * ds;
    }
    out.integrals.push_back(omega * acc);
  }

  std::vector<double> xs, ys;
  for (size_t k = 0; k < out.epsilons.size(); ++k) {
    if (out.integrals[k] > 0.0) {
      xs.push_back(std::log(out.epsilons[k]));
      ys.push_back(std::log(out.integrals[k]));
    }
  }
  if (out.integrals.back() == 0.0) out.all_zero_tail = true;
  if (xs.size() >= 4) out.slope = num::fit_line(xs, ys).slope;
  return out;
}

enum class PohozaevVariant { Interior, CriticalLambda };

struct PohozaevReport {
  double lhs = 0.0;  // lambda-tilde weighted term (Interior) or -flux/2 (CriticalLambda)
  std::array<double, 4> rhs_terms{};  // raw alpha/beta integrals and their signed terms
  double residual = 0.0;
  double scale = 0.0;  // largest participating term, for relative comparisons
  std::optional<double> boundary_flux;  // the sphere integral of (dv/dnu)^2 nu.x
  DecayAudit decay;
  std::optional<double> annulus_order;
};

// Both sides of the integral identity on the lifted profile: the
// lambda-tilde weighted square mass against the alpha- and beta-weighted
// power masses, all under the (1+|x|^2)/(1-|x|^2) factor; the critical
// variant replaces the left side by the boundary flux term.
inline PohozaevReport pohozaev_residual(const RadialFunction& u, const ProblemParams& pr,
                                        PohozaevVariant variant) {
  const int N = u.grid->N;
  const auto ce = conformal_exponents(N, pr.p, pr.q, pr.lambda);

  PohozaevReport rep;
  rep.decay = lift_and_decay_audit(u, pr);
  if (!rep.decay.compact_support && !rep.decay.exponent)
    throw std::runtime_error("pohozaev_residual: decay audit failed, identity unjustified");
  try {
    rep.annulus_order = annulus_gradient_audit(u, pr).slope;
  } catch (const std::invalid_argument&) {
    // spectral window not suited for the annulus lemma; the identity itself
    // is still evaluated
  }

  LiftedProfile lp = conformal_lift(u.grid->r, u.values, N);
  const size_t n = lp.s.size();
  const double omega = sphere_area(N);

  auto weighted_mass = [&](double h_exponent, double power, bool with_omega_factor) {
    double acc = 0.0;
    for (size_t i = 0; i + 1 < n; ++i) {
      auto node = [&](size_t j) {
        const double s = lp.s[j];
        const double h = 2.0 / (1.0 - s * s);
        const double fac = with_omega_factor ? (1.0 + s * s) / (1.0 - s * s) : 1.0;
        return std::pow(h, h_exponent) * fac * std::pow(std::abs(lp.v[j]), power) *
               std::pow(s, N - 1);
      };
      acc += 0.5 * (node(i) + node(i + 1)) * (lp.s[i + 1] - lp.s[i]);
    }
    return omega * acc;
  };

  const double I_alpha = weighted_mass(ce.alpha, pr.p + 1.0, true);
  const double I_beta = weighted_mass(ce.beta, pr.q + 1.0, true);
  const double term_alpha = -ce.alpha / (pr.p + 1.0) * I_alpha;
  const double term_beta = ce.beta / (pr.q + 1.0) * I_beta;
  rep.rhs_terms = {I_alpha, I_beta, term_alpha, term_beta};

  if (variant == PohozaevVariant::Interior) {
    rep.lhs = ce.lambda_tilde * weighted_mass(2.0, 2.0, true);
  } else {
    // one-sided cubic derivative of v at the sphere from the last nodes
    if (n < 5) throw std::invalid_argument("pohozaev_residual: grid too short");
    std::array<double, 4> sx{}, sv{};
    for (int k = 0; k < 4; ++k) {
      sx[k] = lp.s[n - 4 + k];
      sv[k] = lp.v[n - 4 + k];
    }
    // Lagrange derivative at the evaluation point s = 1
    double dv1 = 0.0;
    for (int j = 0; j < 4; ++j) {
      double sum = 0.0;
      for (int m = 0; m < 4; ++m) {
        if (m == j) continue;
        double prod = 1.0;
        for (int l = 0; l < 4; ++l) {
          if (l == j || l == m) continue;
          prod *= (1.0 - sx[l]) / (sx[j] - sx[l]);
        }
        sum += prod / (sx[j] - sx[m]);
      }
      dv1 += sv[j] * sum;
    }
    const double flux = omega * dv1 * dv1;  // nu . x = 1 on the unit sphere
    rep.boundary_flux = flux;
    rep.lhs = -0.5 * flux;
  }

  rep.residual = rep.lhs - (term_alpha + term_beta);
  rep.scale = std::max({std::abs(rep.lhs), std::abs(term_alpha), std::abs(term_beta), 1e-300});
  return rep;
}

struct SweepEntry {
  double height = 0.0;
  ShootOutcome outcome = ShootOutcome::Blows;
};

struct NonexistenceReport {
  std::vector<SweepEntry> entries;
  bool decays_found = false;
  double lambda_tilde = 0.0, alpha = 0.0, beta = 0.0;
  bool sign_structure_nonexistence = false;  // lambda_tilde <= 0, alpha <= 0, beta > 0
  Verdict classified = Verdict::OpenEndpoint;
  bool contradiction = false;
  std::string note;
};

struct SweepOptions {
  double a_min = 1e-3;
  double a_max = 1e3;
  int points = 40;
  ShootingOptions shooting;
};

// Shooting sweep over initial heights plus bracket refinement; reports
// whether any decaying positive orbit was certified, together with the
// closed-form sign structure that explains nonexistence windows. A decaying
// orbit found inside a certified window is flagged, never suppressed.
inline NonexistenceReport nonexistence_evidence(const ProblemParams& pr,
                                                const SweepOptions& opts = {}) {
  NonexistenceReport rep;
  const auto ce = conformal_exponents(pr.N, pr.p, pr.q, pr.lambda);
  rep.lambda_tilde = ce.lambda_tilde;
  rep.alpha = ce.alpha;
  rep.beta = ce.beta;
  rep.sign_structure_nonexistence =
      ce.lambda_tilde <= 0.0 && ce.alpha <= 0.0 && ce.beta > 0.0;
  rep.classified = classify_regime(pr).verdict;

  ShootingOptions so = opts.shooting;
  if (so.R_max <= 0.0) so.R_max = auto_r_max(pr.N, pr.lambda, so.lambda1_guard);
  const double r_stop = so.R_max;
  DoublePower np = DoublePower::from(pr);
  for (int i = 0; i < opts.points; ++i) {
    const double a = opts.a_min *
                     std::pow(opts.a_max / opts.a_min, i / double(opts.points - 1));
    ShootResult sr = shoot_ivp(pr.N, np, a, r_stop, so);
    rep.entries.push_back({a, sr.outcome});
    if (sr.outcome == ShootOutcome::Decays) rep.decays_found = true;
  }
  if (!rep.decays_found) {
    // refine every adjacent crossing/non-crossing pair down to the width
    // where a decaying orbit would have been certified
    ShootingOptions gso = so;
    gso.a_min = opts.a_min;
    gso.a_max = opts.a_max;
    gso.scan_points = opts.points;
    gso.check_domain = false;
    SolveReport gs = ground_state_by_shooting(pr, gso);
    if (gs.converged && gs.solution.max_abs() > 1e-4) rep.decays_found = true;
  }
  if (rep.decays_found && rep.classified == Verdict::NotExists) {
    rep.contradiction = true;
    rep.note =
        "decaying orbit found inside a certified nonexistence window; numerics "
        "or classification must be re-examined";
  }
  return rep;
}

inline nlohmann::json to_json(const PohozaevReport& rep) {
  nlohmann::json j;
  j["lhs"] = rep.lhs;
  j["rhs_terms"] = rep.rhs_terms;
  j["residual"] = rep.residual;
  j["scale"] = rep.scale;
  if (rep.boundary_flux) j["boundary_flux"] = *rep.boundary_flux;
  if (rep.decay.exponent) j["decay_fit"] = *rep.decay.exponent;
  j["compact_support"] = rep.decay.compact_support;
  if (rep.annulus_order) j["annulus_order"] = *rep.annulus_order;
  return j;
}

inline nlohmann::json to_json(const NonexistenceReport& rep) {
  nlohmann::json j;
  j["decays_found"] = rep.decays_found;
  j["lambda_tilde"] = rep.lambda_tilde;
  j["alpha"] = rep.alpha;
  j["beta"] = rep.beta;
  j["sign_structure_nonexistence"] = rep.sign_structure_nonexistence;
  j["classified"] = to_string(rep.classified);
  j["contradiction"] = rep.contradiction;
  if (!rep.note.empty()) j["note"] = rep.note;
  auto arr = nlohmann::json::array();
  for (const auto& e : rep.entries)
    arr.push_back({{"height", e.height}, {"outcome", to_string(e.outcome)}});
  j["sweep"] = arr;
  return j;
}

}  // namespace hypergs
