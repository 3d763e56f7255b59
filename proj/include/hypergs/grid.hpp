#pragma once

// Radial grids on [0, R_max] in geodesic radius, the discrete operator
// L u = -u'' - (N-1) coth(r) u', hyperbolic quadrature, and the pointwise
// residual of the double-power equation.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypergs/closed_forms.hpp"
#include "hypergs/geometry.hpp"
#include "hypergs/numerics.hpp"

#include "json.hpp"

namespace hypergs {

enum class Spacing { Uniform, Graded };

struct RadialGrid {
  std::vector<double> r;  // 0 = r_0 < ... < r_M = R_max
  std::vector<double> w;  // trapezoid weights carrying sphere_area * sinh^(N-1)
  int N = 3;
  Spacing policy = Spacing::Uniform;

  size_t size() const { return r.size(); }
  size_t last() const { return r.size() - 1; }
  double r_max() const { return r.back(); }
  double sigma(double rr) const { return radial_measure_weight(N, rr); }
};

inline RadialGrid build_grid(int N, double R_max, int M, Spacing policy = Spacing::Uniform) {
  if (N < 3) throw std::invalid_argument("build_grid: N must be >= 3");
  if (!(R_max > 0.0)) throw std::invalid_argument("build_grid: R_max must be > 0");
  if (M < 16) throw std::invalid_argument("build_grid: M must be >= 16");
  RadialGrid g;
  g.N = N;
  g.policy = policy;
  g.r.resize(M + 1);
  for (int i = 0; i <= M; ++i) {
    const double xi = double(i) / M;
    if (policy == Spacing::Uniform) {
      g.r[i] = R_max * xi;
    } else {
      // smooth exponential grading, denser near r = 0
      const double a = 3.0;
      g.r[i] = R_max * (std::exp(a * xi) - 1.0) / (std::exp(a) - 1.0);
    }
  }
  g.r[0] = 0.0;
  g.r[M] = R_max;
  g.w.assign(M + 1, 0.0);
  for (int i = 0; i <= M; ++i) {
    const double hl = (i > 0) ? g.r[i] - g.r[i - 1] : 0.0;
    const double hr = (i < M) ? g.r[i + 1] - g.r[i] : 0.0;
    g.w[i] = g.sigma(g.r[i]) * 0.5 * (hl + hr);
  }
  return g;
}

struct RadialFunction {
  std::shared_ptr<const RadialGrid> grid;
  std::vector<double> values;
  std::optional<double> decay_tag;  // fitted boundary exponent, when known

  RadialFunction() = default;
  RadialFunction(std::shared_ptr<const RadialGrid> g, std::vector<double> v)
      : grid(std::move(g)), values(std::move(v)) {
    if (!grid || values.size() != grid->size())
      throw std::invalid_argument("RadialFunction: values/grid size mismatch");
  }

  size_t size() const { return values.size(); }
  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

inline RadialFunction constant_function(std::shared_ptr<const RadialGrid> g, double c) {
  return RadialFunction(g, std::vector<double>(g->size(), c));
}

template <class F>
RadialFunction sample_function(std::shared_ptr<const RadialGrid> g, const F& f) {
  std::vector<double> v(g->size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = f(g->r[i]);
  return RadialFunction(g, std::move(v));
}

// Discrete L u - lambda u. Rows 0..M-1 are operator rows (row 0 uses the
// symmetric origin stencil -N u''(0)); row M is the far boundary slot and is
// reported as 0 by convention.
inline RadialFunction apply_operator(const RadialFunction& u, double lambda) {
  const RadialGrid& g = *u.grid;
  const size_t M = g.last();
  const int N = g.N;
  std::vector<double> out(g.size(), 0.0);

  {
    const double h0 = g.r[1] - g.r[0];
    const double upp0 = 2.0 * (u.values[1] - u.values[0]) / (h0 * h0);
    out[0] = -double(N) * upp0 - lambda * u.values[0];
  }
  for (size_t i = 1; i < M; ++i) {
    const double hm = g.r[i] - g.r[i - 1];
    const double hp = g.r[i + 1] - g.r[i];
    // difference form: constants (and, for u', linears) cancel exactly
    const double dp = u.values[i + 1] - u.values[i];
    const double dm = u.values[i] - u.values[i - 1];
    const double denom = hm * hp * (hm + hp);
    const double upp = 2.0 * (hm * dp - hp * dm) / denom;
    const double upr = (hm * hm * dp + hp * hp * dm) / denom;
    out[i] = -upp - double(N - 1) * num::coth(g.r[i]) * upr - lambda * u.values[i];
  }
  RadialFunction res(u.grid, std::move(out));
  return res;
}

// sum_i w_i |f_i|^power
inline double integrate(const RadialFunction& f, double power = 1.0) {
  const RadialGrid& g = *f.grid;
  double s = 0.0;
  for (size_t i = 0; i < f.size(); ++i) {
    const double t = std::pow(std::abs(f.values[i]), power);
    if (!std::isfinite(t))
      throw std::runtime_error("integrate: overflow at node " + std::to_string(i));
    s += g.w[i] * t;
  }
  return s;
}

// ----------------------------------------------------------- nonlinearity

// f(u) = lambda u + |u|^(p-1)u - |u|^(q-1)u, with the defocusing term
// optional so the single-power companion problem shares the machinery.
struct DoublePower {
  double lambda = 0.0;
  double p = 2.0;
  double q = 3.0;
  bool with_q = true;

  static DoublePower from(const ProblemParams& pr) {
    return {pr.lambda, pr.p, pr.q, true};
  }
  static DoublePower single(double lambda, double p) { return {lambda, p, 0.0, false}; }

  double f(double u) const {
    const double a = std::abs(u);
    double v = lambda * u + std::pow(a, p - 1.0) * u;
    if (with_q && a > 0.0) v -= std::pow(a, q - 1.0) * u;
    return v;
  }
  // derivative, with the q < 1 slope capped at |u| = floor_q
  double df(double u, double floor_q = 1e-9) const {
    const double a = std::abs(u);
    double v = lambda + p * std::pow(a, p - 1.0);
    if (with_q) {
      const double base = (q < 1.0) ? std::max(a, floor_q) : a;
      if (base > 0.0) v -= q * std::pow(base, q - 1.0);
    }
    return v;
  }
};

struct ResidualReport {
  double sup = 0.0;
  size_t argmax = 0;
  std::vector<double> node_values;  // rows 0..M-1; entry M fixed at 0
};

inline ResidualReport pde_residual_general(const RadialFunction& u, const DoublePower& np) {
  if (np.with_q && np.q < 1.0) {
    for (size_t i = 0; i < u.size(); ++i)
      if (u.values[i] < -1e-12)
        throw std::invalid_argument(
            "pde_residual: negative value with q < 1 at node " + std::to_string(i));
  }
  RadialFunction Lu = apply_operator(u, np.lambda);  // includes the -lambda u term
  ResidualReport rep;
  rep.node_values.assign(u.size(), 0.0);
  const size_t M = u.grid->last();
  for (size_t i = 0; i < M; ++i) {
    double ui = u.values[i];
    if (np.with_q && np.q < 1.0 && ui < 0.0) ui = 0.0;  // clamp roundoff negatives
    const double power_part = np.f(ui) - np.lambda * ui;
    const double res = Lu.values[i] - power_part;
    rep.node_values[i] = res;
    if (std::abs(res) > rep.sup) {
      rep.sup = std::abs(res);
      rep.argmax = i;
    }
  }
  return rep;
}

inline ResidualReport pde_residual(const RadialFunction& u, const ProblemParams& pr) {
  return pde_residual_general(u, DoublePower::from(pr));
}

// ------------------------------------------------------------ energy norms

// int u'^2 dV by the midpoint-face Dirichlet form; this is the discrete
// quadratic form whose exact gradient the variational code uses.
inline double dirichlet_energy(const RadialFunction& u) {
  const RadialGrid& g = *u.grid;
  double e = 0.0;
  for (size_t i = 0; i + 1 < g.size(); ++i) {
    const double h = g.r[i + 1] - g.r[i];
    const double sig = g.sigma(0.5 * (g.r[i] + g.r[i + 1]));
    const double du = (u.values[i + 1] - u.values[i]) / h;
    e += sig * du * du * h;
  }
  return e;
}

// ||u||_lambda^2 = int (u'^2 - lambda u^2) dV
inline double norm_lambda_sq(const RadialFunction& u, double lambda) {
  return dirichlet_energy(u) - lambda * integrate(u, 2.0);
}

// -------------------------------------------------------------- serialization

inline void to_csv(const RadialFunction& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("to_csv: cannot open " + path);
  os.precision(17);
  os << "r,u\n";
  for (size_t i = 0; i < f.size(); ++i) os << f.grid->r[i] << "," << f.values[i] << "\n";
}

inline nlohmann::json to_json(const RadialFunction& f) {
  nlohmann::json j;
  j["kind"] = "radial_function";
  j["dimension"] = f.grid->N;
  j["grid"] = {{"r_max", f.grid->r_max()},
               {"nodes", f.grid->size()},
               {"spacing", f.grid->policy == Spacing::Uniform ? "uniform" : "graded"}};
  j["r"] = f.grid->r;
  j["u"] = f.values;
  if (f.decay_tag) j["decay_tag"] = *f.decay_tag;
  return j;
}

inline RadialFunction radial_function_from_json(const nlohmann::json& j) {
  auto g = std::make_shared<RadialGrid>();
  g->N = j.at("dimension").get<int>();
  g->policy = j.at("grid").at("spacing").get<std::string>() == "uniform" ? Spacing::Uniform
                                                                         : Spacing::Graded;
  g->r = j.at("r").get<std::vector<double>>();
  const size_t M = g->r.size() - 1;
  g->w.assign(M + 1, 0.0);
  for (size_t i = 0; i <= M; ++i) {
    const double hl = (i > 0) ? g->r[i] - g->r[i - 1] : 0.0;
    const double hr = (i < M) ? g->r[i + 1] - g->r[i] : 0.0;
    g->w[i] = g->sigma(g->r[i]) * 0.5 * (hl + hr);
  }
  RadialFunction f(g, j.at("u").get<std::vector<double>>());
  if (j.contains("decay_tag")) f.decay_tag = j["decay_tag"].get<double>();
  return f;
}

// Least-squares exponential decay rate of a positive tail: fits log u ~ -c r
// on nodes where u is well inside the floating range. Returns nullopt when no
// usable window exists (e.g. compactly supported profiles).
inline std::optional<double> fit_decay_exponent(const RadialFunction& u,
                                                double r_min_frac = 0.25,
                                                double rel_lo = 1e-11,
                                                double rel_hi = 1e-2) {
  const double umax = u.max_abs();
  if (umax <= 0.0) return std::nullopt;
  std::vector<double> xs, ys;
  const double rmin = r_min_frac * u.grid->r_max();
  for (size_t i = 0; i + 1 < u.size(); ++i) {
    const double v = u.values[i];
    if (u.grid->r[i] < rmin) continue;
    if (v <= rel_lo * umax || v > rel_hi * umax) continue;
    xs.push_back(u.grid->r[i]);
    ys.push_back(std::log(v));
  }
  if (xs.size() < 8) return std::nullopt;
  return -num::fit_line(xs, ys).slope;
}

}  // namespace hypergs
