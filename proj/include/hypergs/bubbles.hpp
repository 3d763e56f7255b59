#pragma once

// Interior and boundary concentration bubbles on the Euclidean unit ball:
// cutoffs, the four quadrature integrals entering the lifted energy, the
// Sobolev constant oracle, asymptotic-order fits in epsilon, and the
// energy-threshold check against S^{N/2}/N.

#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypergs/closed_forms.hpp"
#include "hypergs/geometry.hpp"
#include "hypergs/numerics.hpp"

#include "json.hpp"

namespace hypergs {

enum class BubbleKind { Interior, Boundary };

// The zeta(q) cutoff-width exponent used for boundary bubbles in dimension 5.
inline double boundary_zeta(double q) {
  if (!(q > 0.0 && q < 2.0 / 3.0))
    throw std::invalid_argument("boundary_zeta: requires 0 < q < 2/3");
  return 1.0 - 0.5 * (1.0 / 3.0 + 3.0 * (1.0 - q) / (4.0 * (2.0 - 3.0 * q)));
}

struct BubbleSpec {
  BubbleKind kind = BubbleKind::Interior;
  int N = 5;
  double epsilon = 1e-2;
  double rho_cutoff = 0.25;  // interior: fixed cutoff radius < 1/3
  double zeta = 0.0;         // boundary: cutoff width exponent
  double gamma_b = 0.0;      // boundary: distance exponent, 0 < gamma_b < zeta
  double q = 0.5;
  double lambda = 0.0;

  void validate() const {
    if (N < 3) throw std::invalid_argument("BubbleSpec: N must be >= 3");
    if (!(epsilon > 0.0)) throw std::invalid_argument("BubbleSpec: epsilon must be > 0");
    if (kind == BubbleKind::Interior) {
      if (!(rho_cutoff > 0.0 && rho_cutoff < 1.0 / 3.0))
        throw std::invalid_argument("BubbleSpec: interior cutoff requires rho < 1/3");
    } else {
      if (!(gamma_b > 0.0 && gamma_b < zeta && zeta < 1.0))
        throw std::invalid_argument("BubbleSpec: boundary requires 0 < gamma < zeta < 1");
      const double margin =
          1.0 - std::pow(epsilon, gamma_b) - 2.0 * std::pow(epsilon, zeta);
      if (!(margin > 0.0))
        throw std::invalid_argument("BubbleSpec: epsilon too large for the boundary layout");
    }
  }
};

// Cut-off concentration profile, radial about its center.
struct Bubble {
  int N = 5;
  double eps = 1e-2;
  double center_norm = 0.0;    // |x_eps|; 0 for interior bubbles
  double cut_inner = 0.0;      // cutoff is 1 inside this radius
  double cut_outer = 0.0;      // and 0 beyond this one
  double normalization = 1.0;  // (N(N-2))^((N-2)/4)

  double profile(double t) const {
    return normalization * std::pow(eps / (eps * eps + t * t), 0.5 * (N - 2));
  }
  double dprofile(double t) const {
    return -(N - 2) * t / (eps * eps + t * t) * profile(t);
  }
  double cutoff(double t) const {
    return 1.0 - num::smoothstep5((t - cut_inner) / (cut_outer - cut_inner));
  }
  double dcutoff(double t) const {
    return -num::smoothstep5_deriv((t - cut_inner) / (cut_outer - cut_inner)) /
           (cut_outer - cut_inner);
  }
  double value(double t) const { return cutoff(t) * profile(t); }
  double dvalue(double t) const {
    return dcutoff(t) * profile(t) + cutoff(t) * dprofile(t);
  }
};

inline Bubble make_bubble(const BubbleSpec& spec) {
  spec.validate();
  Bubble b;
  b.N = spec.N;
  b.eps = spec.epsilon;
  b.normalization = std::pow(double(spec.N) * (spec.N - 2), 0.25 * (spec.N - 2));
  if (spec.kind == BubbleKind::Interior) {
    b.center_norm = 0.0;
    b.cut_inner = spec.rho_cutoff;
    b.cut_outer = 2.0 * spec.rho_cutoff;
  } else {
    const double cw = std::pow(spec.epsilon, spec.zeta);
    b.center_norm = 1.0 - std::pow(spec.epsilon, spec.gamma_b) - 2.0 * cw;
    b.cut_inner = cw;
    b.cut_outer = 2.0 * cw;
  }
  return b;
}

namespace detail_bubble {

// two-pass quadrature: crude scale estimate, then a relative-tolerance run
template <class F>
double integrate_rel(const F& f, double a, double b, double rel = 1e-9, int panels = 48) {
  const double crude = num::integrate_adaptive(f, a, b, 1e-6, 40, panels);
  const double tol = std::max(std::abs(crude) * rel, 1e-300);
  return num::integrate_adaptive(f, a, b, tol, 48, panels);
}

// angular average over the unit sphere of W(|x_center + t omega|), reduced to
// the polar angle; 96-point Gauss-Legendre
template <class W>
double angular_average(int N, double center, double t, const W& w) {
  static thread_local std::vector<double> gx, gw;
  if (gx.empty()) num::gauss_legendre(96, gx, gw);
  const double wN2 = sphere_area(N - 1);  // area of S^{N-2}
  double acc = 0.0;
  for (size_t k = 0; k < gx.size(); ++k) {
    const double theta = 0.5 * M_PI * (gx[k] + 1.0);
    const double s2 = center * center + t * t + 2.0 * center * t * std::cos(theta);
    const double s = std::sqrt(std::max(s2, 0.0));
    acc += gw[k] * std::pow(std::sin(theta), N - 2) * w(s);
  }
  return wN2 * acc * 0.5 * M_PI;
}

}  // namespace detail_bubble

// S^{N/2} as the full-space gradient mass of the unit bubble: quadrature on
// dyadic blocks with the power-law tail integrated until negligible.
inline double sobolev_level(int N) {
  if (N < 3) throw std::invalid_argument("sobolev_level: N must be >= 3");
  static std::map<int, double> cache;
  static std::mutex mtx;
  {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(N);
    if (it != cache.end()) return it->second;
  }
  BubbleSpec spec;
  spec.N = N;
  spec.epsilon = 1.0;
  spec.rho_cutoff = 0.3;
  Bubble b = make_bubble(spec);
  auto integrand = [&](double t) {
    const double du = b.dprofile(t);
    return du * du * std::pow(t, N - 1);
  };
  const double level =
      sphere_area(N) * num::integrate_to_infinity(integrand, 0.0, 1.0, 1e-13, 1e-13);
  std::lock_guard<std::mutex> lock(mtx);
  cache[N] = level;
  return level;
}

inline double sobolev_constant(int N) { return std::pow(sobolev_level(N), 2.0 / N); }

struct BubbleIntegrals {
  double grad2 = 0.0;        // int |grad v_eps|^2
  double lp2star = 0.0;      // int v_eps^{2*}
  double l2 = 0.0;           // int h^2 v_eps^2
  double weighted_lq = 0.0;  // int h^beta v_eps^{q+1}
  double grad2_dev = 0.0;    // S^{N/2} - grad2, computed stably
  double lp2star_dev = 0.0;  // S^{N/2} - lp2star, computed stably
};

inline BubbleIntegrals bubble_integrals(const BubbleSpec& spec) {
  spec.validate();
  const int N = spec.N;
  Bubble b = make_bubble(spec);
  const double omega = sphere_area(N);
  const double level = sobolev_level(N);
  const double p2s = critical_exponent(N);
  const double beta = conformal_exponents(N, 2.0, spec.q, 0.0).beta;

  BubbleIntegrals out;

  // gradient and critical-mass deviations: integrands live on t >= cut_inner
  out.grad2_dev =
      omega * num::integrate_to_infinity(
                  [&](double t) {
                    const double du = b.dprofile(t);
                    const double dv = b.dvalue(t);
                    return (du * du - dv * dv) * std::pow(t, N - 1);
                  },
                  b.cut_inner, std::max(b.cut_inner, 0.1), 1e-13, 1e-13);
  out.grad2 = level - out.grad2_dev;

  out.lp2star_dev =
      omega * num::integrate_to_infinity(
                  [&](double t) {
                    const double u = b.profile(t), v = b.value(t);
                    return (std::pow(u, p2s) - std::pow(v, p2s)) * std::pow(t, N - 1);
                  },
                  b.cut_inner, std::max(b.cut_inner, 0.1), 1e-13, 1e-13);
  out.lp2star = level - out.lp2star_dev;

  if (spec.kind == BubbleKind::Interior) {
    // the conformal weights are radial about the same center
    out.l2 = omega * detail_bubble::integrate_rel(
                         [&](double t) {
                           const double v = b.value(t);
                           const double h = conformal_factor(t);
                           return h * h * v * v * std::pow(t, N - 1);
                         },
                         0.0, b.cut_outer);
    out.weighted_lq = omega * detail_bubble::integrate_rel(
                                  [&](double t) {
                                    const double v = b.value(t);
                                    const double h = conformal_factor(t);
                                    return std::pow(h, beta) * std::pow(v, spec.q + 1.0) *
                                           std::pow(t, N - 1);
                                  },
                                  0.0, b.cut_outer);
  } else {
    auto h2 = [](double s) {
      const double h = 2.0 / (1.0 - s * s);
      return h * h;
    };
    auto hb = [beta](double s) { return std::pow(2.0 / (1.0 - s * s), beta); };
    out.l2 = detail_bubble::integrate_rel(
        [&](double t) {
          const double v = b.value(t);
          return v * v * std::pow(t, N - 1) *
                 detail_bubble::angular_average(N, b.center_norm, t, h2);
        },
        0.0, b.cut_outer, 1e-9, 64);
    out.weighted_lq = detail_bubble::integrate_rel(
        [&](double t) {
          const double v = b.value(t);
          return std::pow(v, spec.q + 1.0) * std::pow(t, N - 1) *
                 detail_bubble::angular_average(N, b.center_norm, t, hb);
        },
        0.0, b.cut_outer, 1e-9, 64);
  }
  return out;
}

struct BubbleEstimate {
  BubbleSpec spec_template;
  std::vector<double> epsilons;  // strictly decreasing
  std::map<std::string, std::vector<double>> integrals;

  void validate() const {
    if (epsilons.size() < 6)
      throw std::invalid_argument("BubbleEstimate: need >= 6 schedule points");
    for (size_t i = 0; i + 1 < epsilons.size(); ++i)
      if (epsilons[i + 1] >= epsilons[i])
        throw std::invalid_argument("BubbleEstimate: schedule must decrease");
    if (epsilons.front() / epsilons.back() < 100.0)
      throw std::invalid_argument("BubbleEstimate: schedule must span two decades");
  }
};

inline std::vector<double> default_epsilon_schedule() {
  return {1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3};
}

// Evaluates the four integrals over the schedule; the points are independent
// and run concurrently, merged in schedule order.
inline BubbleEstimate bubble_scan(BubbleSpec spec,
                                  std::vector<double> epsilons = default_epsilon_schedule()) {
  BubbleEstimate est;
  est.spec_template = spec;
  est.epsilons = std::move(epsilons);
  est.validate();
  sobolev_level(spec.N);  // warm the cache before going parallel

  std::vector<std::future<BubbleIntegrals>> jobs;
  for (double e : est.epsilons)
    jobs.push_back(std::async(std::launch::async, [spec, e]() {
      BubbleSpec s = spec;
      s.epsilon = e;
      return bubble_integrals(s);
    }));
  for (auto& j : jobs) {
    BubbleIntegrals v = j.get();
    est.integrals["grad2"].push_back(v.grad2);
    est.integrals["lp2star"].push_back(v.lp2star);
    est.integrals["l2"].push_back(v.l2);
    est.integrals["weighted_lq"].push_back(v.weighted_lq);
    est.integrals["grad2_dev"].push_back(v.grad2_dev);
    est.integrals["lp2star_dev"].push_back(v.lp2star_dev);
  }
  return est;
}

struct OrderFit {
  double slope = 0.0;
  bool log_factor = false;
};

// Log-log slope of the named integral (deviation from S^{N/2} for the two
// critical masses); the two largest schedule points are dropped. The log
// factor is decided by residual comparison of the models with and without a
// |log eps| multiplier.
inline OrderFit fit_order(const BubbleEstimate& est, const std::string& name) {
  est.validate();
  std::string key = name;
  if (name == "grad2") key = "grad2_dev";
  if (name == "lp2star") key = "lp2star_dev";
  auto it = est.integrals.find(key);
  if (it == est.integrals.end())
    throw std::invalid_argument("fit_order: unknown integral " + name);
  std::vector<double> xs, ys, ys_nolog;
  for (size_t i = 2; i < est.epsilons.size(); ++i) {
    const double v = std::abs(it->second[i]);
    if (v <= 0.0) throw std::runtime_error("fit_order: degenerate (zero) data point");
    const double le = std::log(est.epsilons[i]);
    xs.push_back(le);
    ys.push_back(std::log(v));
    ys_nolog.push_back(std::log(v) - std::log(std::abs(le)));
  }
  auto plain = num::fit_line(xs, ys);
  auto logged = num::fit_line(xs, ys_nolog);
  OrderFit fit;
  // a genuine |log eps| factor beats the plain model by orders of magnitude;
  // demand a clear win so smooth correction terms cannot fake it
  fit.log_factor = logged.ss_residual < 0.25 * plain.ss_residual;
  fit.slope = fit.log_factor ? logged.slope : plain.slope;
  return fit;
}

struct ThresholdCheck {
  double energy = 0.0;
  double threshold = 0.0;  // S^{N/2}/N
  bool below_threshold = false;
  double t_eps = 0.0;
  BubbleIntegrals integrals;
};

// Projects the lifted functional onto the bubble fiber and compares
// J~(t_eps v_eps) with the compactness threshold.
inline ThresholdCheck energy_threshold_check(const BubbleSpec& spec,
                                             const ProblemParams& pr) {
  spec.validate();
  if (!(pr.q < 1.0))
    throw std::invalid_argument("energy_threshold_check: requires q < 1");
  const int N = spec.N;
  const double p2s = critical_exponent(N);
  const double lt = conformal_exponents(N, pr.p, pr.q, pr.lambda).lambda_tilde;

  ThresholdCheck out;
  out.integrals = bubble_integrals(spec);
  const double A = out.integrals.grad2 - lt * out.integrals.l2;
  const double B = out.integrals.lp2star;
  const double C = out.integrals.weighted_lq;
  if (!(A > 0.0) || !(B > 0.0))
    throw std::runtime_error("energy_threshold_check: degenerate fiber coefficients");

  auto psi = [&](double t) {
    return A - std::pow(t, p2s - 2.0) * B + std::pow(t, pr.q - 1.0) * C;
  };
  double lo = 1.0, hi = 1.0;
  if (psi(1.0) > 0.0) {
    hi = 2.0;
    while (psi(hi) > 0.0 && hi < 1e8) hi *= 2.0;
    lo = 0.5 * hi;
  } else {
    lo = 0.5;
    while (psi(lo) <= 0.0 && lo > 1e-8) lo *= 0.5;
    hi = 2.0 * lo;
  }
  if (!(psi(lo) > 0.0 && psi(hi) <= 0.0))
    throw std::runtime_error("energy_threshold_check: fiber projection bracket failed");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (psi(mid) > 0.0 ? lo : hi) = mid;
  }
  out.t_eps = 0.5 * (lo + hi);

  const double t = out.t_eps;
  out.energy = 0.5 * t * t * A - std::pow(t, p2s) / p2s * B +
               std::pow(t, pr.q + 1.0) / (pr.q + 1.0) * C;
  out.threshold = sobolev_level(N) / N;
  out.below_threshold = out.energy < out.threshold;
  return out;
}

inline void to_csv(const BubbleEstimate& est, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("to_csv: cannot open " + path);
  os.precision(17);
  os << "epsilon,grad2,lp2star,l2,weighted_lq\n";
  for (size_t i = 0; i < est.epsilons.size(); ++i)
    os << est.epsilons[i] << "," << est.integrals.at("grad2")[i] << ","
       << est.integrals.at("lp2star")[i] << "," << est.integrals.at("l2")[i] << ","
       << est.integrals.at("weighted_lq")[i] << "\n";
}

inline nlohmann::json fit_summary_json(const BubbleEstimate& est) {
  nlohmann::json j;
  j["kind"] = est.spec_template.kind == BubbleKind::Interior ? "interior" : "boundary";
  j["dimension"] = est.spec_template.N;
  j["epsilons"] = est.epsilons;
  for (const std::string name : {"grad2", "lp2star", "l2", "weighted_lq"}) {
    auto f = fit_order(est, name);
    j["fits"][name] = {{"slope", f.slope}, {"log_factor", f.log_factor}};
  }
  return j;
}

}  // namespace hypergs
