#pragma once

// Orchestration: the existence detector, lambda-bisection for numeric
// thresholds, (p,q) sweeps with a work-stealing pool, run persistence and
// configuration.

#include <atomic>
#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hypergs/barriers.hpp"
#include "hypergs/closed_forms.hpp"
#include "hypergs/nehari.hpp"
#include "hypergs/pohozaev.hpp"
#include "hypergs/solvers.hpp"

#include "json.hpp"

namespace hypergs {

struct DetectorOptions {
  ShootingOptions shooting;
  double found_residual_tol = 1e-7;
  double min_profile_max = 1e-4;  // separates trivial drift from ground states
  bool try_barriers = true;
  bool try_shooting = true;
  bool try_nehari = true;
  double boundary_margin = 1e-2;  // retry window around theory boundaries
  int nehari_max_iter = 300;
};

struct DetectorEvidence {
  bool found = false;
  std::string method;  // "monotone", "shooting" or "nehari"
  double residual = std::numeric_limits<double>::infinity();
  double profile_max = 0.0;
  std::optional<double> decay_fit;
  std::optional<double> support_radius;
  std::string note;
};

namespace detail_carto {

inline std::optional<BarrierStrategy> strategy_for(const ProblemParams& pr) {
  const auto rc = classify_regime(pr);
  if (rc.verdict != Verdict::Exists) return std::nullopt;
  const double pc = critical_equation_exponent(pr.N);
  if (rc.exponent_order == ExponentOrder::PltQ) {
    const double lpq = lambda_pq(pr.p, pr.q).lambda_pq;
    if (pr.lambda >= 0.0) {
      if (pr.p < pc) return BarrierStrategy::A1;
      if (pr.N >= 4 && std::abs(pr.p - pc) < 1e-12) return BarrierStrategy::CritPos;
      return BarrierStrategy::A5_Supercrit;
    }
    if (std::abs(pr.lambda + lpq) < 1e-9) return BarrierStrategy::Thm10_Endpoint;
    if (pr.p < pc) return BarrierStrategy::A3_Interior;
    if (pr.N >= 4 && std::abs(pr.p - pc) < 1e-12) return BarrierStrategy::A4_CritNeg;
    return BarrierStrategy::A6_SupercritNeg;
  }
  if (rc.exponent_order == ExponentOrder::OneLtQltP && pr.N >= 4 &&
      std::abs(pr.p - pc) < 1e-12 && pr.lambda > pohozaev_threshold(pr.N) &&
      pr.lambda < lambda1(pr.N))
    return BarrierStrategy::C1_QltP_Crit;
  return std::nullopt;
}

inline bool decay_consistent(const ProblemParams& pr, const SolveReport& rep) {
  if (pr.q < 1.0) return rep.support_radius.has_value();
  if (!(pr.lambda < lambda1(pr.N))) return false;
  if (!rep.decay_fit) return false;
  const double c = decay_exponent(pr.N, pr.lambda);
  return std::abs(*rep.decay_fit - c) < 0.25 * c;
}

template <class F>
void parallel_for(size_t n, int threads, const F& f) {
  threads = std::max(1, threads);
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i; (i = next.fetch_add(1)) < n;) f(i);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

}  // namespace detail_carto

// Tries, in order: the regime's barrier pair driven through the monotone
// iteration, shooting with Newton refinement, and the variational route.
// Found demands a small residual, a non-trivial profile, and tail behavior
// consistent with the regime. Near a theory boundary a failed detection is
// retried on a doubled domain with a halved tolerance.
inline DetectorEvidence exists_detector(const ProblemParams& pr,
                                        const DetectorOptions& opts = {}) {
  DetectorEvidence ev;
  auto accept = [&](const char* method, const RadialFunction& u, double residual,
                    const SolveReport* rep) {
    if (residual >= opts.found_residual_tol) return false;
    if (u.max_abs() <= opts.min_profile_max) return false;
    if (rep && !detail_carto::decay_consistent(pr, *rep)) return false;
    ev.found = true;
    ev.method = method;
    ev.residual = residual;
    ev.profile_max = u.max_abs();
    if (rep) {
      ev.decay_fit = rep->decay_fit;
      ev.support_radius = rep->support_radius;
    }
    return true;
  };

  if (opts.try_barriers) {
    if (auto st = detail_carto::strategy_for(pr)) {
      try {
        BarrierPair bp = build_pair(pr, *st);
        if (bp.sub_ok && bp.super_ok && bp.ordering_ok) {
          const double K = default_shift_constant(pr, bp.super.max_abs());
          MonotoneOptions mo;
          mo.tol = opts.shooting.tol;
          SolveReport rep = monotone_iterate(bp.sub, bp.super, pr, K, mo);
          if (rep.converged &&
              accept("monotone", rep.solution, rep.final_residual, &rep))
            return ev;
        }
      } catch (const std::exception& e) {
        ev.note += std::string("barrier route: ") + e.what() + "; ";
      }
    }
  }

  auto shooting_attempt = [&](const ShootingOptions& so) {
    try {
      SolveReport rep = ground_state_by_shooting(pr, so);
      if (rep.converged && pr.q < 1.0 && !rep.support_radius) {
        auto probe = compact_support_probe(rep.solution, pr);
        if (probe.finite) rep.support_radius = probe.radius;
      }
      if (rep.converged)
        return accept("shooting", rep.solution, rep.final_residual, &rep);
    } catch (const std::exception& e) {
      ev.note += std::string("shooting route: ") + e.what() + "; ";
    }
    return false;
  };
  if (opts.try_shooting && shooting_attempt(opts.shooting)) return ev;

  if (opts.try_nehari && pr.q < pr.p) {
    try {
      const double pc = critical_equation_exponent(pr.N);
      MinimizeMode mode = (std::abs(pr.p - pc) < 1e-12)
                              ? MinimizeMode::CriticalViaApproximation
                              : MinimizeMode::Subcritical;
      if (pr.p <= pc + 1e-12 && (pr.q < 1.0 || pr.lambda < lambda1(pr.N))) {
        double R = opts.shooting.R_max > 0 ? opts.shooting.R_max
                                           : auto_r_max(pr.N, pr.lambda);
        auto g = std::make_shared<RadialGrid>(
            build_grid(pr.N, R, std::max(2000, int(R * 300))));
        auto init = sample_function(g, [](double r) { return std::exp(-r * r); });
        MinimizeOptions mo;
        mo.max_iter = opts.nehari_max_iter;
        mo.multi_start = false;
        MinimizeResult res = minimize(pr, init, mode, mo);
        const double residual = pde_residual(res.point.profile, pr).sup;
        if (accept("nehari", res.point.profile, residual, nullptr)) return ev;
      }
    } catch (const std::exception& e) {
      ev.note += std::string("nehari route: ") + e.what() + "; ";
    }
  }

  // near-boundary retry on a doubled domain with halved tolerance
  const auto rc = classify_regime(pr);
  const auto& w = rc.threshold_window;
  const bool near_boundary =
      !w.empty() && (std::abs(pr.lambda - w.lo) < opts.boundary_margin ||
                     std::abs(pr.lambda - w.hi) < opts.boundary_margin);
  if (near_boundary && opts.try_shooting) {
    ShootingOptions so = opts.shooting;
    so.R_max = (so.R_max > 0 ? so.R_max : auto_r_max(pr.N, pr.lambda)) * 2.0;
    so.M = (so.M > 0 ? so.M : int(so.R_max * 400)) * 2;
    so.tol *= 0.5;
    if (shooting_attempt(so)) {
      ev.note += "found on the boundary retry; ";
      return ev;
    }
    ev.note += "near-boundary retry exhausted; ";
  }
  return ev;
}

enum class ThresholdAxis { LambdaAtFixedPQ, PQGrid };
enum class BoundarySide { Auto, Lower, Upper };

struct ThresholdEntry {
  ProblemParams params;
  bool found = false;
  DetectorEvidence evidence;
};

struct ThresholdMap {
  ThresholdAxis axis = ThresholdAxis::LambdaAtFixedPQ;
  std::vector<ThresholdEntry> entries;
  double numeric_boundary = 0.0;
  double theory_boundary = 0.0;
  double gap = 0.0;
};

struct BisectOptions {
  double width_tol = 1e-2;
  int interior_scan = 30;
  DetectorOptions detector;
};

namespace detail_carto {
inline double nearest_theory_boundary(int N, double p, double q, double x) {
  std::vector<double> candidates{lambda1(N), pohozaev_threshold(N)};
  if (p < q) candidates.push_back(-lambda_pq(p, q).lambda_pq);
  double best = candidates.front();
  for (double c : candidates)
    if (std::abs(c - x) < std::abs(best - x)) best = c;
  return best;
}
}  // namespace detail_carto

// Bisects lambda on [window.first, window.second] to the configured width.
// When both endpoints agree, the interior is scanned for a verdict change
// first (side selects which change to refine when several appear); a fully
// uniform window is an error naming both endpoint verdicts.
inline ThresholdMap threshold_bisect(int N, double p, double q,
                                     std::pair<double, double> window,
                                     BoundarySide side = BoundarySide::Auto,
                                     const BisectOptions& opts = {}) {
  ThresholdMap map;
  map.axis = ThresholdAxis::LambdaAtFixedPQ;

  auto probe = [&](double lambda) {
    ProblemParams pr(N, p, q, lambda);
    ThresholdEntry e;
    e.params = pr;
    e.evidence = exists_detector(pr, opts.detector);
    e.found = e.evidence.found;
    map.entries.push_back(e);
    return e.found;
  };

  const bool f_lo = probe(window.first);
  const bool f_hi = probe(window.second);
  double lo = window.first, hi = window.second;
  bool lo_found = f_lo;
  if (f_lo == f_hi) {
    std::vector<std::pair<double, bool>> scan{{window.first, f_lo}};
    for (int i = 1; i <= opts.interior_scan; ++i) {
      const double x =
          window.first + (window.second - window.first) * i / (opts.interior_scan + 1.0);
      scan.emplace_back(x, probe(x));
    }
    scan.emplace_back(window.second, f_hi);
    std::vector<std::pair<double, double>> changes;
    for (size_t i = 0; i + 1 < scan.size(); ++i)
      if (scan[i].second != scan[i + 1].second)
        changes.emplace_back(scan[i].first, scan[i + 1].first);
    if (changes.empty())
      throw std::runtime_error(
          std::string("threshold_bisect: no verdict change in the window; both "
                      "endpoints are ") +
          (f_lo ? "Found" : "NotFound"));
    auto pick = changes.front();
    if (side == BoundarySide::Upper) pick = changes.back();
    lo = pick.first;
    hi = pick.second;
    lo_found = false;
    for (auto& s : scan)
      if (s.first == lo) lo_found = s.second;
  }

  while (hi - lo > opts.width_tol) {
    const double mid = 0.5 * (lo + hi);
    (probe(mid) == lo_found ? lo : hi) = mid;
  }
  map.numeric_boundary = 0.5 * (lo + hi);
  map.theory_boundary =
      detail_carto::nearest_theory_boundary(N, p, q, map.numeric_boundary);
  map.gap = map.numeric_boundary - map.theory_boundary;
  std::sort(map.entries.begin(), map.entries.end(),
            [](const ThresholdEntry& a, const ThresholdEntry& b) {
              return a.params.lambda < b.params.lambda;
            });
  return map;
}

// ------------------------------------------------------------- configuration

struct RunConfig {
  int dimension = 3;
  double p = 2.0, q = 4.0;
  std::optional<double> lambda;
  std::pair<double, double> lambda_range{-1.0, 0.0};
  double grid_r_max = 0.0;  // 0 = automatic
  int grid_nodes = 0;       // 0 = automatic
  double solver_tol = 1e-9;
  std::string solver_method = "auto";  // auto | shooting | nehari | monotone
  std::vector<double> sweep_p_range;   // {lo, hi, count}
  std::vector<double> sweep_q_range;
  int parallelism = 1;
  unsigned schedule_seed = 0;
  double bisect_tol = 1e-2;
  std::string side = "auto";

  static RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    c.dimension = j.value("dimension", 3);
    if (j.contains("exponents")) {
      c.p = j["exponents"].value("p", 2.0);
      c.q = j["exponents"].value("q", 4.0);
    }
    if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
    if (j.contains("lambda_range")) {
      auto v = j["lambda_range"].get<std::vector<double>>();
      if (v.size() != 2) throw std::invalid_argument("config: lambda_range needs [lo, hi]");
      c.lambda_range = {v[0], v[1]};
    }
    if (j.contains("grid")) {
      c.grid_r_max = j["grid"].value("r_max", 0.0);
      c.grid_nodes = j["grid"].value("nodes", 0);
    }
    if (j.contains("solver")) {
      c.solver_tol = j["solver"].value("tol", 1e-9);
      c.solver_method = j["solver"].value("method", std::string("auto"));
    }
    if (j.contains("sweep")) {
      if (j["sweep"].contains("p_range"))
        c.sweep_p_range = j["sweep"]["p_range"].get<std::vector<double>>();
      if (j["sweep"].contains("q_range"))
        c.sweep_q_range = j["sweep"]["q_range"].get<std::vector<double>>();
    }
    c.parallelism = j.value("parallelism", 1);
    c.schedule_seed = j.value("schedule_seed", 0u);
    c.bisect_tol = j.value("bisect_tol", 1e-2);
    c.side = j.value("side", std::string("auto"));
    if (!(c.solver_tol > 0.0)) throw std::invalid_argument("config: tolerances must be > 0");
    return c;
  }

  nlohmann::json echo() const {
    nlohmann::json j;
    j["dimension"] = dimension;
    j["exponents"] = {{"p", p}, {"q", q}};
    if (lambda) j["lambda"] = *lambda;
    j["lambda_range"] = {lambda_range.first, lambda_range.second};
    j["grid"] = {{"r_max", grid_r_max}, {"nodes", grid_nodes}};
    j["solver"] = {{"tol", solver_tol}, {"method", solver_method}};
    if (!sweep_p_range.empty() || !sweep_q_range.empty())
      j["sweep"] = {{"p_range", sweep_p_range}, {"q_range", sweep_q_range}};
    j["parallelism"] = parallelism;
    j["schedule_seed"] = schedule_seed;
    j["bisect_tol"] = bisect_tol;
    j["side"] = side;
    return j;
  }

  DetectorOptions detector_options() const {
    DetectorOptions d;
    d.shooting.R_max = grid_r_max;
    d.shooting.M = grid_nodes;
    d.shooting.tol = solver_tol;
    if (solver_method == "shooting") d.try_barriers = d.try_nehari = false;
    if (solver_method == "nehari") d.try_barriers = d.try_shooting = false;
    if (solver_method == "monotone") d.try_shooting = d.try_nehari = false;
    return d;
  }

  BoundarySide boundary_side() const {
    if (side == "lower") return BoundarySide::Lower;
    if (side == "upper") return BoundarySide::Upper;
    return BoundarySide::Auto;
  }
};

struct SweepResult {
  std::vector<ThresholdMap> maps;  // one per (p, q)
  std::vector<std::pair<double, double>> pq;
  std::vector<std::string> errors;  // per-entry failures, never aborts the sweep
};

inline std::vector<double> expand_range(const std::vector<double>& r, double fallback) {
  if (r.empty()) return {fallback};
  if (r.size() == 1) return {r[0]};
  const int n = r.size() > 2 ? std::max(1, int(r[2])) : 2;
  std::vector<double> out;
  for (int i = 0; i < n; ++i)
    out.push_back(n == 1 ? r[0] : r[0] + (r[1] - r[0]) * i / double(n - 1));
  return out;
}

// Detector/bisection over the (p, q) grid; independent tuples run on the
// pool and the output order is the deterministic grid order.
inline SweepResult sweep(const RunConfig& config) {
  SweepResult out;
  const auto ps = expand_range(config.sweep_p_range, config.p);
  const auto qs = expand_range(config.sweep_q_range, config.q);
  for (double p : ps)
    for (double q : qs)
      if (q != p && (p > 1.0) && q > 0.0 && q != 1.0) out.pq.emplace_back(p, q);
  out.maps.resize(out.pq.size());
  out.errors.assign(out.pq.size(), "");

  BisectOptions bo;
  bo.width_tol = config.bisect_tol;
  bo.detector = config.detector_options();

  detail_carto::parallel_for(out.pq.size(), config.parallelism, [&](size_t i) {
    try {
      out.maps[i] = threshold_bisect(config.dimension, out.pq[i].first, out.pq[i].second,
                                     config.lambda_range, config.boundary_side(), bo);
    } catch (const std::exception& e) {
      out.errors[i] = e.what();
    }
  });
  return out;
}

// ------------------------------------------------------------- persistence

inline nlohmann::json to_json(const DetectorEvidence& ev) {
  nlohmann::json j;
  j["found"] = ev.found;
  j["method"] = ev.method;
  j["residual"] = ev.residual;
  j["profile_max"] = ev.profile_max;
  if (ev.decay_fit) j["decay_fit"] = *ev.decay_fit;
  if (ev.support_radius) j["support_radius"] = *ev.support_radius;
  if (!ev.note.empty()) j["note"] = ev.note;
  return j;
}

inline nlohmann::json to_json(const ThresholdMap& map) {
  nlohmann::json j;
  j["axis"] = map.axis == ThresholdAxis::LambdaAtFixedPQ ? "lambda" : "pq";
  j["numeric_boundary"] = map.numeric_boundary;
  j["theory_boundary"] = map.theory_boundary;
  j["gap"] = map.gap;
  auto arr = nlohmann::json::array();
  for (const auto& e : map.entries)
    arr.push_back({{"lambda", e.params.lambda},
                   {"p", e.params.p},
                   {"q", e.params.q},
                   {"found", e.found},
                   {"evidence", to_json(e.evidence)}});
  j["entries"] = arr;
  return j;
}

// One JSON document per run; volatile metadata lives in the sidecar so the
// payload stays byte-diffable across reruns.
inline nlohmann::json run_document(const RunConfig& config, nlohmann::json results,
                                   const std::string& timestamp) {
  nlohmann::json doc;
  doc["config"] = config.echo();
  doc["results"] = std::move(results);
  doc["sidecar"] = {{"timestamp", timestamp}};
  return doc;
}

inline void sweep_to_csv(const SweepResult& res, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("sweep_to_csv: cannot open " + path);
  os.precision(17);
  os << "p,q,lambda_num,theory,gap\n";
  for (size_t i = 0; i < res.pq.size(); ++i) {
    if (!res.errors[i].empty()) continue;
    os << res.pq[i].first << "," << res.pq[i].second << ","
       << res.maps[i].numeric_boundary << "," << res.maps[i].theory_boundary << ","
       << res.maps[i].gap << "\n";
  }
}

}  // namespace hypergs
