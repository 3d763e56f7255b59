// Command-line driver: every subcommand reads one JSON config file and
// writes its artifacts (JSON documents, CSV tables) into the output
// directory. Exit codes: 0 success, 2 verdict-contradiction flags, 1 errors.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "hypergs/hypergs.hpp"

using namespace hypergs;
namespace fs = std::filesystem;

namespace {

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  nlohmann::json j;
  is >> j;
  return j;
}

void write_json(const fs::path& out, const std::string& name, const nlohmann::json& j) {
  fs::create_directories(out);
  std::ofstream os(out / name);
  os << j.dump(2) << "\n";
}

ProblemParams params_from(const RunConfig& c) {
  return ProblemParams(c.dimension, c.p, c.q, c.lambda.value_or(0.0));
}

BarrierStrategy strategy_from(const std::string& name) {
  for (BarrierStrategy s :
       {BarrierStrategy::A1, BarrierStrategy::CritPos, BarrierStrategy::A2_SmallNeg,
        BarrierStrategy::Thm10_Endpoint, BarrierStrategy::A3_Interior,
        BarrierStrategy::A4_CritNeg, BarrierStrategy::CritEndpoint,
        BarrierStrategy::A5_Supercrit, BarrierStrategy::A6_SupercritNeg,
        BarrierStrategy::C1_QltP_Crit, BarrierStrategy::CompactSupport})
    if (name == to_string(s)) return s;
  throw std::runtime_error("unknown barrier strategy: " + name);
}

nlohmann::json solve_report_json(const SolveReport& rep) {
  nlohmann::json j;
  j["converged"] = rep.converged;
  j["method"] = to_string(rep.method);
  j["iterations"] = rep.iterations;
  j["final_residual"] = rep.final_residual;
  j["wall_time_seconds"] = rep.wall_time_seconds;
  if (rep.decay_fit) j["decay_fit"] = *rep.decay_fit;
  if (rep.support_radius) j["support_radius"] = *rep.support_radius;
  j["domain_drift"] = rep.domain_drift;
  if (!rep.note.empty()) j["note"] = rep.note;
  return j;
}

int cmd_constants(const RunConfig& c, const fs::path& out) {
  ProblemParams pr = params_from(c);
  nlohmann::json j;
  j["dimension"] = pr.N;
  j["lambda1"] = lambda1(pr.N);
  j["critical_exponent_2star"] = critical_exponent(pr.N);
  j["critical_equation_exponent"] = critical_equation_exponent(pr.N);
  j["pohozaev_threshold"] = pohozaev_threshold(pr.N);
  if (pr.p < pr.q && pr.p > 1.0) {
    auto [lpq, tpq] = lambda_pq(pr.p, pr.q);
    j["lambda_pq"] = lpq;
    j["t_pq"] = tpq;
  }
  if (pr.lambda <= lambda1(pr.N)) j["decay_exponent"] = decay_exponent(pr.N, pr.lambda);
  const auto ce = conformal_exponents(pr.N, pr.p, pr.q, pr.lambda);
  j["conformal"] = {{"lambda_tilde", ce.lambda_tilde}, {"alpha", ce.alpha}, {"beta", ce.beta}};
  const auto rc = classify_regime(pr);
  j["regime"] = {{"exponent_order", to_string(rc.exponent_order)},
                 {"p_criticality", to_string(rc.p_criticality)},
                 {"verdict", to_string(rc.verdict)}};
  if (!rc.threshold_window.empty())
    j["exists_window"] = {{"lo", rc.threshold_window.lo},
                          {"hi", rc.threshold_window.hi},
                          {"lo_closed", rc.threshold_window.lo_closed},
                          {"hi_closed", rc.threshold_window.hi_closed}};

  std::printf("constants for N=%d, p=%g, q=%g, lambda=%g\n", pr.N, pr.p, pr.q, pr.lambda);
  std::printf("  %-28s %.12g\n", "lambda1", lambda1(pr.N));
  std::printf("  %-28s %.12g\n", "2*", critical_exponent(pr.N));
  std::printf("  %-28s %.12g\n", "2*-1", critical_equation_exponent(pr.N));
  std::printf("  %-28s %.12g\n", "N(N-2)/4", pohozaev_threshold(pr.N));
  if (j.contains("lambda_pq")) {
    std::printf("  %-28s %.12g\n", "lambda_pq", j["lambda_pq"].get<double>());
    std::printf("  %-28s %.12g\n", "t_pq", j["t_pq"].get<double>());
  }
  if (j.contains("decay_exponent"))
    std::printf("  %-28s %.12g\n", "c(N,lambda)", j["decay_exponent"].get<double>());
  std::printf("  %-28s %.12g\n", "lambda_tilde", ce.lambda_tilde);
  std::printf("  %-28s %.12g\n", "alpha", ce.alpha);
  std::printf("  %-28s %.12g\n", "beta", ce.beta);
  std::printf("  %-28s %s\n", "verdict", to_string(rc.verdict));
  write_json(out, "constants.json", run_document(c, j, timestamp_utc()));
  return 0;
}

int cmd_solve(const RunConfig& c, const fs::path& out) {
  ProblemParams pr = params_from(c);
  ShootingOptions so;
  so.R_max = c.grid_r_max;
  so.M = c.grid_nodes;
  so.tol = c.solver_tol;
  SolveReport rep;
  if (c.solver_method == "nehari") {
    double R = so.R_max > 0 ? so.R_max : auto_r_max(pr.N, pr.lambda);
    auto g = std::make_shared<RadialGrid>(
        build_grid(pr.N, R, so.M > 0 ? so.M : int(R * 400)));
    auto init = sample_function(g, [](double r) { return std::exp(-r * r); });
    auto res = minimize(pr, init,
                        classify_criticality(pr.N, pr.p) == Criticality::Critical
                            ? MinimizeMode::CriticalViaApproximation
                            : MinimizeMode::Subcritical);
    rep.solution = res.point.profile;
    rep.method = SolveMethod::Newton;
    rep.final_residual = pde_residual(rep.solution, pr).sup;
    rep.converged = rep.final_residual < 10 * c.solver_tol * (1.0 + rep.solution.max_abs());
  } else {
    rep = ground_state_by_shooting(pr, so);
  }
  nlohmann::json j = solve_report_json(rep);
  j["profile_csv"] = "profile.csv";
  write_json(out, "solve.json", run_document(c, j, timestamp_utc()));
  if (!rep.solution.values.empty()) {
    to_csv(rep.solution, (out / "profile.csv").string());
    write_json(out, "profile.json", to_json(rep.solution));
  }
  std::printf("solve: converged=%d residual=%.3e\n", rep.converged ? 1 : 0,
              rep.final_residual);
  return rep.converged ? 0 : 2;
}

int cmd_barrier_verify(const RunConfig& c, const nlohmann::json& raw, const fs::path& out) {
  ProblemParams pr = params_from(c);
  const std::string name = raw.value("strategy", "A1");
  BarrierPair bp = build_pair(pr, strategy_from(name));
  write_json(out, "barrier.json", run_document(c, to_json(bp), timestamp_utc()));
  std::printf("barrier %s: sub_ok=%d super_ok=%d ordering_ok=%d\n", name.c_str(),
              bp.sub_ok ? 1 : 0, bp.super_ok ? 1 : 0, bp.ordering_ok ? 1 : 0);
  return (bp.sub_ok && bp.super_ok && bp.ordering_ok) ? 0 : 2;
}

int cmd_nehari_min(const RunConfig& c, const fs::path& out) {
  ProblemParams pr = params_from(c);
  double R = c.grid_r_max > 0 ? c.grid_r_max : auto_r_max(pr.N, pr.lambda);
  auto g = std::make_shared<RadialGrid>(
      build_grid(pr.N, R, c.grid_nodes > 0 ? c.grid_nodes : int(R * 400)));
  auto init = sample_function(g, [](double r) { return std::exp(-r * r); });
  auto res = minimize(pr, init,
                      classify_criticality(pr.N, pr.p) == Criticality::Critical
                          ? MinimizeMode::CriticalViaApproximation
                          : MinimizeMode::Subcritical);
  nlohmann::json j = to_json(res.point);
  j["m_pq"] = res.m_pq;
  j["compactness_warning"] = res.compactness_warning;
  write_json(out, "nehari.json", run_document(c, j, timestamp_utc()));
  to_csv(res.point.profile, (out / "nehari_profile.csv").string());
  std::printf("nehari: m_pq=%.10g energy=%.10g t=%.6g\n", res.m_pq, res.point.energy,
              res.point.t_projection);
  return res.compactness_warning ? 2 : 0;
}

int cmd_bubble_scan(const RunConfig& c, const nlohmann::json& raw, const fs::path& out) {
  BubbleSpec spec;
  const auto b = raw.value("bubble", nlohmann::json::object());
  spec.kind = b.value("kind", std::string("interior")) == "boundary"
                  ? BubbleKind::Boundary
                  : BubbleKind::Interior;
  spec.N = c.dimension;
  spec.q = b.value("q", c.q);
  spec.lambda = b.value("lambda", c.lambda.value_or(0.0));
  spec.rho_cutoff = b.value("rho", 0.25);
  if (spec.kind == BubbleKind::Boundary) {
    spec.gamma_b = b.value("gamma", 0.5);
    spec.zeta = b.value("zeta", boundary_zeta(spec.q));
  }
  auto schedule = b.value("schedule", default_epsilon_schedule());
  auto est = bubble_scan(spec, schedule);
  to_csv(est, (out / "bubble_scan.csv").string());
  write_json(out, "bubble_fits.json", run_document(c, fit_summary_json(est), timestamp_utc()));
  std::printf("bubble-scan: %zu schedule points written\n", est.epsilons.size());
  return 0;
}

int cmd_pohozaev_check(const RunConfig& c, const nlohmann::json& raw, const fs::path& out) {
  ProblemParams pr = params_from(c);
  nlohmann::json results;
  int code = 0;
  RadialFunction u;
  if (raw.contains("profile")) {
    std::ifstream is(raw["profile"].get<std::string>());
    if (!is) throw std::runtime_error("cannot open profile file");
    nlohmann::json pj;
    is >> pj;
    u = radial_function_from_json(pj);
  } else {
    ShootingOptions so;
    so.R_max = c.grid_r_max;
    so.M = c.grid_nodes;
    so.tol = c.solver_tol;
    auto rep = ground_state_by_shooting(pr, so);
    if (!rep.converged) {
      results["solve"] = solve_report_json(rep);
      auto ne = nonexistence_evidence(pr);
      results["nonexistence"] = to_json(ne);
      if (ne.contradiction) code = 2;
      write_json(out, "pohozaev.json", run_document(c, results, timestamp_utc()));
      std::printf("pohozaev-check: no solution found; sweep decays_found=%d\n",
                  ne.decays_found ? 1 : 0);
      return code;
    }
    u = rep.solution;
    results["solve"] = solve_report_json(rep);
  }
  const auto variant = std::abs(pr.lambda - pohozaev_threshold(pr.N)) < 1e-12
                           ? PohozaevVariant::CriticalLambda
                           : PohozaevVariant::Interior;
  auto pz = pohozaev_residual(u, pr, variant);
  results["identity"] = to_json(pz);
  write_json(out, "pohozaev.json", run_document(c, results, timestamp_utc()));
  std::printf("pohozaev-check: relative residual %.3e\n", std::abs(pz.residual) / pz.scale);
  return code;
}

int cmd_threshold_map(const RunConfig& c, const fs::path& out) {
  BisectOptions bo;
  bo.width_tol = c.bisect_tol;
  bo.detector = c.detector_options();
  auto map = threshold_bisect(c.dimension, c.p, c.q, c.lambda_range, c.boundary_side(), bo);
  write_json(out, "threshold.json", run_document(c, to_json(map), timestamp_utc()));
  std::printf("threshold-map: numeric=%.6f theory=%.6f gap=%+.6f\n", map.numeric_boundary,
              map.theory_boundary, map.gap);
  return 0;
}

int cmd_sweep(const RunConfig& c, const fs::path& out) {
  auto res = sweep(c);
  nlohmann::json arr = nlohmann::json::array();
  bool any_error = false;
  for (size_t i = 0; i < res.pq.size(); ++i) {
    nlohmann::json e;
    e["p"] = res.pq[i].first;
    e["q"] = res.pq[i].second;
    if (res.errors[i].empty())
      e["map"] = to_json(res.maps[i]);
    else {
      e["error"] = res.errors[i];
      any_error = true;
    }
    arr.push_back(e);
  }
  write_json(out, "sweep.json", run_document(c, arr, timestamp_utc()));
  sweep_to_csv(res, (out / "sweep.csv").string());
  std::printf("sweep: %zu tuples, %s\n", res.pq.size(),
              any_error ? "with per-entry errors" : "all clean");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground states of a double-power scalar field equation on the Poincare ball"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  for (const char* name : {"constants", "solve", "barrier-verify", "nehari-min",
                           "bubble-scan", "pohozaev-check", "threshold-map", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--out", out_dir, "output directory");
  }

  CLI11_PARSE(app, argc, argv);
  try {
    nlohmann::json raw = load_config(config_path);
    RunConfig cfg = RunConfig::from_json(raw);
    const fs::path out(out_dir);
    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "constants") return cmd_constants(cfg, out);
    if (sub == "solve") return cmd_solve(cfg, out);
    if (sub == "barrier-verify") return cmd_barrier_verify(cfg, raw, out);
    if (sub == "nehari-min") return cmd_nehari_min(cfg, out);
    if (sub == "bubble-scan") return cmd_bubble_scan(cfg, raw, out);
    if (sub == "pohozaev-check") return cmd_pohozaev_check(cfg, raw, out);
    if (sub == "threshold-map") return cmd_threshold_map(cfg, out);
    if (sub == "sweep") return cmd_sweep(cfg, out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
