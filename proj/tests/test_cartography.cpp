#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hypergs/cartography.hpp"

using namespace hypergs;
using Catch::Approx;

TEST_CASE("existence detector verdicts") {
  SECTION("variational regime inside the window") {
    auto ev = exists_detector(ProblemParams(3, 3, 2, 0.5));
    CHECK(ev.found);
    CHECK(ev.residual < 1e-7);
    CHECK(ev.profile_max > 1e-4);
    REQUIRE(ev.decay_fit.has_value());
  }
  SECTION("below every existence window") {
    auto ev = exists_detector(ProblemParams(3, 2, 4, -0.5));
    CHECK_FALSE(ev.found);
  }
  SECTION("sublinear defocusing accepts any lambda") {
    auto ev = exists_detector(ProblemParams(3, 3, 0.5, -10.0));
    CHECK(ev.found);
    REQUIRE(ev.support_radius.has_value());
    CHECK(*ev.support_radius > 0.0);
  }
}

TEST_CASE("threshold bisection at the spectral top") {
  BisectOptions opts;
  opts.width_tol = 1e-2;
  auto map = threshold_bisect(3, 3.0, 2.0, {0.8, 1.2});
  CHECK(map.numeric_boundary == Approx(1.0).margin(0.02));
  CHECK(map.theory_boundary == 1.0);
  CHECK(std::abs(map.gap) < 0.02);
  CHECK(map.numeric_boundary > 0.8);
  CHECK(map.numeric_boundary < 1.2);
  // entries are sorted and every Found entry carries a small residual
  for (size_t i = 0; i + 1 < map.entries.size(); ++i)
    REQUIRE(map.entries[i].params.lambda <= map.entries[i + 1].params.lambda);
  for (const auto& e : map.entries)
    if (e.found) REQUIRE(e.evidence.residual < 1e-7);
  // no NotFound sandwiched between two Found entries along the lambda scan
  bool seen_found = false, closed = false;
  for (const auto& e : map.entries) {
    if (e.found) {
      REQUIRE_FALSE(closed);
      seen_found = true;
    } else if (seen_found) {
      closed = true;
    }
  }
}

TEST_CASE("uniform windows are rejected") {
  BisectOptions opts;
  opts.interior_scan = 4;
  CHECK_THROWS_AS(threshold_bisect(3, 3.0, 2.0, {1.2, 1.5}, BoundarySide::Auto, opts),
                  std::runtime_error);
}

TEST_CASE("config parsing") {
  nlohmann::json j = {
      {"dimension", 3},
      {"exponents", {{"p", 3.0}, {"q", 2.0}}},
      {"lambda_range", {0.8, 1.2}},
      {"grid", {{"r_max", 16.0}, {"nodes", 3200}}},
      {"solver", {{"tol", 1e-8}, {"method", "shooting"}}},
      {"sweep", {{"p_range", {3.0, 3.0, 1}}, {"q_range", {1.5, 2.0, 2}}}},
      {"parallelism", 2},
  };
  RunConfig c = RunConfig::from_json(j);
  CHECK(c.dimension == 3);
  CHECK(c.p == 3.0);
  CHECK(c.q == 2.0);
  CHECK(c.lambda_range.first == 0.8);
  CHECK(c.grid_nodes == 3200);
  CHECK(c.solver_method == "shooting");
  CHECK(c.parallelism == 2);
  auto echo = c.echo();
  CHECK(RunConfig::from_json(echo).echo() == echo);
  auto d = c.detector_options();
  CHECK_FALSE(d.try_nehari);
  CHECK(d.try_shooting);

  nlohmann::json bad = j;
  bad["solver"]["tol"] = -1.0;
  CHECK_THROWS_AS(RunConfig::from_json(bad), std::invalid_argument);
}

TEST_CASE("sweeps are deterministic and serializable") {
  RunConfig c;
  c.dimension = 3;
  c.sweep_p_range = {3.0, 3.0, 1};
  c.sweep_q_range = {1.5, 2.0, 2};
  c.lambda_range = {0.8, 1.2};
  c.parallelism = 2;
  c.solver_method = "shooting";

  auto r1 = sweep(c);
  auto r2 = sweep(c);
  REQUIRE(r1.pq.size() == 2);
  for (auto& e : r1.errors) CHECK(e.empty());

  nlohmann::json res1 = nlohmann::json::array(), res2 = nlohmann::json::array();
  for (auto& m : r1.maps) res1.push_back(to_json(m));
  for (auto& m : r2.maps) res2.push_back(to_json(m));
  auto doc1 = run_document(c, res1, "2026-01-01T00:00:00Z");
  auto doc2 = run_document(c, res2, "2026-01-02T12:34:56Z");
  // byte-identical payloads modulo the sidecar
  doc1.erase("sidecar");
  doc2.erase("sidecar");
  CHECK(doc1.dump() == doc2.dump());

  for (auto& m : r1.maps) {
    CHECK(std::abs(m.gap) < 0.05);
    CHECK(m.theory_boundary == 1.0);
  }

  const auto path = std::filesystem::temp_directory_path() / "hypergs_sweep.csv";
  sweep_to_csv(r1, path.string());
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "p,q,lambda_num,theory,gap");
  size_t rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("degenerate single-tuple sweep reduces to bisection") {
  RunConfig c;
  c.sweep_p_range = {3.0};
  c.sweep_q_range = {2.0};
  c.lambda_range = {0.8, 1.2};
  c.solver_method = "shooting";
  auto r = sweep(c);
  REQUIRE(r.pq.size() == 1);
  REQUIRE(r.errors[0].empty());
  auto direct = threshold_bisect(3, 3.0, 2.0, {0.8, 1.2});
  CHECK(r.maps[0].numeric_boundary == Approx(direct.numeric_boundary).margin(1e-12));
}
