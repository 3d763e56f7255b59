#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hypergs/barriers.hpp"

using namespace hypergs;
using Catch::Approx;

namespace {
void check_pair(const ProblemParams& pr, BarrierStrategy st) {
  CAPTURE(to_string(st), pr.N, pr.p, pr.q, pr.lambda);
  BarrierPair bp = build_pair(pr, st);
  CHECK(bp.sub_ok);
  CHECK(bp.super_ok);
  CHECK(bp.ordering_ok);
  auto vs = verify_barrier(bp.sub, pr, BarrierSide::Sub, bp.kink_radii);
  auto vp = verify_barrier(bp.super, pr, BarrierSide::Super, bp.kink_radii);
  CHECK(vs.ok);
  CHECK(vp.ok);
}
}  // namespace

TEST_CASE("every strategy builds and verifies on an in-window tuple") {
  const double lpq24 = lambda_pq(2, 4).lambda_pq;
  check_pair({3, 2, 4, 0.5}, BarrierStrategy::A1);
  check_pair({4, 3, 4, 0.5}, BarrierStrategy::CritPos);
  check_pair({3, 2, 4, -0.2}, BarrierStrategy::A2_SmallNeg);
  check_pair({3, 2, 4, -lpq24}, BarrierStrategy::Thm10_Endpoint);
  check_pair({3, 2, 4, -0.2}, BarrierStrategy::A3_Interior);
  check_pair({4, 3, 4, -0.10}, BarrierStrategy::A4_CritNeg);
  check_pair({4, 3, 4, -0.14}, BarrierStrategy::CritEndpoint);
  check_pair({3, 5, 6, 0.5}, BarrierStrategy::A5_Supercrit);
  check_pair({3, 5, 6, -0.05}, BarrierStrategy::A6_SupercritNeg);
  check_pair({4, 3, 2, 2.2}, BarrierStrategy::C1_QltP_Crit);
  check_pair({3, 3, 0.5, 0.0}, BarrierStrategy::CompactSupport);
}

TEST_CASE("hypothesis gates reject out-of-window parameters") {
  CHECK_THROWS_AS(build_pair({3, 2, 4, 1.5}, BarrierStrategy::A1), std::invalid_argument);
  CHECK_THROWS_AS(build_pair({3, 2, 4, -0.5}, BarrierStrategy::A1), std::invalid_argument);
  CHECK_THROWS_AS(build_pair({3, 3, 2, 0.0}, BarrierStrategy::A1), std::invalid_argument);
  CHECK_THROWS_AS(build_pair({3, 5, 6, 0.5}, BarrierStrategy::A1), std::invalid_argument);
  CHECK_THROWS_AS(build_pair({3, 2, 4, 0.5}, BarrierStrategy::CompactSupport),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_pair({3, 3, 4, -0.11}, BarrierStrategy::CritPos),
                  std::invalid_argument);
}

TEST_CASE("A2 feasibility boundary") {
  const double lpq = lambda_pq(2, 4).lambda_pq;
  SECTION("graceful failure below -lambda_pq") {
    try {
      build_pair({3, 2, 4, -lpq - 0.05}, BarrierStrategy::A2_SmallNeg);
      FAIL("expected an infeasibility error");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("unsolvable") != std::string::npos);
    }
  }
  SECTION("succeeds across the negative window") {
    for (double frac : {0.15, 0.4, 0.65, 0.9}) {
      ProblemParams pr(3, 2, 4, -frac * lpq);
      CAPTURE(frac);
      BarrierPair bp = build_pair(pr, BarrierStrategy::A2_SmallNeg);
      CHECK(bp.sub_ok);
      CHECK(bp.super_ok);
      CHECK(bp.ordering_ok);
    }
  }
}

TEST_CASE("verify_barrier on closed-form candidates") {
  auto g = std::make_shared<RadialGrid>(build_grid(3, 12.0, 2000));
  SECTION("constant equilibrium is both a sub and a super") {
    auto [lpq, tpq] = lambda_pq(2, 4);
    ProblemParams pr(3, 2, 4, -lpq);
    auto c = constant_function(g, tpq);
    auto v1 = verify_barrier(c, pr, BarrierSide::Sub);
    auto v2 = verify_barrier(c, pr, BarrierSide::Super);
    CHECK(v1.ok);
    CHECK(v2.ok);
    CHECK(v1.worst_violation < 1e-12);
    CHECK(v2.worst_violation < 1e-12);
  }
  SECTION("small constants are subsolutions iff the algebra allows") {
    // sub side: -lambda eps <= eps^p - eps^q
    ProblemParams pr(3, 2, 4, 0.3);
    CHECK(verify_barrier(constant_function(g, 0.25), pr, BarrierSide::Sub).ok);
    // for lambda < 0 a tiny constant fails: -lambda eps > eps^p - eps^q
    ProblemParams prn(3, 2, 4, -0.2);
    CHECK_FALSE(verify_barrier(constant_function(g, 1e-3), prn, BarrierSide::Sub).ok);
  }
  SECTION("single-power profile is a supersolution of the full equation") {
    ProblemParams pr(3, 2, 4, 0.5);
    ShootingOptions so;
    so.R_max = 12.0;
    so.M = 2000;
    auto rep = mancini_sandeep_profile(3, 2.0, 0.5, so);
    REQUIRE(rep.converged);
    RadialFunction U(g, rep.solution.values);
    auto v = verify_barrier(U, pr, BarrierSide::Super);
    CHECK(v.ok);
    // and it is not a subsolution: the residual is exactly +U^q > 0
    CHECK_FALSE(verify_barrier(U, pr, BarrierSide::Sub).ok);
  }
}

TEST_CASE("decay ordering of the A1 pair") {
  ProblemParams pr(3, 2, 4, 0.5);
  BarrierPair bp = build_pair(pr, BarrierStrategy::A1);
  auto c_sub = fit_decay_exponent(bp.sub);
  auto c_super = fit_decay_exponent(bp.super);
  REQUIRE(c_sub.has_value());
  REQUIRE(c_super.has_value());
  CHECK(*c_sub > *c_super);
  // rates match the closed forms of the chosen spectral parameters
  CHECK(*c_super == Approx(decay_exponent(3, 0.5)).epsilon(0.03));
  CHECK(*c_sub ==
        Approx(decay_exponent(3, bp.chosen_parameters.at("lambda_prime"))).epsilon(0.03));
}

TEST_CASE("compact support probe") {
  ProblemParams pr(3, 3, 0.5, 0.0);
  auto g = std::make_shared<RadialGrid>(build_grid(3, 15.0, 3000));
  SECTION("zero profile has support radius zero") {
    auto probe = compact_support_probe(constant_function(g, 0.0), pr);
    CHECK(probe.finite);
    CHECK(probe.radius == 0.0);
  }
  SECTION("computed nonnegative solution has finite support") {
    auto rep = ground_state_by_shooting(pr);
    REQUIRE(rep.converged);
    auto probe = compact_support_probe(rep.solution, pr);
    CHECK(probe.finite);
    CHECK(probe.radius > 0.5);
    CHECK(probe.radius < rep.solution.grid->r_max());
    // beyond the support edge the profile stays below the floor
    bool beyond_ok = true;
    for (size_t i = 0; i < rep.solution.size(); ++i)
      if (rep.solution.grid->r[i] > probe.radius + 1e-12 &&
          std::abs(rep.solution.values[i]) > 1e-9)
        beyond_ok = false;
    CHECK(beyond_ok);
  }
  SECTION("exponential-tail control reports an unbounded support") {
    ProblemParams ctrl(3, 3, 2.0, 0.0);
    auto rep = ground_state_by_shooting(ctrl);
    REQUIRE(rep.converged);
    auto probe = compact_support_probe(rep.solution, ctrl, 1e-30);
    CHECK_FALSE(probe.finite);
  }
}

TEST_CASE("barrier pair serialization") {
  ProblemParams pr(3, 2, 4, 0.5);
  BarrierPair bp = build_pair(pr, BarrierStrategy::A1);
  auto j = to_json(bp);
  CHECK(j.at("strategy") == "A1");
  CHECK(j.at("verified").at("sub_ok").get<bool>() == bp.sub_ok);
  CHECK(j.at("chosen_parameters").at("eps").get<double>() ==
        bp.chosen_parameters.at("eps"));
  RadialFunction sub = radial_function_from_json(j.at("sub"));
  CHECK(sub.values == bp.sub.values);
}
