#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hypergs/closed_forms.hpp"

using namespace hypergs;
using Catch::Approx;

TEST_CASE("spectral bottom and critical exponent") {
  CHECK(lambda1(3) == 1.0);
  CHECK(lambda1(4) == 2.25);
  CHECK(lambda1(5) == 4.0);
  CHECK(critical_exponent(3) == 6.0);
  CHECK(critical_exponent(4) == 4.0);
  CHECK(critical_exponent(6) == 3.0);
  CHECK(critical_equation_exponent(3) == 5.0);
  CHECK_THROWS_AS(lambda1(2), std::invalid_argument);
  CHECK_THROWS_AS(critical_exponent(2), std::invalid_argument);
}

TEST_CASE("h_pq pointwise values and domain") {
  CHECK(h_pq(1.0, 2, 3) == 0.0);
  CHECK(h_pq(0.5, 2, 3) == Approx(0.25).margin(1e-15));
  CHECK(h_pq(0.0, 2, 3) == 0.0);
  CHECK_THROWS_AS(h_pq(1.5, 2, 3), std::invalid_argument);
  CHECK_THROWS_AS(h_pq(-0.1, 2, 3), std::invalid_argument);
  CHECK_THROWS_AS(h_pq(0.5, 3, 2), std::invalid_argument);
}

TEST_CASE("lambda_pq closed form against grid maximization") {
  auto grid_max = [](double p, double q) {
    double best = 0.0;
    const int n = 1000000;
    for (int i = 0; i <= n; ++i) {
      const double t = double(i) / n;
      best = std::max(best, h_pq(t, p, q));
    }
    return best;
  };

  SECTION("p=2, q=3") {
    auto [lam, t] = lambda_pq(2, 3);
    CHECK(lam == Approx(0.25).margin(1e-12));
    CHECK(t == Approx(0.5).margin(1e-12));
    CHECK(lam == Approx(grid_max(2, 3)).margin(1e-9));
  }
  SECTION("p=2, q=4") {
    auto [lam, t] = lambda_pq(2, 4);
    CHECK(lam == Approx(2.0 / (3.0 * std::sqrt(3.0))).margin(1e-12));
    CHECK(t == Approx(1.0 / std::sqrt(3.0)).margin(1e-12));
    CHECK(lam == Approx(grid_max(2, 4)).margin(1e-9));
  }
  SECTION("closed form matches h at the maximizer") {
    for (auto [p, q] : {std::pair{1.5, 2.5}, {2.0, 7.0}, {3.2, 3.9}}) {
      auto [lam, t] = lambda_pq(p, q);
      CHECK(0.0 < t);
      CHECK(t < 1.0);
      CHECK(0.0 < lam);
      CHECK(lam < 1.0);
      CHECK(h_pq(t, p, q) == Approx(lam).margin(1e-14));
    }
  }
}

TEST_CASE("limits of t_pq and lambda_pq") {
  SECTION("q down to p") {
    auto [lam, t] = lambda_pq(2.0, 2.0 + 1e-9);
    CHECK(t == Approx(std::exp(-1.0)).margin(1e-6));
    CHECK(lam == Approx(0.0).margin(1e-6));
  }
  SECTION("q to infinity") {
    double prev = 0.0;
    for (double q : {10.0, 100.0, 1000.0}) {
      auto [lam, t] = lambda_pq(2.0, q);
      CHECK(lam > prev);
      CHECK(lam < 1.0);
      prev = lam;
    }
    CHECK(prev > 0.98);
    CHECK(lambda_pq(2.0, 1e6).t_pq > 0.99);
  }
  SECTION("p down to 1") {
    double prev_l = 0.0, prev_t = 1.0;
    for (double p : {1.1, 1.01, 1.001}) {
      auto [lam, t] = lambda_pq(p, 3.0);
      CHECK(lam > prev_l);
      CHECK(t < prev_t);
      prev_l = lam;
      prev_t = t;
    }
    CHECK(prev_l > 0.97);
    CHECK(prev_t < 0.05);
  }
}

TEST_CASE("monotonicity of lambda_pq in p and q") {
  for (double p : {1.5, 2.0, 2.5}) {
    double prev = 0.0;
    for (double q = p + 0.5; q < p + 5.0; q += 0.5) {
      const double lam = lambda_pq(p, q).lambda_pq;
      CHECK(lam > prev);
      prev = lam;
    }
  }
  for (double q : {4.0, 6.0}) {
    double prev = 2.0;
    for (double p = 1.2; p < q - 0.3; p += 0.4) {
      const double lam = lambda_pq(p, q).lambda_pq;
      CHECK(lam < prev);
      prev = lam;
    }
  }
}

TEST_CASE("h_pq is unimodal about t_pq") {
  const double p = 2.2, q = 4.7;
  auto [lam, t] = lambda_pq(p, q);
  (void)lam;
  const int n = 10000;
  for (int i = 0; i + 1 <= n; ++i) {
    const double a = double(i) / n, b = double(i + 1) / n;
    const double diff = h_pq(b, p, q) - h_pq(a, p, q);
    if (b <= t) CHECK(diff > 0.0);
    if (a >= t) CHECK(diff < 0.0);
  }
}

TEST_CASE("decay exponent") {
  CHECK(decay_exponent(3, 1.0) == Approx(1.0));
  CHECK(decay_exponent(3, 0.0) == Approx(2.0));
  CHECK(decay_exponent(3, -2.0) == Approx(1.0 + std::sqrt(3.0)).margin(1e-12));
  CHECK_THROWS_AS(decay_exponent(3, 1.0 + 1e-6), std::invalid_argument);
  // strictly decreasing in lambda, c(N,0) = N-1
  for (int N : {3, 4, 5}) {
    CHECK(decay_exponent(N, 0.0) == Approx(double(N - 1)));
    double prev = decay_exponent(N, -5.0);
    for (double lam = -4.5; lam < lambda1(N); lam += 0.25) {
      const double c = decay_exponent(N, lam);
      CHECK(c < prev);
      prev = c;
    }
    CHECK(decay_exponent(N, lambda1(N)) == Approx(0.5 * (N - 1)));
  }
}

TEST_CASE("conformal exponents") {
  CHECK(conformal_exponents(4, 3.0, 2.0, 0.0).alpha == Approx(0.0).margin(1e-14));
  CHECK(conformal_exponents(5, 2.0, 0.5, 0.0).beta == Approx(2.75));
  CHECK(conformal_exponents(4, 3.0, 2.0, 2.0).lambda_tilde == Approx(0.0).margin(1e-14));
  // alpha <= 0 iff p >= 2*-1; beta > 0 iff q < 2*-1
  for (int N : {3, 4, 5, 6}) {
    const double pc = critical_equation_exponent(N);
    CHECK(conformal_exponents(N, pc + 0.3, 1.0, 0.0).alpha < 0.0);
    CHECK(conformal_exponents(N, pc - 0.3, 1.0, 0.0).alpha > 0.0);
    CHECK(conformal_exponents(N, 2.0, pc - 0.2, 0.0).beta > 0.0);
    CHECK(conformal_exponents(N, 2.0, pc + 0.2, 0.0).beta < 0.0);
  }
}

TEST_CASE("problem parameter validation") {
  CHECK_THROWS_AS(ProblemParams(2, 2, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(ProblemParams(3, 1.0, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(ProblemParams(3, 2, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(ProblemParams(3, 2, 2.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(ProblemParams(3, 2, -1, 0), std::invalid_argument);
  CHECK_NOTHROW(ProblemParams(3, 2, 4, -0.3));
}

TEST_CASE("regime classification encodes the main theorems") {
  SECTION("p < q") {
    auto rc = classify_regime({3, 2, 4, 0.0});
    CHECK(rc.exponent_order == ExponentOrder::PltQ);
    CHECK(rc.verdict == Verdict::Exists);
    CHECK(rc.threshold_window.lo == Approx(-2.0 / (3.0 * std::sqrt(3.0))).margin(1e-12));
    CHECK(rc.threshold_window.hi == Approx(1.0));
    CHECK(rc.threshold_window.lo_closed);
    CHECK_FALSE(rc.threshold_window.hi_closed);

    CHECK(classify_regime({3, 2, 4, -1.0}).verdict == Verdict::NotExists);
    CHECK(classify_regime({3, 2, 4, 1.5}).verdict == Verdict::NotExists);
    CHECK(classify_regime({3, 2, 4, 1.0}).verdict == Verdict::OpenEndpoint);
    // closed lower endpoint
    const double lpq = lambda_pq(2, 4).lambda_pq;
    CHECK(classify_regime({3, 2, 4, -lpq}).verdict == Verdict::Exists);
    // supercritical focusing exponent: nonexistence below the window needs
    // the standing decay assumption
    CHECK(classify_regime({3, 6.0, 7.0, -0.9}).verdict == Verdict::AssumptionRequired);
    CHECK(classify_regime({3, 6.0, 7.0, 0.5}).verdict == Verdict::Exists);
  }

  SECTION("q < 1 < p") {
    CHECK(classify_regime({3, 3, 0.5, -10.0}).verdict == Verdict::Exists);
    CHECK(classify_regime({3, 3, 0.5, 10.0}).verdict == Verdict::Exists);
    // critical p, N = 5: window (N(N-2)/4, infinity)
    auto rc = classify_regime({5, 7.0 / 3.0, 0.5, 3.9});
    CHECK(rc.p_criticality == Criticality::Critical);
    CHECK(rc.verdict == Verdict::Exists);
    CHECK(classify_regime({5, 7.0 / 3.0, 0.5, 3.75}).verdict == Verdict::NotExists);
    CHECK(classify_regime({5, 7.0 / 3.0, 0.5, 3.0}).verdict == Verdict::NotExists);
    // N = 4 critical above the obstruction is open
    CHECK(classify_regime({4, 3.0, 0.5, 2.1}).verdict == Verdict::OpenEndpoint);
    CHECK(classify_regime({4, 3.0, 0.5, 1.9}).verdict == Verdict::NotExists);
    // supercritical: conditional nonexistence below, open above
    CHECK(classify_regime({3, 6.0, 0.5, 0.5}).verdict == Verdict::AssumptionRequired);
    CHECK(classify_regime({3, 6.0, 0.5, 0.9}).verdict == Verdict::OpenEndpoint);
  }

  SECTION("1 < q < p") {
    CHECK(classify_regime({3, 3, 2, -5.0}).verdict == Verdict::Exists);
    CHECK(classify_regime({3, 3, 2, 0.99}).verdict == Verdict::Exists);
    CHECK(classify_regime({3, 3, 2, 1.0}).verdict == Verdict::OpenEndpoint);
    CHECK(classify_regime({3, 3, 2, 1.01}).verdict == Verdict::NotExists);
    // critical p = 5 at N = 3: below the obstruction nothing survives
    CHECK(classify_regime({3, 5, 2, 0.5}).verdict == Verdict::NotExists);
    CHECK(classify_regime({3, 5, 2, 0.75}).verdict == Verdict::NotExists);
    CHECK(classify_regime({3, 5, 2, 0.9}).verdict == Verdict::OpenEndpoint);
    // N >= 4 critical window
    CHECK(classify_regime({4, 3, 2, 2.1}).verdict == Verdict::Exists);
    CHECK(classify_regime({4, 3, 2, 2.0}).verdict == Verdict::NotExists);
    CHECK(classify_regime({4, 3, 2, 2.25}).verdict == Verdict::OpenEndpoint);  // lambda1
    CHECK(classify_regime({4, 3, 2, 2.4}).verdict == Verdict::NotExists);
  }

  SECTION("classification is total") {
    for (double p : {1.5, 3.0, 5.0, 6.5})
      for (double q : {0.3, 0.7, 1.5, 2.5, 4.0, 7.0})
        for (double lam : {-5.0, -0.4, 0.0, 0.7, 1.0, 1.2, 4.0}) {
          if (q == p) continue;
          CHECK_NOTHROW(classify_regime({3, p, q, lam}));
        }
  }
}
