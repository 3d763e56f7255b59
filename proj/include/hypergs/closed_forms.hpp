#pragma once

// Closed-form constants and regime classification for the double-power
// scalar field equation  -Lap u - lambda u = |u|^(p-1)u - |u|^(q-1)u
// on the N-dimensional Poincare ball.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hypergs {

struct ProblemParams {
  int N = 3;
  double p = 2.0;
  double q = 3.0;
  double lambda = 0.0;

  ProblemParams() = default;
  ProblemParams(int N_, double p_, double q_, double lambda_)
      : N(N_), p(p_), q(q_), lambda(lambda_) {
    validate();
  }

  void validate() const {
    if (N < 3) throw std::invalid_argument("ProblemParams: dimension N must be >= 3");
    if (!std::isfinite(p) || !std::isfinite(q) || !std::isfinite(lambda))
      throw std::invalid_argument("ProblemParams: non-finite parameter");
    if (!(p > 1.0)) throw std::invalid_argument("ProblemParams: focusing exponent p must be > 1");
    if (!(q > 0.0)) throw std::invalid_argument("ProblemParams: defocusing exponent q must be > 0");
    if (q == 1.0) throw std::invalid_argument("ProblemParams: q = 1 is excluded");
    if (q == p) throw std::invalid_argument("ProblemParams: q = p is excluded");
  }
};

// Bottom of the L^2 spectrum of -Lap on the ball model, (N-1)^2/4.
inline double lambda1(int N) {
  if (N < 3) throw std::invalid_argument("lambda1: N must be >= 3");
  return 0.25 * double(N - 1) * double(N - 1);
}

// Sobolev-critical exponent 2* = 2N/(N-2).
inline double critical_exponent(int N) {
  if (N < 3) throw std::invalid_argument("critical_exponent: N must be >= 3");
  return 2.0 * N / double(N - 2);
}

// The equation exponent at criticality, 2* - 1 = (N+2)/(N-2).
inline double critical_equation_exponent(int N) { return critical_exponent(N) - 1.0; }

// N(N-2)/4, the lower spectral obstruction in the critical regimes.
inline double pohozaev_threshold(int N) { return 0.25 * double(N) * double(N - 2); }

// h_{p,q}(t) = t^(p-1) - t^(q-1) on [0,1], for 1 < p < q.
inline double h_pq(double t, double p, double q) {
  if (!(p > 1.0 && q > p)) throw std::invalid_argument("h_pq: requires 1 < p < q");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("h_pq: t must lie in [0,1]");
  if (t == 0.0) return 0.0;
  return std::pow(t, p - 1.0) - std::pow(t, q - 1.0);
}

struct LambdaPQ {
  double lambda_pq;  // max of h_{p,q} on [0,1]
  double t_pq;       // maximizer, ((p-1)/(q-1))^(1/(q-p))
};

// Closed forms evaluated in log space so that the q -> p and p -> 1 limits
// stay finite instead of producing 0^inf / inf^0 intermediates.
inline LambdaPQ lambda_pq(double p, double q) {
  if (!(p > 1.0 && q > p)) throw std::invalid_argument("lambda_pq: requires 1 < p < q");
  const double log_ratio = std::log(p - 1.0) - std::log(q - 1.0);  // < 0
  const double log_t = log_ratio / (q - p);
  const double t = std::exp(log_t);
  const double lam = std::exp((p - 1.0) * log_t) - std::exp((q - 1.0) * log_t);
  return {lam, t};
}

// Decay rate c(N,lambda) = (N-1+sqrt((N-1)^2-4 lambda))/2 of the radial
// ground-state profiles; defined for lambda <= lambda1(N).
inline double decay_exponent(int N, double lambda) {
  if (N < 3) throw std::invalid_argument("decay_exponent: N must be >= 3");
  double disc = double(N - 1) * double(N - 1) - 4.0 * lambda;
  if (disc < 0.0) {
    if (disc > -1e-12)
      disc = 0.0;  // lambda == lambda1 up to roundoff
    else
      throw std::invalid_argument("decay_exponent: lambda exceeds lambda1, complex discriminant");
  }
  return 0.5 * (double(N - 1) + std::sqrt(disc));
}

struct ConformalExponents {
  double lambda_tilde;  // lambda - N(N-2)/4
  double alpha;         // N - (p+1)(N-2)/2
  double beta;          // N - (q+1)(N-2)/2
};

inline ConformalExponents conformal_exponents(int N, double p, double q, double lambda) {
  if (N < 3) throw std::invalid_argument("conformal_exponents: N must be >= 3");
  const double half_nm2 = 0.5 * double(N - 2);
  return {lambda - pohozaev_threshold(N),
          double(N) - (p + 1.0) * half_nm2,
          double(N) - (q + 1.0) * half_nm2};
}

enum class ExponentOrder { PltQ, QltOneLtP, OneLtQltP };
enum class Criticality { Subcritical, Critical, Supercritical };
enum class Verdict { Exists, NotExists, OpenEndpoint, AssumptionRequired };

// Lambda interval on which a positive (or non-negative non-trivial) energy
// solution is asserted to exist. Infinite endpoints are allowed; an empty
// window is encoded as lo > hi.
struct LambdaWindow {
  double lo = 1.0;
  double hi = -1.0;
  bool lo_closed = false;
  bool hi_closed = false;

  bool empty() const { return lo > hi; }
  bool contains(double x) const {
    if (empty()) return false;
    if (x < lo || (x == lo && !lo_closed)) return false;
    if (x > hi || (x == hi && !hi_closed)) return false;
    return true;
  }
  static LambdaWindow none() { return {}; }
  static LambdaWindow all() {
    return {-std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(), false, false};
  }
};

struct RegimeClassification {
  ExponentOrder exponent_order;
  Criticality p_criticality;
  Verdict verdict;
  LambdaWindow threshold_window;
};

inline Criticality classify_criticality(int N, double p) {
  const double pc = critical_equation_exponent(N);
  const double tol = 1e-12 * pc;
  if (p < pc - tol) return Criticality::Subcritical;
  if (p > pc + tol) return Criticality::Supercritical;
  return Criticality::Critical;
}

// Encodes the three existence/nonexistence theorems. The verdict for a
// parameter point the theorems do not reach is OpenEndpoint; nonexistence
// statements that rest on the standing decay assumption for supercritical
// focusing exponents report AssumptionRequired instead of NotExists.
inline RegimeClassification classify_regime(const ProblemParams& pr) {
  pr.validate();
  const int N = pr.N;
  const double p = pr.p, q = pr.q, lam = pr.lambda;
  const double lam1 = lambda1(N);
  const double nn4 = pohozaev_threshold(N);
  const Criticality crit = classify_criticality(N, p);

  RegimeClassification rc;
  rc.p_criticality = crit;

  if (p < q) {
    rc.exponent_order = ExponentOrder::PltQ;
    const double lpq = lambda_pq(p, q).lambda_pq;
    rc.threshold_window = {-lpq, lam1, true, false};
    if (lam > lam1) {
      rc.verdict = Verdict::NotExists;  // q > 1 always here
    } else if (lam == lam1) {
      rc.verdict = Verdict::OpenEndpoint;  // classical spectral obstruction
    } else if (lam >= -lpq) {
      rc.verdict = Verdict::Exists;
    } else {
      rc.verdict = (crit == Criticality::Supercritical) ? Verdict::AssumptionRequired
                                                        : Verdict::NotExists;
    }
    return rc;
  }

  if (q < 1.0) {
    rc.exponent_order = ExponentOrder::QltOneLtP;
    switch (crit) {
      case Criticality::Subcritical:
        rc.threshold_window = LambdaWindow::all();
        rc.verdict = Verdict::Exists;
        break;
      case Criticality::Critical:
        if (N >= 5) {
          rc.threshold_window = {nn4, std::numeric_limits<double>::infinity(), false, false};
          rc.verdict = (lam > nn4) ? Verdict::Exists : Verdict::NotExists;
        } else {
          // dimension 3 and 4 above the obstruction are unresolved
          rc.threshold_window = LambdaWindow::none();
          rc.verdict = (lam <= nn4) ? Verdict::NotExists : Verdict::OpenEndpoint;
        }
        break;
      case Criticality::Supercritical:
        rc.threshold_window = LambdaWindow::none();
        rc.verdict = (lam <= nn4) ? Verdict::AssumptionRequired : Verdict::OpenEndpoint;
        break;
    }
    return rc;
  }

  // 1 < q < p
  rc.exponent_order = ExponentOrder::OneLtQltP;
  const double pc = critical_equation_exponent(N);
  if (q >= pc) {
    // outside the q < min(p, 2*-1) hypothesis; only the spectral
    // nonexistence above lambda1 applies
    rc.threshold_window = LambdaWindow::none();
    rc.verdict = (lam > lam1) ? Verdict::NotExists : Verdict::OpenEndpoint;
    return rc;
  }
  switch (crit) {
    case Criticality::Subcritical:
      rc.threshold_window = {-std::numeric_limits<double>::infinity(), lam1, false, false};
      if (lam < lam1)
        rc.verdict = Verdict::Exists;
      else if (lam == lam1)
        rc.verdict = Verdict::OpenEndpoint;
      else
        rc.verdict = Verdict::NotExists;
      break;
    case Criticality::Critical:
      if (N >= 4) {
        rc.threshold_window = {nn4, lam1, false, false};
        if (lam > nn4 && lam < lam1)
          rc.verdict = Verdict::Exists;
        else if (lam <= nn4)
          rc.verdict = Verdict::NotExists;
        else if (lam > lam1)
          rc.verdict = Verdict::NotExists;
        else
          rc.verdict = Verdict::OpenEndpoint;  // lam == lam1
      } else {
        rc.threshold_window = LambdaWindow::none();
        if (lam <= nn4)
          rc.verdict = Verdict::NotExists;
        else if (lam > lam1)
          rc.verdict = Verdict::NotExists;
        else
          rc.verdict = Verdict::OpenEndpoint;  // N = 3 gap between nn4 and lambda1
      }
      break;
    case Criticality::Supercritical:
      rc.threshold_window = LambdaWindow::none();
      if (lam > lam1 || lam <= nn4)
        rc.verdict = Verdict::AssumptionRequired;
      else
        rc.verdict = Verdict::OpenEndpoint;
      break;
  }
  return rc;
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Exists: return "Exists";
    case Verdict::NotExists: return "NotExists";
    case Verdict::OpenEndpoint: return "OpenEndpoint";
    case Verdict::AssumptionRequired: return "AssumptionRequired";
  }
  return "?";
}

inline const char* to_string(ExponentOrder o) {
  switch (o) {
    case ExponentOrder::PltQ: return "PltQ";
    case ExponentOrder::QltOneLtP: return "QltOneLtP";
    case ExponentOrder::OneLtQltP: return "OneLtQltP";
  }
  return "?";
}

inline const char* to_string(Criticality c) {
  switch (c) {
    case Criticality::Subcritical: return "Subcritical";
    case Criticality::Critical: return "Critical";
    case Criticality::Supercritical: return "Supercritical";
  }
  return "?";
}

}  // namespace hypergs
