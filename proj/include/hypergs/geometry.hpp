#pragma once

// Poincare ball primitives: conformal factor, geodesic distance, radius
// conversions, the radial volume weight, and the conformal lift between the
// hyperbolic picture and the Euclidean unit ball.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hypergs {

// Surface area of the unit (N-1)-sphere in R^N, 2 pi^(N/2) / Gamma(N/2).
inline double sphere_area(int N) {
  if (N < 1) throw std::invalid_argument("sphere_area: N must be >= 1");
  return 2.0 * std::exp(0.5 * N * std::log(M_PI) - std::lgamma(0.5 * N));
}

// h(s) = 2/(1-s^2) at Euclidean radius s in [0,1).
inline double conformal_factor(double s) {
  if (!(s >= 0.0 && s < 1.0))
    throw std::invalid_argument("conformal_factor: radius must lie in [0,1)");
  return 2.0 / (1.0 - s * s);
}

// Geodesic radius r  ->  Euclidean radius tanh(r/2).
inline double euclidean_radius(double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("euclidean_radius: r must be >= 0");
  return std::tanh(0.5 * r);
}

// Euclidean radius s in [0,1)  ->  geodesic radius 2 artanh(s).
inline double geodesic_radius(double s) {
  if (!(s >= 0.0 && s < 1.0))
    throw std::invalid_argument("geodesic_radius: radius must lie in [0,1)");
  return 2.0 * std::atanh(s);
}

struct BallPoint {
  std::vector<double> x;

  explicit BallPoint(std::vector<double> coords) : x(std::move(coords)) {
    if (norm() >= 1.0) throw std::invalid_argument("BallPoint: |x| must be < 1");
  }
  double norm() const {
    double s = 0.0;
    for (double c : x) s += c * c;
    return std::sqrt(s);
  }
};

inline double geodesic_distance(const BallPoint& a, const BallPoint& b) {
  if (a.x.size() != b.x.size())
    throw std::invalid_argument("geodesic_distance: dimension mismatch");
  double d2 = 0.0;
  for (size_t i = 0; i < a.x.size(); ++i) {
    const double d = a.x[i] - b.x[i];
    d2 += d * d;
  }
  const double na = a.norm(), nb = b.norm();
  const double arg = 1.0 + 2.0 * d2 / ((1.0 - na * na) * (1.0 - nb * nb));
  return std::acosh(std::max(1.0, arg));
}

// Radial volume weight: dV restricted to radial functions is
// sphere_area(N) * sinh^(N-1)(r) dr.
inline double radial_measure_weight(int N, double r) {
  if (N < 3) throw std::invalid_argument("radial_measure_weight: N must be >= 3");
  if (!(r >= 0.0)) throw std::invalid_argument("radial_measure_weight: r must be >= 0");
  return sphere_area(N) * std::pow(std::sinh(r), N - 1);
}

// A radial profile on the Euclidean unit ball, v(s) on nodes s in [0,1).
struct LiftedProfile {
  std::vector<double> s;
  std::vector<double> v;
  int N = 3;
};

// v = h^((N-2)/2) u, with u sampled at geodesic radii r and v at the induced
// Euclidean radii tanh(r/2). Pointwise algebra, exact up to roundoff.
inline LiftedProfile conformal_lift(const std::vector<double>& r,
                                    const std::vector<double>& u, int N) {
  if (r.size() != u.size()) throw std::invalid_argument("conformal_lift: size mismatch");
  LiftedProfile out;
  out.N = N;
  out.s.resize(r.size());
  out.v.resize(r.size());
  const double e = 0.5 * (N - 2);
  for (size_t i = 0; i < r.size(); ++i) {
    const double s = std::tanh(0.5 * r[i]);
    // h(s) = 2/(1-s^2) = 2 cosh^2(r/2), evaluated in the stable cosh form
    const double h = 2.0 * std::pow(std::cosh(0.5 * r[i]), 2);
    out.s[i] = s;
    out.v[i] = std::pow(h, e) * u[i];
  }
  return out;
}

// Inverse of conformal_lift on the same nodes.
inline std::vector<double> conformal_unlift(const LiftedProfile& lp,
                                            const std::vector<double>& r) {
  if (lp.v.size() != r.size()) throw std::invalid_argument("conformal_unlift: size mismatch");
  std::vector<double> u(r.size());
  const double e = 0.5 * (lp.N - 2);
  for (size_t i = 0; i < r.size(); ++i) {
    const double h = 2.0 * std::pow(std::cosh(0.5 * r[i]), 2);
    u[i] = lp.v[i] / std::pow(h, e);
  }
  return u;
}

}  // namespace hypergs
