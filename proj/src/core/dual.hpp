#pragma once

#include <cmath>

namespace ds::ad {

/// First-order dual number: value plus directional tangent. Propagating these
/// through both the forward and the reverse sweep of a tape yields
/// Hessian-vector and mixed second-derivative products (forward-over-reverse).
///
/// Piecewise-linear ops (relu, clamp, |.|) branch on the primal value only, so
/// their contribution to second derivatives is identically zero.
struct Dual {
  double v = 0.0;
  double t = 0.0;

  Dual() = default;
  Dual(double value) : v(value) {}
  Dual(double value, double tangent) : v(value), t(tangent) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.t + b.t}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.t - b.t}; }
inline Dual operator-(Dual a) { return {-a.v, -a.t}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.v * b.t + a.t * b.v}; }
inline Dual operator*(double c, Dual a) { return {c * a.v, c * a.t}; }
inline Dual operator/(Dual a, Dual b) {
  double q = a.v / b.v;
  return {q, (a.t - q * b.t) / b.v};
}
inline Dual& operator+=(Dual& a, Dual b) { a.v += b.v; a.t += b.t; return a; }
inline Dual& operator-=(Dual& a, Dual b) { a.v -= b.v; a.t -= b.t; return a; }

inline Dual log(Dual a) { return {std::log(a.v), a.t / a.v}; }
inline Dual exp(Dual a) { double e = std::exp(a.v); return {e, e * a.t}; }

// Scalar-kind traits shared by double and Dual evaluation paths.
inline double primal(double x) { return x; }
inline double primal(Dual x) { return x.v; }
inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(Dual x) { return std::isfinite(x.v) && std::isfinite(x.t); }

} // namespace ds::ad
