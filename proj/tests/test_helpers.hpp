#pragma once

#include <cmath>
#include <vector>

#include "core/eval.hpp"
#include "core/graph.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace dst {

using ds::Tensor;
namespace ad = ds::ad;

// |a-b| <= max(abs_floor, tol * max(|a|,|b|))
inline bool close(double a, double b, double tol, double abs_floor = 1e-12) {
  double diff = std::fabs(a - b);
  return diff <= std::max(abs_floor, tol * std::max(std::fabs(a), std::fabs(b)));
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  return m;
}

// Worst per-component relative error with an absolute floor below which
// differences are ignored.
inline double max_rel_err(const Tensor& a, const Tensor& b, double abs_floor = 1e-8) {
  double worst = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    double diff = std::fabs(a.data[i] - b.data[i]);
    if (diff <= abs_floor) continue;
    double scale = std::max(std::fabs(a.data[i]), std::fabs(b.data[i]));
    worst = std::max(worst, diff / std::max(scale, abs_floor));
  }
  return worst;
}

// Central finite differences of a scalar graph output w.r.t. one input.
inline Tensor fd_grad(const ad::Graph& g, const ad::Bindings& inputs, int out, const std::string& name,
                      double eps = 1e-5) {
  Tensor base = inputs.at(name);
  Tensor result(base.shape);
  for (size_t i = 0; i < base.data.size(); ++i) {
    ad::Bindings plus = inputs;
    ad::Bindings minus = inputs;
    plus.at(name).data[i] = base.data[i] + eps;
    minus.at(name).data[i] = base.data[i] - eps;
    double fp = ad::forward_eval(g, plus, out).data[0];
    double fm = ad::forward_eval(g, minus, out).data[0];
    result.data[i] = (fp - fm) / (2.0 * eps);
  }
  return result;
}

// FD of the gradient along direction v: (grad(w+eps v) - grad(w-eps v)) / 2eps.
inline Tensor fd_hvp(const ad::Graph& g, const ad::Bindings& inputs, int out, const std::string& name,
                     const Tensor& v, double eps = 1e-5) {
  ad::Bindings plus = inputs;
  ad::Bindings minus = inputs;
  for (size_t i = 0; i < v.data.size(); ++i) {
    plus.at(name).data[i] += eps * v.data[i];
    minus.at(name).data[i] -= eps * v.data[i];
  }
  Tensor gp = ad::grad(g, plus, out, {name}).grads.at(name);
  Tensor gm = ad::grad(g, minus, out, {name}).grads.at(name);
  Tensor result(gp.shape);
  for (size_t i = 0; i < result.data.size(); ++i) result.data[i] = (gp.data[i] - gm.data[i]) / (2.0 * eps);
  return result;
}

struct RandomTape {
  ad::Graph g;
  ad::Bindings inputs;
  int out = -1;
  std::vector<std::string> wrt; // differentiable inputs
};

// Builds a small random tape mixing vector and image ops. With smooth_only,
// only C-infinity ops appear (no relu/clamp/l1norm), which keeps second-order
// finite-difference checks clean. Tapes whose piecewise ops evaluate within
// `margin` of a kink are rejected by the caller via kink_margin_ok.
RandomTape make_random_tape(uint64_t seed, bool smooth_only);

// True when every relu/clamp/l1norm argument stays at least `margin` away
// from its nondifferentiable point, so central differences see one branch.
bool kink_margin_ok(const RandomTape& t, double margin);

} // namespace dst
