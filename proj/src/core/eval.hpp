#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/graph.hpp"
#include "core/tensor.hpp"

namespace ds::ad {

using Bindings = std::map<std::string, Tensor>;

/// Evaluates the graph on the bound inputs and returns the value of `out`.
/// Every node's output is checked for finiteness; violations raise a
/// structured error naming the node.
Tensor forward_eval(const Graph& g, const Bindings& inputs, int out);

struct GradResult {
  double value = 0.0;
  std::map<std::string, Tensor> grads;
};

/// Reverse-mode gradient of a scalar-valued node with respect to the named
/// inputs. `out` must have shape {1}.
GradResult grad(const Graph& g, const Bindings& inputs, int out, const std::vector<std::string>& wrt);

struct SecondOrderResult {
  double value = 0.0;   // scalar output
  double dvalue = 0.0;  // directional derivative of the output along the seed
  std::map<std::string, Tensor> products;
};

/// Forward-over-reverse second-order products: seeds tangents on some inputs,
/// propagates dual numbers through the forward and reverse sweeps, and returns
/// for each requested input the tangent of its adjoint. With seed t on inputs
/// x, products[y] = sum_x d^2 out / dy dx^T . t_x.
SecondOrderResult second_order(const Graph& g, const Bindings& inputs, int out, const Bindings& seeds,
                               const std::vector<std::string>& wrt);

/// Hessian-vector product [d^2 out / dw dw^T] v without materializing the
/// Hessian (directional derivative of the gradient along v).
Tensor hvp(const Graph& g, const Bindings& inputs, int out, const std::string& w, const Tensor& v);

/// Gradient with respect to p of <lambda, d out / dw>, i.e.
/// lambda^T [d^2 out / dw dp^T] as a p-shaped tensor.
Tensor mixed_vjp(const Graph& g, const Bindings& inputs, int out, const std::string& w, const std::string& p,
                 const Tensor& lambda);

} // namespace ds::ad
