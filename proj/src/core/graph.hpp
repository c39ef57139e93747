#pragma once

#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace ds::ad {

enum class Op : uint8_t {
  Input,
  Const,
  Add,
  Sub,
  Mul,
  Div,
  ScalarMul,
  MatMul,
  Conv2d,
  Upsample2x,
  Concat,
  Relu,
  Sigmoid,
  Clamp,
  Log,
  Sum,
  Mean,
  L1Norm,
};

const char* op_name(Op op);

struct Node {
  Op op;
  Shape shape;             // output shape
  std::vector<int> args;   // parent node ids, all < own id
  double a0 = 0.0;         // ScalarMul factor / Clamp lo
  double a1 = 0.0;         // Clamp hi
  int stride = 1;          // Conv2d stride (1 or 2)
  int const_id = -1;       // Const: index into the graph's constant pool
  std::string name;        // Input: binding name
};

/// Append-only computation record. Node ids are topologically ordered by
/// construction; shape checking happens at build time so evaluation can
/// assume consistency. Immutable once built; one evaluation at a time may
/// share a graph across threads read-only.
class Graph {
public:
  int input(std::string name, Shape shape);
  int constant(Tensor value);

  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);
  int div(int a, int b);
  int scalar_mul(int a, double c);
  int matmul(int a, int b);
  /// x: {C,H,W}, w: {OC,C,3,3}, optional bias {OC} (pass -1 for none).
  /// Zero "same" padding; stride 1 or 2; output {OC, ceil(H/s), ceil(W/s)}.
  int conv2d(int x, int w, int bias, int stride);
  int upsample2x(int a);
  /// Concatenate along axis 0: vectors {a}+{b} -> {a+b}; images must agree
  /// on H and W and stack channels.
  int concat(const std::vector<int>& parts);
  int relu(int a);
  int sigmoid(int a);
  int clamp(int a, double lo, double hi);
  int log(int a);
  int sum(int a);
  int mean(int a);
  int l1norm(int a);

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const Tensor& const_value(int const_id) const { return consts_[static_cast<size_t>(const_id)]; }

  const Shape& shape_of(int id) const { return node(id).shape; }

  /// Id of the input node carrying `name`, or -1.
  int find_input(const std::string& name) const;

private:
  int push(Node n);
  const Node& arg_node(int id, Op op) const;
  [[noreturn]] void shape_error(Op op, const std::string& detail) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> consts_;
};

} // namespace ds::ad
