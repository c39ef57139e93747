#include "core/graph.hpp"

namespace ds::ad {

const char* op_name(Op op) {
  switch (op) {
    case Op::Input: return "input";
    case Op::Const: return "const";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::ScalarMul: return "scalar_mul";
    case Op::MatMul: return "matmul";
    case Op::Conv2d: return "conv2d";
    case Op::Upsample2x: return "upsample2x";
    case Op::Concat: return "concat";
    case Op::Relu: return "relu";
    case Op::Sigmoid: return "sigmoid";
    case Op::Clamp: return "clamp";
    case Op::Log: return "log";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
    case Op::L1Norm: return "l1norm";
  }
  return "?";
}

int Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

const Node& Graph::arg_node(int id, Op op) const {
  if (id < 0 || id >= size())
    fail(ErrCode::InvalidArg, std::string(op_name(op)) + ": argument node id " + std::to_string(id) + " out of range");
  return nodes_[static_cast<size_t>(id)];
}

void Graph::shape_error(Op op, const std::string& detail) const {
  fail(ErrCode::Shape, std::string(op_name(op)) + " at node " + std::to_string(size()) + ": " + detail);
}

int Graph::input(std::string name, Shape shape) {
  if (name.empty()) fail(ErrCode::InvalidArg, "input: empty name");
  if (find_input(name) >= 0) fail(ErrCode::InvalidArg, "input: duplicate name '" + name + "'");
  Node n{Op::Input, std::move(shape), {}};
  n.name = std::move(name);
  if (numel(n.shape) <= 0) shape_error(Op::Input, "empty shape");
  return push(std::move(n));
}

int Graph::constant(Tensor value) {
  Node n{Op::Const, value.shape, {}};
  n.const_id = static_cast<int>(consts_.size());
  consts_.push_back(std::move(value));
  return push(std::move(n));
}

int Graph::find_input(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (nodes_[static_cast<size_t>(i)].op == Op::Input && nodes_[static_cast<size_t>(i)].name == name) return i;
  return -1;
}

static bool shapes_equal(const Shape& a, const Shape& b) { return a == b; }

int Graph::add(int a, int b) {
  const Node& na = arg_node(a, Op::Add);
  const Node& nb = arg_node(b, Op::Add);
  if (!shapes_equal(na.shape, nb.shape))
    shape_error(Op::Add, shape_str(na.shape) + " vs " + shape_str(nb.shape));
  return push({Op::Add, na.shape, {a, b}});
}

int Graph::sub(int a, int b) {
  const Node& na = arg_node(a, Op::Sub);
  const Node& nb = arg_node(b, Op::Sub);
  if (!shapes_equal(na.shape, nb.shape))
    shape_error(Op::Sub, shape_str(na.shape) + " vs " + shape_str(nb.shape));
  return push({Op::Sub, na.shape, {a, b}});
}

int Graph::mul(int a, int b) {
  const Node& na = arg_node(a, Op::Mul);
  const Node& nb = arg_node(b, Op::Mul);
  if (!shapes_equal(na.shape, nb.shape))
    shape_error(Op::Mul, shape_str(na.shape) + " vs " + shape_str(nb.shape));
  return push({Op::Mul, na.shape, {a, b}});
}

int Graph::div(int a, int b) {
  const Node& na = arg_node(a, Op::Div);
  const Node& nb = arg_node(b, Op::Div);
  if (!shapes_equal(na.shape, nb.shape))
    shape_error(Op::Div, shape_str(na.shape) + " vs " + shape_str(nb.shape));
  return push({Op::Div, na.shape, {a, b}});
}

int Graph::scalar_mul(int a, double c) {
  const Node& na = arg_node(a, Op::ScalarMul);
  Node n{Op::ScalarMul, na.shape, {a}};
  n.a0 = c;
  return push(std::move(n));
}

int Graph::matmul(int a, int b) {
  const Node& na = arg_node(a, Op::MatMul);
  const Node& nb = arg_node(b, Op::MatMul);
  if (na.shape.size() != 2) shape_error(Op::MatMul, "left operand must be rank 2, got " + shape_str(na.shape));
  if (nb.shape.size() == 1) {
    if (na.shape[1] != nb.shape[0])
      shape_error(Op::MatMul, shape_str(na.shape) + " x " + shape_str(nb.shape));
    return push({Op::MatMul, {na.shape[0]}, {a, b}});
  }
  if (nb.shape.size() != 2) shape_error(Op::MatMul, "right operand must be rank 1 or 2");
  if (na.shape[1] != nb.shape[0])
    shape_error(Op::MatMul, shape_str(na.shape) + " x " + shape_str(nb.shape));
  return push({Op::MatMul, {na.shape[0], nb.shape[1]}, {a, b}});
}

int Graph::conv2d(int x, int w, int bias, int stride) {
  const Node& nx = arg_node(x, Op::Conv2d);
  const Node& nw = arg_node(w, Op::Conv2d);
  if (stride != 1 && stride != 2) shape_error(Op::Conv2d, "stride must be 1 or 2");
  if (nx.shape.size() != 3) shape_error(Op::Conv2d, "image must be {C,H,W}, got " + shape_str(nx.shape));
  if (nw.shape.size() != 4 || nw.shape[2] != 3 || nw.shape[3] != 3)
    shape_error(Op::Conv2d, "weight must be {OC,C,3,3}, got " + shape_str(nw.shape));
  if (nw.shape[1] != nx.shape[0])
    shape_error(Op::Conv2d, "weight in-channels " + std::to_string(nw.shape[1]) + " vs image channels " +
                                std::to_string(nx.shape[0]));
  int oc = nw.shape[0];
  int oh = (nx.shape[1] + stride - 1) / stride;
  int ow = (nx.shape[2] + stride - 1) / stride;
  std::vector<int> args{x, w};
  if (bias >= 0) {
    const Node& nb = arg_node(bias, Op::Conv2d);
    if (nb.shape != Shape{oc}) shape_error(Op::Conv2d, "bias must be {OC}, got " + shape_str(nb.shape));
    args.push_back(bias);
  }
  Node n{Op::Conv2d, {oc, oh, ow}, std::move(args)};
  n.stride = stride;
  return push(std::move(n));
}

int Graph::upsample2x(int a) {
  const Node& na = arg_node(a, Op::Upsample2x);
  if (na.shape.size() != 3) shape_error(Op::Upsample2x, "expects {C,H,W}, got " + shape_str(na.shape));
  return push({Op::Upsample2x, {na.shape[0], na.shape[1] * 2, na.shape[2] * 2}, {a}});
}

int Graph::concat(const std::vector<int>& parts) {
  if (parts.empty()) shape_error(Op::Concat, "no operands");
  const Node& first = arg_node(parts[0], Op::Concat);
  size_t rank = first.shape.size();
  if (rank != 1 && rank != 3) shape_error(Op::Concat, "expects rank 1 or 3, got " + shape_str(first.shape));
  int total = 0;
  for (int id : parts) {
    const Node& n = arg_node(id, Op::Concat);
    if (n.shape.size() != rank) shape_error(Op::Concat, "mixed ranks");
    if (rank == 3 && (n.shape[1] != first.shape[1] || n.shape[2] != first.shape[2]))
      shape_error(Op::Concat, "spatial dims differ: " + shape_str(n.shape) + " vs " + shape_str(first.shape));
    total += n.shape[0];
  }
  Shape out = first.shape;
  out[0] = total;
  return push({Op::Concat, std::move(out), parts});
}

int Graph::relu(int a) {
  const Node& na = arg_node(a, Op::Relu);
  return push({Op::Relu, na.shape, {a}});
}

int Graph::sigmoid(int a) {
  const Node& na = arg_node(a, Op::Sigmoid);
  return push({Op::Sigmoid, na.shape, {a}});
}

int Graph::clamp(int a, double lo, double hi) {
  const Node& na = arg_node(a, Op::Clamp);
  if (!(lo < hi)) shape_error(Op::Clamp, "lo must be < hi");
  Node n{Op::Clamp, na.shape, {a}};
  n.a0 = lo;
  n.a1 = hi;
  return push(std::move(n));
}

int Graph::log(int a) {
  const Node& na = arg_node(a, Op::Log);
  return push({Op::Log, na.shape, {a}});
}

int Graph::sum(int a) {
  arg_node(a, Op::Sum);
  return push({Op::Sum, {1}, {a}});
}

int Graph::mean(int a) {
  arg_node(a, Op::Mean);
  return push({Op::Mean, {1}, {a}});
}

int Graph::l1norm(int a) {
  arg_node(a, Op::L1Norm);
  return push({Op::L1Norm, {1}, {a}});
}

} // namespace ds::ad
