#include "test_helpers.hpp"

namespace dst {

using ds::Rng;
using ds::Shape;

static Tensor random_tensor(Rng& rng, const Shape& shape, double lo, double hi) {
  Tensor t(shape);
  for (auto& v : t.data) v = ds::uniform(rng, lo, hi);
  return t;
}

RandomTape make_random_tape(uint64_t seed, bool smooth_only) {
  Rng rng = ds::make_rng(seed, 0xabcd);
  RandomTape t;
  bool image_mode = ds::uniform_int(rng, 0, 2) == 0;

  if (image_mode) {
    int c = ds::uniform_int(rng, 1, 2);
    int hw = 2 * ds::uniform_int(rng, 2, 4); // even, 4..8
    int img = t.g.input("img", {c, hw, hw});
    t.inputs.emplace("img", random_tensor(rng, {c, hw, hw}, -1.0, 1.0));
    t.wrt.push_back("img");

    int oc = ds::uniform_int(rng, 1, 3);
    int wgt = t.g.input("w0", {oc, c, 3, 3});
    t.inputs.emplace("w0", random_tensor(rng, {oc, c, 3, 3}, -0.7, 0.7));
    t.wrt.push_back("w0");
    int bias = t.g.input("b0", {oc});
    t.inputs.emplace("b0", random_tensor(rng, {oc}, -0.3, 0.3));
    t.wrt.push_back("b0");

    int stride = ds::uniform_int(rng, 0, 1) ? 2 : 1;
    int cur = t.g.conv2d(img, wgt, bias, stride);
    cur = smooth_only ? t.g.sigmoid(cur) : (ds::uniform_int(rng, 0, 1) ? t.g.relu(cur) : t.g.sigmoid(cur));
    if (stride == 2 && ds::uniform_int(rng, 0, 1)) {
      cur = t.g.upsample2x(cur);
      if (ds::uniform_int(rng, 0, 1)) cur = t.g.concat({cur, img});
    }
    int w1 = t.g.input("w1", {2, t.g.shape_of(cur)[0], 3, 3});
    t.inputs.emplace("w1", random_tensor(rng, {2, t.g.shape_of(cur)[0], 3, 3}, -0.5, 0.5));
    t.wrt.push_back("w1");
    cur = t.g.conv2d(cur, w1, -1, 1);
    cur = t.g.sigmoid(cur);
    t.out = t.g.mean(cur);
    return t;
  }

  int n = ds::uniform_int(rng, 2, 10);
  int w = t.g.input("w", {n});
  t.inputs.emplace("w", random_tensor(rng, {n}, -1.5, 1.5));
  t.wrt.push_back("w");
  int cur = w;
  int ops = ds::uniform_int(rng, 3, 7);
  for (int k = 0; k < ops; ++k) {
    int pick = ds::uniform_int(rng, 0, smooth_only ? 6 : 9);
    switch (pick) {
      case 0: cur = t.g.add(cur, t.g.constant(random_tensor(rng, {n}, -1.0, 1.0))); break;
      case 1: cur = t.g.mul(cur, t.g.constant(random_tensor(rng, {n}, 0.3, 1.2))); break;
      case 2: cur = t.g.scalar_mul(cur, ds::uniform(rng, -1.5, 1.5)); break;
      case 3: cur = t.g.sigmoid(cur); break;
      case 4: { // guarded log: argument strictly positive
        cur = t.g.log(t.g.add(t.g.sigmoid(cur), t.g.constant(Tensor::full({n}, 0.5))));
        break;
      }
      case 5: { // guarded div
        int den = t.g.add(t.g.sigmoid(cur), t.g.constant(Tensor::full({n}, 0.5)));
        cur = t.g.div(cur, den);
        break;
      }
      case 6: { // mix through a constant matrix
        cur = t.g.matmul(t.g.constant(random_tensor(rng, {n, n}, -0.6, 0.6)), cur);
        break;
      }
      case 7: cur = t.g.relu(cur); break;
      case 8: cur = t.g.clamp(cur, -0.8, 0.8); break;
      case 9: {
        int l1 = t.g.l1norm(cur);
        cur = t.g.add(cur, t.g.concat(std::vector<int>(static_cast<size_t>(n), l1)));
        break;
      }
    }
  }
  if (ds::uniform_int(rng, 0, 1)) {
    int w2 = t.g.input("w2", {n});
    t.inputs.emplace("w2", random_tensor(rng, {n}, -1.0, 1.0));
    t.wrt.push_back("w2");
    cur = t.g.mul(cur, t.g.sigmoid(w2));
  }
  t.out = ds::uniform_int(rng, 0, 1) ? t.g.mean(cur) : t.g.scalar_mul(t.g.sum(cur), 0.25);
  return t;
}

bool kink_margin_ok(const RandomTape& t, double margin) {
  for (int id = 0; id < t.g.size(); ++id) {
    const ad::Node& n = t.g.node(id);
    if (n.op != ad::Op::Relu && n.op != ad::Op::Clamp && n.op != ad::Op::L1Norm) continue;
    Tensor v = ad::forward_eval(t.g, t.inputs, n.args[0]);
    for (double x : v.data) {
      if (n.op == ad::Op::Clamp) {
        if (std::fabs(x - n.a0) < margin || std::fabs(x - n.a1) < margin) return false;
      } else {
        if (std::fabs(x) < margin) return false;
      }
    }
  }
  return true;
}

} // namespace dst
