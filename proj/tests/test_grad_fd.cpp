#include <doctest.h>
#include <cstring>

#include "test_helpers.hpp"

using namespace dst;

TEST_CASE("gradient of half squared norm is the vector itself") {
  ad::Graph g;
  int w = g.input("w", {2});
  int f = g.scalar_mul(g.sum(g.mul(w, w)), 0.5);
  auto r = ad::grad(g, {{"w", Tensor({2}, {1.0, -2.0})}}, f, {"w"});
  CHECK(r.grads.at("w").data[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.grads.at("w").data[1] == doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("analytic gradient of w1^2 w2") {
  ad::Graph g;
  int w = g.input("w", {2});
  int w1 = g.sum(g.mul(w, g.constant(Tensor({2}, {1.0, 0.0}))));
  int w2 = g.sum(g.mul(w, g.constant(Tensor({2}, {0.0, 1.0}))));
  int f = g.mul(g.mul(w1, w1), w2);
  auto r = ad::grad(g, {{"w", Tensor({2}, {1.0, 2.0})}}, f, {"w"});
  CHECK(r.grads.at("w").data[0] == doctest::Approx(4.0).epsilon(1e-14)); // 2 w1 w2
  CHECK(r.grads.at("w").data[1] == doctest::Approx(1.0).epsilon(1e-14)); // w1^2
}

TEST_CASE("mean of sigmoid at zero has derivative one quarter") {
  ad::Graph g;
  int w = g.input("w", {1});
  int f = g.mean(g.sigmoid(w));
  auto r = ad::grad(g, {{"w", Tensor({1}, {0.0})}}, f, {"w"});
  CHECK(r.grads.at("w").data[0] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("grad rejects non-scalar outputs and unknown variables") {
  ad::Graph g;
  int w = g.input("w", {3});
  int y = g.sigmoid(w);
  CHECK_THROWS_AS(ad::grad(g, {{"w", Tensor::zeros({3})}}, y, {"w"}), ds::Error);
  int s = g.sum(y);
  CHECK_THROWS_AS(ad::grad(g, {{"w", Tensor::zeros({3})}}, s, {"nope"}), ds::Error);
}

TEST_CASE("gradients match central finite differences on 50 random tapes") {
  int accepted = 0;
  uint64_t seed = 1;
  double worst = 0.0;
  while (accepted < 50) {
    RandomTape t = make_random_tape(seed++, false);
    REQUIRE(seed < 4000);
    if (!kink_margin_ok(t, 1e-3)) continue;
    int64_t params = 0;
    for (const auto& name : t.wrt) params += t.inputs.at(name).size();
    REQUIRE(params <= 500);
    auto r = ad::grad(t.g, t.inputs, t.out, t.wrt);
    double biggest_grad = 0.0;
    double tape_worst = 0.0;
    for (const auto& name : t.wrt) {
      Tensor fd = fd_grad(t.g, t.inputs, t.out, name);
      tape_worst = std::max(tape_worst, max_rel_err(r.grads.at(name), fd, 1e-8));
      for (double v : fd.data) biggest_grad = std::max(biggest_grad, std::fabs(v));
    }
    if (biggest_grad < 1e-4) continue; // e.g. a relu zeroed the whole tape
    worst = std::max(worst, tape_worst);
    ++accepted;
  }
  CHECK(worst <= 1e-5);
  MESSAGE("max rel err over 50 tapes: ", worst);
}

TEST_CASE("relu subgradient at zero is zero") {
  ad::Graph g;
  int w = g.input("w", {3});
  int f = g.sum(g.relu(w));
  auto r = ad::grad(g, {{"w", Tensor({3}, {-1.0, 0.0, 2.0})}}, f, {"w"});
  CHECK(r.grads.at("w").data[0] == 0.0);
  CHECK(r.grads.at("w").data[1] == 0.0);
  CHECK(r.grads.at("w").data[2] == 1.0);
}

TEST_CASE("grad is deterministic bit for bit") {
  RandomTape t = make_random_tape(99, false);
  auto a = ad::grad(t.g, t.inputs, t.out, t.wrt);
  auto b = ad::grad(t.g, t.inputs, t.out, t.wrt);
  for (const auto& name : t.wrt) {
    const auto& ta = a.grads.at(name).data;
    const auto& tb = b.grads.at(name).data;
    CHECK(std::memcmp(ta.data(), tb.data(), ta.size() * sizeof(double)) == 0);
  }
}
