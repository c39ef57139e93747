#include <doctest.h>

#include <cstdio>
#include <cstring>

#include "nets/net.hpp"
#include "test_helpers.hpp"

using namespace dst;
using ds::nets::NetConfig;

TEST_CASE("init_params is deterministic and biases are zero") {
  NetConfig cfg;
  Tensor a = ds::nets::init_params(cfg, 17);
  Tensor b = ds::nets::init_params(cfg, 17);
  CHECK(std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0);
  Tensor c = ds::nets::init_params(cfg, 18);
  CHECK(std::memcmp(a.data.data(), c.data.data(), a.data.size() * sizeof(double)) != 0);

  auto layout = ds::nets::make_layout(cfg);
  for (const auto& seg : layout.segments) {
    if (!seg.name.ends_with(".bias")) continue;
    for (int64_t i = 0; i < seg.count; ++i) CHECK(a.data[static_cast<size_t>(seg.offset + i)] == 0.0);
  }
}

TEST_CASE("he init std matches sqrt(2/fan_in) for an 8-channel block") {
  NetConfig cfg; // enc1 is 8 -> 16, fan_in = 72
  auto layout = ds::nets::make_layout(cfg);
  Tensor params = ds::nets::init_params(cfg, 5);
  const auto& seg = layout.find("enc1.weight");
  CHECK(seg.shape == ds::Shape{16, 8, 3, 3});
  double sum = 0.0, sq = 0.0;
  for (int64_t i = 0; i < seg.count; ++i) {
    double v = params.data[static_cast<size_t>(seg.offset + i)];
    sum += v;
    sq += v * v;
  }
  double n = static_cast<double>(seg.count);
  double std_emp = std::sqrt(sq / n - (sum / n) * (sum / n));
  double expected = std::sqrt(2.0 / 72.0);
  CHECK(std_emp > 0.8 * expected);
  CHECK(std_emp < 1.2 * expected);
}

TEST_CASE("parameter count matches the closed-form layout formula") {
  NetConfig cfg;
  auto layout = ds::nets::make_layout(cfg);
  // independent count: conv stack for in=1, base=8, depth=2 with skips
  struct { int oc, ic; } convs[] = {{8, 1}, {16, 8}, {32, 16}, {16, 48}, {8, 24}, {1, 8}};
  int64_t expect = 0;
  for (auto [oc, ic] : convs) expect += static_cast<int64_t>(oc) * ic * 9 + oc;
  CHECK(layout.total == expect);
  CHECK(layout.total == 14625);

  NetConfig noskip = cfg;
  noskip.skip_connections = false;
  struct { int oc, ic; } convs2[] = {{8, 1}, {16, 8}, {32, 16}, {16, 32}, {8, 16}, {1, 8}};
  int64_t expect2 = 0;
  for (auto [oc, ic] : convs2) expect2 += static_cast<int64_t>(oc) * ic * 9 + oc;
  CHECK(ds::nets::make_layout(noskip).total == expect2);
}

TEST_CASE("all-zero params give exactly 0.5 everywhere") {
  NetConfig cfg;
  Tensor params = Tensor::zeros({static_cast<int>(ds::nets::make_layout(cfg).total)});
  Tensor img = Tensor::full({1, 16, 16}, 0.37);
  Tensor out = ds::nets::forward(cfg, params, img);
  CHECK(out.shape == ds::Shape{1, 16, 16});
  for (double v : out.data) CHECK(v == 0.5);
}

TEST_CASE("forward preserves spatial shape and stays inside (0,1)") {
  NetConfig cfg;
  Tensor params = ds::nets::init_params(cfg, 3);
  ds::Rng rng = ds::make_rng(11);
  Tensor img({1, 64, 64});
  for (auto& v : img.data) v = ds::uniform(rng, 0.0, 1.0);
  Tensor out = ds::nets::forward(cfg, params, img);
  CHECK(out.shape == ds::Shape{1, 64, 64});
  for (double v : out.data) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("forward rejects images not divisible by 2^depth") {
  NetConfig cfg;
  Tensor params = ds::nets::init_params(cfg, 3);
  CHECK_THROWS_AS(ds::nets::forward(cfg, params, Tensor::zeros({1, 10, 10})), ds::Error);
  CHECK_THROWS_AS(ds::nets::forward(cfg, params, Tensor::zeros({2, 16, 16})), ds::Error);
}

TEST_CASE("output depends on encoder weights (finite-difference probe)") {
  NetConfig cfg;
  Tensor params = ds::nets::init_params(cfg, 9);
  ds::Rng rng = ds::make_rng(13);
  Tensor img({1, 16, 16});
  for (auto& v : img.data) v = ds::uniform(rng, 0.0, 1.0);
  auto layout = ds::nets::make_layout(cfg);
  int64_t idx = layout.find("enc0.weight").offset + 4;
  double eps = 1e-4;
  Tensor plus = params, minus = params;
  plus.data[static_cast<size_t>(idx)] += eps;
  minus.data[static_cast<size_t>(idx)] -= eps;
  double diff = max_abs_diff(ds::nets::forward(cfg, plus, img), ds::nets::forward(cfg, minus, img));
  CHECK(diff > 1e-9);
}

TEST_CASE("grad of mean output passes finite differences on a tiny net") {
  NetConfig cfg;
  cfg.base_channels = 2;
  cfg.depth = 1;
  Tensor params = ds::nets::init_params(cfg, 21);
  auto layout = ds::nets::make_layout(cfg);
  CHECK(layout.total == 225);

  ds::Rng rng = ds::make_rng(23);
  Tensor img({1, 16, 16});
  for (auto& v : img.data) v = ds::uniform(rng, 0.0, 1.0);

  ad::Graph g;
  int in = g.input("image", img.shape);
  int out = ds::nets::build_forward(g, cfg, "net", in);
  int loss = g.mean(out);
  ad::Bindings inputs{{"image", img}};
  ds::nets::bind_params(inputs, "net", layout, params);

  auto names = ds::nets::param_names(layout, "net");
  auto r = ad::grad(g, inputs, loss, names);
  Tensor flat = ds::nets::flatten_segments(layout, "net", r.grads);

  // finite differences over every parameter
  Tensor fd({static_cast<int>(layout.total)});
  double eps = 1e-5;
  for (int64_t i = 0; i < layout.total; ++i) {
    Tensor plus = params, minus = params;
    plus.data[static_cast<size_t>(i)] += eps;
    minus.data[static_cast<size_t>(i)] -= eps;
    Tensor op = ds::nets::forward(cfg, plus, img);
    Tensor om = ds::nets::forward(cfg, minus, img);
    double fp = 0.0, fm = 0.0;
    for (double v : op.data) fp += v;
    for (double v : om.data) fm += v;
    fp /= static_cast<double>(op.data.size());
    fm /= static_cast<double>(om.data.size());
    fd.data[static_cast<size_t>(i)] = (fp - fm) / (2 * eps);
  }
  CHECK(max_rel_err(flat, fd, 1e-8) <= 1e-5);
}

TEST_CASE("checkpoint round trip is bit exact") {
  NetConfig cfg;
  cfg.base_channels = 4;
  Tensor params = ds::nets::init_params(cfg, 77);
  std::string path = "ckpt_test.bin";
  ds::nets::save_checkpoint(path, cfg, params);
  auto ck = ds::nets::load_checkpoint(path);
  CHECK(ck.config == cfg);
  REQUIRE(ck.params.size() == params.size());
  CHECK(std::memcmp(ck.params.data.data(), params.data.data(), params.data.size() * sizeof(double)) == 0);
  std::remove(path.c_str());

  CHECK_THROWS_AS(ds::nets::load_checkpoint("does_not_exist.bin"), ds::Error);
}
