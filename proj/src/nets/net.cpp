#include "nets/net.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "core/rng.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace ds::nets {

const ParamSegment& ParamLayout::find(const std::string& name) const {
  for (const auto& s : segments)
    if (s.name == name) return s;
  fail(ErrCode::InvalidArg, "unknown parameter segment '" + name + "'");
}

static void check_config(const NetConfig& cfg) {
  if (cfg.in_channels <= 0 || cfg.base_channels <= 0 || cfg.depth < 0)
    fail(ErrCode::InvalidArg, "invalid net config");
}

namespace {

struct ConvSpec {
  std::string name;
  int ic = 0, oc = 0;
  int stride = 1;
};

std::vector<ConvSpec> conv_plan(const NetConfig& cfg) {
  std::vector<ConvSpec> plan;
  int ch = cfg.base_channels;
  plan.push_back({"enc0", cfg.in_channels, ch, 1});
  for (int k = 1; k <= cfg.depth; ++k) {
    plan.push_back({"enc" + std::to_string(k), ch, ch * 2, 2});
    ch *= 2;
  }
  for (int k = cfg.depth - 1; k >= 0; --k) {
    int above = ch;                // channels arriving from the level below
    int skip = above / 2;          // encoder output at this level
    int ic = cfg.skip_connections ? above + skip : above;
    plan.push_back({"dec" + std::to_string(k), ic, skip, 1});
    ch = skip;
  }
  plan.push_back({"head", ch, 1, 1});
  return plan;
}

} // namespace

ParamLayout make_layout(const NetConfig& cfg) {
  check_config(cfg);
  ParamLayout layout;
  int64_t off = 0;
  for (const auto& conv : conv_plan(cfg)) {
    ParamSegment w{conv.name + ".weight", {conv.oc, conv.ic, 3, 3}, off, 0};
    w.count = numel(w.shape);
    off += w.count;
    layout.segments.push_back(std::move(w));
    ParamSegment b{conv.name + ".bias", {conv.oc}, off, conv.oc};
    off += conv.oc;
    layout.segments.push_back(std::move(b));
  }
  layout.total = off;
  return layout;
}

Tensor init_params(const NetConfig& cfg, uint64_t seed) {
  ParamLayout layout = make_layout(cfg);
  Tensor flat({static_cast<int>(layout.total)});
  Rng rng = make_rng(seed, 0x6e657473); // "nets" stream
  for (const auto& seg : layout.segments) {
    if (seg.name.ends_with(".bias")) continue; // zero already
    int fan_in = seg.shape[1] * seg.shape[2] * seg.shape[3];
    double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (int64_t i = 0; i < seg.count; ++i) flat.data[static_cast<size_t>(seg.offset + i)] = normal(rng, 0.0, stddev);
  }
  return flat;
}

int build_forward(ad::Graph& g, const NetConfig& cfg, const std::string& prefix, int image) {
  check_config(cfg);
  const Shape& in_shape = g.shape_of(image);
  if (in_shape.size() != 3 || in_shape[0] != cfg.in_channels)
    fail(ErrCode::Shape, "net input must be {" + std::to_string(cfg.in_channels) + ",H,W}, got " + shape_str(in_shape));
  int div = 1 << cfg.depth;
  if (in_shape[1] % div != 0 || in_shape[2] % div != 0)
    fail(ErrCode::Shape, "net input spatial dims " + shape_str(in_shape) + " not divisible by 2^depth = " +
                             std::to_string(div));

  auto conv = [&](const ConvSpec& spec, int x) {
    int w = g.input(prefix + "." + spec.name + ".weight", {spec.oc, spec.ic, 3, 3});
    int b = g.input(prefix + "." + spec.name + ".bias", {spec.oc});
    return g.conv2d(x, w, b, spec.stride);
  };

  auto plan = conv_plan(cfg);
  size_t pi = 0;
  std::vector<int> enc_out; // per level, post-activation
  int cur = g.relu(conv(plan[pi++], image));
  enc_out.push_back(cur);
  for (int k = 1; k <= cfg.depth; ++k) {
    cur = g.relu(conv(plan[pi++], cur));
    enc_out.push_back(cur);
  }
  for (int k = cfg.depth - 1; k >= 0; --k) {
    int up = g.upsample2x(cur);
    int x = cfg.skip_connections ? g.concat({up, enc_out[static_cast<size_t>(k)]}) : up;
    cur = g.relu(conv(plan[pi++], x));
  }
  return g.sigmoid(conv(plan[pi++], cur));
}

void bind_params(ad::Bindings& inputs, const std::string& prefix, const ParamLayout& layout, const Tensor& flat) {
  if (flat.size() != layout.total)
    fail(ErrCode::Shape, "parameter vector length " + std::to_string(flat.size()) + " does not match layout total " +
                             std::to_string(layout.total));
  for (const auto& seg : layout.segments) {
    Tensor t(seg.shape);
    std::copy(flat.data.begin() + seg.offset, flat.data.begin() + seg.offset + seg.count, t.data.begin());
    inputs.insert_or_assign(prefix + "." + seg.name, std::move(t));
  }
}

Tensor flatten_segments(const ParamLayout& layout, const std::string& prefix,
                        const std::map<std::string, Tensor>& by_name) {
  Tensor flat({static_cast<int>(layout.total)});
  for (const auto& seg : layout.segments) {
    const Tensor& t = by_name.at(prefix + "." + seg.name);
    std::copy(t.data.begin(), t.data.end(), flat.data.begin() + seg.offset);
  }
  return flat;
}

std::vector<std::string> param_names(const ParamLayout& layout, const std::string& prefix) {
  std::vector<std::string> names;
  names.reserve(layout.segments.size());
  for (const auto& seg : layout.segments) names.push_back(prefix + "." + seg.name);
  return names;
}

Tensor forward(const NetConfig& cfg, const Tensor& params, const Tensor& image) {
  ad::Graph g;
  int img = g.input("image", image.shape);
  int out = build_forward(g, cfg, "net", img);
  ad::Bindings inputs{{"image", image}};
  bind_params(inputs, "net", make_layout(cfg), params);
  return ad::forward_eval(g, inputs, out);
}

namespace {

constexpr char kMagic[4] = {'D', 'S', 'C', 'K'};
constexpr uint32_t kVersion = 1;

template <class T>
void write_pod(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::ifstream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

} // namespace

void save_checkpoint(const std::string& path, const NetConfig& cfg, const Tensor& params) {
  ParamLayout layout = make_layout(cfg);
  if (params.size() != layout.total)
    fail(ErrCode::Shape, "checkpoint parameter count mismatch: " + std::to_string(params.size()) + " vs layout " +
                             std::to_string(layout.total));
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrCode::Io, "cannot open checkpoint for writing: " + path);
  f.write(kMagic, 4);
  write_pod(f, kVersion);
  write_pod(f, static_cast<int32_t>(cfg.in_channels));
  write_pod(f, static_cast<int32_t>(cfg.base_channels));
  write_pod(f, static_cast<int32_t>(cfg.depth));
  write_pod(f, static_cast<uint8_t>(cfg.skip_connections ? 1 : 0));
  write_pod(f, static_cast<uint64_t>(params.size()));
  f.write(reinterpret_cast<const char*>(params.data.data()),
          static_cast<std::streamsize>(params.data.size() * sizeof(double)));
  if (!f) fail(ErrCode::Io, "short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrCode::Io, "cannot open checkpoint: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0) fail(ErrCode::Io, "not a checkpoint file: " + path);
  uint32_t version = read_pod<uint32_t>(f);
  if (version != kVersion) fail(ErrCode::Io, "unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  ck.config.in_channels = read_pod<int32_t>(f);
  ck.config.base_channels = read_pod<int32_t>(f);
  ck.config.depth = read_pod<int32_t>(f);
  ck.config.skip_connections = read_pod<uint8_t>(f) != 0;
  uint64_t count = read_pod<uint64_t>(f);
  ParamLayout layout = make_layout(ck.config);
  if (static_cast<int64_t>(count) != layout.total)
    fail(ErrCode::Io, "checkpoint parameter count " + std::to_string(count) + " does not match config (expected " +
                          std::to_string(layout.total) + ")");
  ck.params = Tensor({static_cast<int>(count)});
  f.read(reinterpret_cast<char*>(ck.params.data.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!f) fail(ErrCode::Io, "truncated checkpoint: " + path);
  return ck;
}

} // namespace ds::nets
