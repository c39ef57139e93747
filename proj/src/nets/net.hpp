#pragma once

#include <string>
#include <vector>

#include "core/eval.hpp"
#include "core/graph.hpp"
#include "core/tensor.hpp"

namespace ds::nets {

/// Desk-scale encoder-decoder with a per-pixel sigmoid head. Serves as both
/// the segmentation network and the pasting-location network.
struct NetConfig {
  int in_channels = 1;
  int base_channels = 8;
  int depth = 2; // levels of x2 downsampling
  bool skip_connections = true;

  bool operator==(const NetConfig&) const = default;
};

struct ParamSegment {
  std::string name; // e.g. "enc0.weight"
  Shape shape;
  int64_t offset = 0;
  int64_t count = 0;
};

/// Deterministic flat layout of all trainable parameters implied by a config.
struct ParamLayout {
  std::vector<ParamSegment> segments;
  int64_t total = 0;

  const ParamSegment& find(const std::string& name) const;
};

ParamLayout make_layout(const NetConfig& cfg);

/// He-normal conv weights (std = sqrt(2 / fan_in)), zero biases.
Tensor init_params(const NetConfig& cfg, uint64_t seed);

/// Adds the network body to `g`, reading the image from node `image` and
/// declaring one input per parameter segment named "<prefix>.<segment>".
/// Returns the sigmoid output node {1,H,W}. Spatial dims must be divisible
/// by 2^depth.
int build_forward(ad::Graph& g, const NetConfig& cfg, const std::string& prefix, int image);

/// Binds a flat parameter vector onto the named inputs declared by
/// build_forward.
void bind_params(ad::Bindings& inputs, const std::string& prefix, const ParamLayout& layout, const Tensor& flat);

/// Gathers per-segment tensors (e.g. gradients keyed by input name) back
/// into a flat vector in layout order.
Tensor flatten_segments(const ParamLayout& layout, const std::string& prefix,
                        const std::map<std::string, Tensor>& by_name);

/// Names of all parameter inputs for `prefix` in layout order.
std::vector<std::string> param_names(const ParamLayout& layout, const std::string& prefix);

/// Convenience: single forward evaluation of the network on one image.
Tensor forward(const NetConfig& cfg, const Tensor& params, const Tensor& image);

// Checkpoint file: fixed header (format version, config, parameter count)
// followed by little-endian 64-bit floats in layout order. Round-trips
// bit-exactly.
void save_checkpoint(const std::string& path, const NetConfig& cfg, const Tensor& params);
struct Checkpoint {
  NetConfig config;
  Tensor params;
};
Checkpoint load_checkpoint(const std::string& path);

} // namespace ds::nets
