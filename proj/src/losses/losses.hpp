#pragma once

#include <vector>

#include "core/eval.hpp"
#include "core/graph.hpp"
#include "core/tensor.hpp"

namespace ds::losses {

struct LossConfig {
  double bce_clamp_eps = 1e-7;
  double dice_smooth = 1.0;
  double gamma = 1e-4;         // l1 sparsity weight on the location map
  double pred_threshold = 0.5; // IoU binarization

  void validate() const;
};

/// Training loss: equal-weighted average of binary cross-entropy and soft
/// Dice loss against a binary target. Adds nodes to `g`, returns a scalar
/// node. Predictions are clamped to [eps, 1-eps] before the logs.
int seg_loss_node(ad::Graph& g, int pred, const Tensor& target, const LossConfig& cfg);

/// Numeric convenience wrapper around seg_loss_node.
double seg_loss(const Tensor& pred, const Tensor& target, const LossConfig& cfg);

/// One synthetic sample's contribution to the weighted lower-level loss:
/// alpha can be a graph node (differentiable path into the location net),
/// a constant weight, or absent (1.0).
struct SampleTerm {
  int loss = -1;            // scalar node
  int alpha_node = -1;      // optional scalar node
  double alpha_value = 1.0; // used when alpha_node < 0
};

/// Weighted sum over data sources of per-batch mean weighted sample losses:
/// sum_j eta_j * mean_i alpha_ij * loss_ij. `eta` is a {J} node, or -1 for
/// unit weights. Batches must be nonempty.
int lower_loss_node(ad::Graph& g, const std::vector<std::vector<SampleTerm>>& sources, int eta);

/// Mean validation loss plus gamma times the mean of per-pixel-normalized
/// l1 map terms (pass an empty vector when no location network is in play).
int upper_loss_node(ad::Graph& g, const std::vector<int>& val_losses, const std::vector<int>& l1_terms,
                    double gamma);

/// Per-pixel-normalized l1 norm of a location map node: |Z|_1 / (H*W).
int location_l1_node(ad::Graph& g, int zmap);

/// Intersection-over-union of {pred > threshold} with {target == 1}.
/// Both sets empty counts as a perfect 1.0.
double iou(const Tensor& pred, const Tensor& target, double threshold);

/// Counts for pooling IoU across images.
struct IouCounts {
  int64_t intersection = 0;
  int64_t union_ = 0;
};
IouCounts iou_counts(const Tensor& pred, const Tensor& target, double threshold);

void require_binary(const Tensor& target, const char* what);

} // namespace ds::losses
