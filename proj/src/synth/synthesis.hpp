#pragma once

#include <functional>
#include <optional>

#include "core/graph.hpp"
#include "synth/library.hpp"

namespace ds::synth {

/// A pasted training sample: image and label after the paste, the pasted
/// region mask, and bookkeeping for the bi-level machinery.
struct SyntheticSample {
  Tensor image;       // X~ {C,H,W}
  Tensor label;       // Y~ {H,W} binary
  Tensor pasted_mask; // {H,W} binary, the region Omega
  int source_index = 0;
  int paste_row = -1, paste_col = -1; // top-left of the pasted box
  double sample_weight = 1.0;         // alpha
  int target_index = -1;              // index into the training set
  int defect_index = -1;              // index into the defect library
  bool location_fallback = false;     // no suitable pixel met the threshold
  bool overlapped_existing = false;   // paste covered pre-existing defect pixels
};

struct PasteLocation {
  int row = 0, col = 0;
  bool fallback = false;
};

/// Draws a paste location uniformly from all in-bounds placements whose box
/// center pixel of Z is >= threshold. Falls back to uniform over all
/// placements when that set is empty.
PasteLocation sample_paste_location(const Tensor& zmap, int defect_h, int defect_w, Rng& rng, double threshold);

/// Direct-replacement paste of a defect at top-left (row,col): inside the
/// placed mask the image takes the defect texture and the label becomes 1;
/// everything else is untouched.
SyntheticSample paste(const DefectInstance& defect, const io::LabeledImage& target, int row, int col);

/// alpha: mean of the location map over the pasted region.
double sample_weight(const Tensor& zmap, const Tensor& pasted_mask);

/// Differentiable version: zmap is a graph node (the location net output
/// {1,H,W} or {H,W}); the pasted mask enters as a constant.
int sample_weight_node(ad::Graph& g, int zmap, const Tensor& pasted_mask);

/// Center-crops a defect so it fits strictly inside an HxW image, keeping
/// the crop window centered on the mask bounding box. Logs when it fires.
DefectInstance fit_defect(const DefectInstance& defect, int img_h, int img_w);

using BatchAugmenter = std::function<DefectInstance(const DefectInstance&, Rng&)>;
BatchAugmenter single_op_augmenter(const AugmentationSpec& spec);
BatchAugmenter merged_augmenter(const AugmentationSpec& ranges);

/// Computes the location map Z for a target image (e.g. a location-net
/// forward pass or a ground-truth product mask). An unset function means
/// Z == 1 everywhere and unit sample weights.
using LocationMapFn = std::function<Tensor(const io::LabeledImage&, int target_index)>;

/// One synthesis step: samples B defects and B target images once, then
/// produces J batches differing only by augmentation. Per-sample RNG
/// streams derive from (seed, step, j, i), so results are independent of
/// evaluation order. With a location map, locations are threshold-sampled
/// from Z and alpha = mean of Z over the pasted region; otherwise alpha = 1.
std::vector<std::vector<SyntheticSample>> synthesize_batches(const DefectLibrary& lib,
                                                             const std::vector<io::LabeledImage>& training,
                                                             const std::vector<BatchAugmenter>& augmenters, int batch,
                                                             const LocationMapFn& location_map, double threshold,
                                                             uint64_t seed, uint64_t step);

} // namespace ds::synth
