#pragma once

#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "io/dataset.hpp"

namespace ds::synth {

/// A cropped defect: foreground texture {C,h,w} in [0,1] plus binary mask
/// {h,w} with at least one positive pixel.
struct DefectInstance {
  Tensor texture;
  Tensor mask;

  void validate() const;
  int height() const { return mask.shape[0]; }
  int width() const { return mask.shape[1]; }
  int64_t mask_area() const;
};

enum class AugKind { Photometric, Rotation, Shear, Scale };

const char* aug_kind_name(AugKind k);

/// One augmentation operation and its strength ranges. Defaults follow the
/// usual trivial-augment ranges; the scale sampler enforces a floor of 0.25
/// so masks cannot degenerate.
struct AugmentationSpec {
  AugKind kind = AugKind::Photometric;
  double photo_lo = 0.1, photo_hi = 1.9; // brightness/contrast/saturation factors
  double shear_lo = -0.3, shear_hi = 0.3;
  double rot_lo_deg = -30.0, rot_hi_deg = 30.0;
  double scale_lo = 0.0, scale_hi = 2.0;

  static constexpr double kScaleFloor = 0.25;
};

/// Concrete sampled strengths (identity defaults).
struct AugStrength {
  double brightness = 1.0, contrast = 1.0, saturation = 1.0;
  double rot_deg = 0.0;
  double shear_x = 0.0, shear_y = 0.0;
  double scale = 1.0;
};

AugStrength sample_strength(const AugmentationSpec& spec, Rng& rng);

/// Applies one operation at the given strength. Photometric ops clamp to
/// [0,1] and leave the mask untouched. Geometric ops map texture (bilinear)
/// and mask (nearest, re-binarized at 0.5) jointly about the instance
/// center onto a canvas sized to the transformed bounding box.
DefectInstance apply_strength(const DefectInstance& defect, AugKind kind, const AugStrength& s);

/// Same operation on a whole labeled image; the canvas keeps the original
/// size, so content can leave the frame (the mask may become empty).
io::LabeledImage apply_strength_whole(const io::LabeledImage& img, AugKind kind, const AugStrength& s);

/// Samples a strength and applies spec.kind. If the transform annihilates
/// the mask, the strength is resampled up to 5 times before erroring.
DefectInstance apply_augmentation(const DefectInstance& defect, const AugmentationSpec& spec, Rng& rng);

/// Applies each of the four operations independently with probability 0.5,
/// using the ranges from `ranges` (a single merged data source).
DefectInstance apply_merged(const DefectInstance& defect, const AugmentationSpec& ranges, Rng& rng);

} // namespace ds::synth
