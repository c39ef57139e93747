#include "synth/augment.hpp"

#include <array>
#include <cmath>

#include "core/log.hpp"

namespace ds::synth {

void DefectInstance::validate() const {
  if (texture.rank() != 3) fail(ErrCode::Shape, "defect texture must be {C,h,w}");
  if (mask.rank() != 2) fail(ErrCode::Shape, "defect mask must be {h,w}");
  if (texture.shape[1] != mask.shape[0] || texture.shape[2] != mask.shape[1])
    fail(ErrCode::Shape, "defect texture and mask spatial dims differ");
  if (mask_area() < 1) fail(ErrCode::InvalidArg, "defect mask has no positive pixel");
}

int64_t DefectInstance::mask_area() const {
  int64_t n = 0;
  for (double v : mask.data) n += v == 1.0 ? 1 : 0;
  return n;
}

const char* aug_kind_name(AugKind k) {
  switch (k) {
    case AugKind::Photometric: return "photometric";
    case AugKind::Rotation: return "rotation";
    case AugKind::Shear: return "shear";
    case AugKind::Scale: return "scale";
  }
  return "?";
}

AugStrength sample_strength(const AugmentationSpec& spec, Rng& rng) {
  AugStrength s;
  switch (spec.kind) {
    case AugKind::Photometric:
      s.brightness = uniform(rng, spec.photo_lo, spec.photo_hi);
      s.contrast = uniform(rng, spec.photo_lo, spec.photo_hi);
      s.saturation = uniform(rng, spec.photo_lo, spec.photo_hi);
      break;
    case AugKind::Rotation:
      s.rot_deg = uniform(rng, spec.rot_lo_deg, spec.rot_hi_deg);
      break;
    case AugKind::Shear:
      s.shear_x = uniform(rng, spec.shear_lo, spec.shear_hi);
      s.shear_y = uniform(rng, spec.shear_lo, spec.shear_hi);
      break;
    case AugKind::Scale:
      s.scale = uniform(rng, std::max(spec.scale_lo, AugmentationSpec::kScaleFloor), spec.scale_hi);
      break;
  }
  return s;
}

namespace {

Tensor photometric(const Tensor& texture, const AugStrength& s) {
  const int C = texture.shape[0], H = texture.shape[1], W = texture.shape[2];
  Tensor out = texture;
  // brightness: x * f
  for (auto& v : out.data) v = std::clamp(v * s.brightness, 0.0, 1.0);
  // contrast: mean + f * (x - mean), per channel
  for (int c = 0; c < C; ++c) {
    double mean = 0.0;
    for (int i = 0; i < H * W; ++i) mean += out.data[static_cast<size_t>(c) * H * W + i];
    mean /= static_cast<double>(H * W);
    for (int i = 0; i < H * W; ++i) {
      double& v = out.data[static_cast<size_t>(c) * H * W + i];
      v = std::clamp(mean + s.contrast * (v - mean), 0.0, 1.0);
    }
  }
  // saturation: gray + f * (x - gray); no-op on single-channel images
  if (C == 3) {
    for (int i = 0; i < H * W; ++i) {
      double gray = 0.299 * out.data[i] + 0.587 * out.data[static_cast<size_t>(H) * W + i] +
                    0.114 * out.data[2 * static_cast<size_t>(H) * W + i];
      for (int c = 0; c < 3; ++c) {
        double& v = out.data[static_cast<size_t>(c) * H * W + i];
        v = std::clamp(gray + s.saturation * (v - gray), 0.0, 1.0);
      }
    }
  }
  return out;
}

struct Affine {
  // forward map q = M (x - c_in) + t, both coordinates (col, row)
  double m00, m01, m10, m11;
  double cx, cy;
  double tx, ty;

  std::array<double, 2> inverse(double qx, double qy) const {
    double det = m00 * m11 - m01 * m10;
    double ux = qx - tx, uy = qy - ty;
    double x = (m11 * ux - m01 * uy) / det + cx;
    double y = (-m10 * ux + m00 * uy) / det + cy;
    return {x, y};
  }
};

void geometry_matrix(AugKind kind, const AugStrength& s, double& m00, double& m01, double& m10, double& m11) {
  m00 = m11 = 1.0;
  m01 = m10 = 0.0;
  switch (kind) {
    case AugKind::Rotation: {
      double a = s.rot_deg * M_PI / 180.0;
      m00 = std::cos(a);
      m01 = -std::sin(a);
      m10 = std::sin(a);
      m11 = std::cos(a);
      break;
    }
    case AugKind::Shear:
      m01 = s.shear_x;
      m10 = s.shear_y;
      break;
    case AugKind::Scale:
      m00 = m11 = s.scale;
      break;
    case AugKind::Photometric:
      break;
  }
}

double bilinear(const Tensor& img, int c, double x, double y) {
  const int H = img.shape[1], W = img.shape[2];
  int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  double fx = x - x0, fy = y - y0;
  auto px = [&](int xi, int yi) -> double {
    if (xi < 0 || xi >= W || yi < 0 || yi >= H) return 0.0;
    return img.at(c, yi, xi);
  };
  return (1 - fy) * ((1 - fx) * px(x0, y0) + fx * px(x0 + 1, y0)) +
         fy * ((1 - fx) * px(x0, y0 + 1) + fx * px(x0 + 1, y0 + 1));
}

double nearest(const Tensor& mask, double x, double y) {
  const int H = mask.shape[0], W = mask.shape[1];
  int xi = static_cast<int>(std::lround(x)), yi = static_cast<int>(std::lround(y));
  if (xi < 0 || xi >= W || yi < 0 || yi >= H) return 0.0;
  return mask.at(yi, xi);
}

// Applies the geometric map to a texture/mask pair. With fixed_canvas the
// output keeps the input dims (whole-image case); otherwise the canvas is
// the transformed bounding box.
void warp(AugKind kind, const AugStrength& s, const Tensor& texture, const Tensor& mask, bool fixed_canvas,
          Tensor& out_tex, Tensor& out_mask) {
  const int C = texture.shape[0], H = texture.shape[1], W = texture.shape[2];
  Affine af{};
  geometry_matrix(kind, s, af.m00, af.m01, af.m10, af.m11);
  af.cx = (W - 1) / 2.0;
  af.cy = (H - 1) / 2.0;

  int out_h = H, out_w = W;
  if (fixed_canvas) {
    af.tx = af.cx;
    af.ty = af.cy;
  } else {
    double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    bool first = true;
    for (double yc : {0.0, static_cast<double>(H - 1)})
      for (double xc : {0.0, static_cast<double>(W - 1)}) {
        double qx = af.m00 * (xc - af.cx) + af.m01 * (yc - af.cy);
        double qy = af.m10 * (xc - af.cx) + af.m11 * (yc - af.cy);
        if (first || qx < min_x) min_x = first ? qx : std::min(min_x, qx);
        if (first || qx > max_x) max_x = first ? qx : std::max(max_x, qx);
        if (first || qy < min_y) min_y = first ? qy : std::min(min_y, qy);
        if (first || qy > max_y) max_y = first ? qy : std::max(max_y, qy);
        first = false;
      }
    out_w = std::max(1, static_cast<int>(std::ceil(max_x - min_x)) + 1);
    out_h = std::max(1, static_cast<int>(std::ceil(max_y - min_y)) + 1);
    af.tx = -min_x;
    af.ty = -min_y;
  }

  out_tex = Tensor::zeros({C, out_h, out_w});
  out_mask = Tensor::zeros({out_h, out_w});
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      auto [sx, sy] = af.inverse(x, y);
      for (int c = 0; c < C; ++c) out_tex.at(c, y, x) = bilinear(texture, c, sx, sy);
      out_mask.at(y, x) = nearest(mask, sx, sy) >= 0.5 ? 1.0 : 0.0;
    }
}

} // namespace

DefectInstance apply_strength(const DefectInstance& defect, AugKind kind, const AugStrength& s) {
  defect.validate();
  if (kind == AugKind::Photometric) return {photometric(defect.texture, s), defect.mask};
  DefectInstance out;
  warp(kind, s, defect.texture, defect.mask, false, out.texture, out.mask);
  return out;
}

io::LabeledImage apply_strength_whole(const io::LabeledImage& img, AugKind kind, const AugStrength& s) {
  io::LabeledImage out;
  out.stem = img.stem;
  if (kind == AugKind::Photometric) {
    out.image = photometric(img.image, s);
    out.label = img.label;
    return out;
  }
  warp(kind, s, img.image, img.label, true, out.image, out.label);
  return out;
}

DefectInstance apply_augmentation(const DefectInstance& defect, const AugmentationSpec& spec, Rng& rng) {
  for (int attempt = 0; attempt < 5; ++attempt) {
    AugStrength s = sample_strength(spec, rng);
    DefectInstance out = apply_strength(defect, spec.kind, s);
    if (out.mask_area() >= 1) return out;
  }
  fail(ErrCode::InvalidArg, std::string("augmentation '") + aug_kind_name(spec.kind) +
                                "' annihilated the defect mask after 5 attempts");
}

DefectInstance apply_merged(const DefectInstance& defect, const AugmentationSpec& ranges, Rng& rng) {
  DefectInstance out = defect;
  for (AugKind kind : {AugKind::Photometric, AugKind::Rotation, AugKind::Shear, AugKind::Scale}) {
    if (uniform(rng, 0.0, 1.0) >= 0.5) continue;
    AugmentationSpec spec = ranges;
    spec.kind = kind;
    out = apply_augmentation(out, spec, rng);
  }
  return out;
}

} // namespace ds::synth
