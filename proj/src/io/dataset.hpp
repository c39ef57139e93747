#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace ds::io {

/// An image X ({C,H,W}, values in [0,1]) with its pixel-wise binary defect
/// mask Y ({H,W}). Defect-free images carry an all-zero mask.
struct LabeledImage {
  std::string stem;
  Tensor image;
  Tensor label;

  bool has_defect() const {
    for (double v : label.data)
      if (v == 1.0) return true;
    return false;
  }
};

struct Dataset {
  std::vector<LabeledImage> train, val, test;
  int channels = 1;
};

/// Directory layout: images/*.pgm|*.ppm, masks/*.pgm (0/255), splits.json
/// with {"train": [stems], "val": [...], "test": [...]}. A missing mask file
/// means a clean image.
Dataset load_dataset(const std::string& dir);

/// Loads product-region masks from <dir>/ground_truth_product (present only
/// in generated benchmarks). Keyed by stem.
std::map<std::string, Tensor> load_product_masks(const std::string& dir);

void save_labeled_image(const std::string& dir, const LabeledImage& img);
void write_splits(const std::string& dir, const std::vector<std::string>& train, const std::vector<std::string>& val,
                  const std::vector<std::string>& test);

} // namespace ds::io
