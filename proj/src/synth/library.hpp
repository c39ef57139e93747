#pragma once

#include <string>
#include <vector>

#include "io/dataset.hpp"
#include "synth/augment.hpp"

namespace ds::synth {

struct Provenance {
  std::string source_stem;
  int row0 = 0, col0 = 0, rows = 0, cols = 0; // crop rectangle
};

/// The source defect library: one instance per 4-connected component of each
/// training label mask.
struct DefectLibrary {
  std::vector<DefectInstance> instances;
  std::vector<Provenance> provenance;

  size_t size() const { return instances.size(); }
};

/// Cuts all defect instances out of the training set. The tight component
/// bounding box is expanded by `padding` pixels and clipped to the image;
/// the mask crop contains only the component's own pixels.
DefectLibrary build_library(const std::vector<io::LabeledImage>& training, int padding = 0);

/// One directory per instance with texture, mask and a provenance record.
void export_library(const std::string& dir, const DefectLibrary& lib);

} // namespace ds::synth
