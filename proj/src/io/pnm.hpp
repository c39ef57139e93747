#pragma once

#include <string>

#include "core/tensor.hpp"

namespace ds::io {

/// Reads an 8-bit binary PGM (P5) or PPM (P6) into a {C,H,W} tensor with
/// values mapped to [0,1] by /maxval. C is 1 for P5 and 3 for P6.
Tensor read_pnm(const std::string& path);

/// Writes a {1,H,W} or {H,W} tensor in [0,1] as binary PGM, quantized to
/// round(v * 255).
void write_pgm(const std::string& path, const Tensor& image);

/// Writes a {3,H,W} tensor in [0,1] as binary PPM.
void write_ppm(const std::string& path, const Tensor& image);

/// Reads a binary mask PGM: pixels must be exactly 0 or 255 and map to
/// {0,1} in an {H,W} tensor.
Tensor read_mask(const std::string& path);

/// Writes an {H,W} binary tensor as a 0/255 PGM.
void write_mask(const std::string& path, const Tensor& mask);

} // namespace ds::io
