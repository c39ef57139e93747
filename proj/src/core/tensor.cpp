#include "core/tensor.hpp"

namespace ds {

std::string shape_str(const Shape& s) {
  std::string out = "{";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "}";
}

double dot(const Tensor& a, const Tensor& b) {
  if (!same_shape(a, b)) fail(ErrCode::Shape, "dot: shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
  return acc;
}

double norm2(const Tensor& a) { return std::sqrt(dot(a, a)); }

Tensor axpy(double c, const Tensor& x, const Tensor& y) {
  if (!same_shape(x, y)) fail(ErrCode::Shape, "axpy: shape mismatch");
  Tensor out = y;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += c * x.data[i];
  return out;
}

} // namespace ds
