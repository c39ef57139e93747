#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace ds {

using Shape = std::vector<int>;

inline int64_t numel(const Shape& s) {
  int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s);

/// Dense row-major tensor of 64-bit floats. Rank 1 vectors are {n},
/// images are {channels, height, width}, matrices {rows, cols}.
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape s) : shape(std::move(s)), data(static_cast<size_t>(numel(shape)), 0.0) { validate_shape(); }
  Tensor(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    validate_shape();
    if (static_cast<int64_t>(data.size()) != numel(shape))
      fail(ErrCode::Shape, "tensor data length " + std::to_string(data.size()) +
                               " does not match shape " + shape_str(shape));
  }
  Tensor(Shape s, std::initializer_list<double> d) : Tensor(std::move(s), std::vector<double>(d)) {}

  static Tensor zeros(Shape s) { return Tensor(std::move(s)); }
  static Tensor full(Shape s, double v) {
    Tensor t(std::move(s));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }
  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  int rank() const { return static_cast<int>(shape.size()); }
  int64_t size() const { return static_cast<int64_t>(data.size()); }

  double& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

  /// Element access for rank-2 {r,c} and rank-3 {c,y,x} tensors.
  double& at(int i, int j) { return data[static_cast<size_t>(i) * shape[1] + j]; }
  double at(int i, int j) const { return data[static_cast<size_t>(i) * shape[1] + j]; }
  double& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
  }
  double at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
  }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void require_finite(const std::string& what) const {
    if (!all_finite()) fail(ErrCode::NonFinite, "non-finite values in " + what);
  }

private:
  void validate_shape() const {
    for (int d : shape)
      if (d <= 0) fail(ErrCode::Shape, "non-positive dimension in shape " + shape_str(shape));
  }
};

inline bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

double dot(const Tensor& a, const Tensor& b);
double norm2(const Tensor& a);
Tensor axpy(double a, const Tensor& x, const Tensor& y); // a*x + y

} // namespace ds
