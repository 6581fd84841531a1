// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include "hoplab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace hoplab::num {

std::string shape_str(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {
std::size_t checked_numel(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor: empty shape");
  std::size_t n = 1;
  for (std::size_t extent : shape) {
    if (extent == 0) throw ShapeError("tensor: zero extent in " + shape_str(shape));
    n *= extent;
  }
  return n;
}
}  // namespace

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(checked_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_numel(shape_) != data_.size()) {
    throw ShapeError("tensor: shape " + shape_str(shape_) + " holds " +
                     std::to_string(checked_numel(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
}

std::size_t Tensor::rows() const {
  if (shape_.size() == 1) return 1;
  return std::accumulate(shape_.begin(), shape_.end() - 1, std::size_t{1},
                         std::multiplies<>());
}

std::size_t Tensor::cols() const { return shape_.empty() ? 0 : shape_.back(); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

}  // namespace hoplab::num
