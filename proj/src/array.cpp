// SPDX-License-Identifier: Apache-2.0
//
// cfchanpred: space-time-frequency channel prediction for cell-free massive MIMO
// Copyright (C) 2026 The cfchanpred authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "cfchanpred/array.hpp"

#include <cmath>
#include <utility>

#include "cfchanpred/error.hpp"

namespace cfcp {

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

static void check_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("array shape must have at least one dimension");
  for (auto d : shape)
    if (d == 0) throw DimensionError("array shape " + to_string(shape) + " has a zero dimension");
}

Array::Array(Shape shape, double fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  values_.assign(element_count(shape_), fill);
}

Array::Array(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  check_shape(shape_);
  if (element_count(shape_) != values_.size())
    throw DimensionError("shape " + to_string(shape_) + " needs " +
                         std::to_string(element_count(shape_)) + " values, got " +
                         std::to_string(values_.size()));
  for (double v : values_)
    if (!std::isfinite(v)) throw NumericError("array input contains a non-finite value");
}

Array Array::scalar(double value) { return Array({1}, std::vector<double>{value}); }

Array Array::identity(std::size_t n) {
  Array a({n, n});
  for (std::size_t i = 0; i < n; ++i) a.at(i, i) = 1.0;
  return a;
}

std::size_t Array::dim(std::size_t axis) const {
  if (axis >= shape_.size())
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + to_string(shape_));
  return shape_[axis];
}

double Array::at(std::size_t row, std::size_t col) const { return values_[row * shape_[1] + col]; }

double& Array::at(std::size_t row, std::size_t col) { return values_[row * shape_[1] + col]; }

Array Array::reshaped(Shape shape) const {
  if (element_count(shape) != values_.size())
    throw DimensionError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  Array out;
  out.shape_ = std::move(shape);
  check_shape(out.shape_);
  out.values_ = values_;
  return out;
}

}  // namespace cfcp
