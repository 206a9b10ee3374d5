// Copyright 2026 The bpdm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BPDM_GRID_HPP_
#define BPDM_GRID_HPP_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace bpdm {

struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const { return height * width; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Row-major 2-D array of reals; holds images as well as blur kernels.
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, double fill = 0.0);
  Grid(std::size_t height, std::size_t width, std::vector<double> values);
  explicit Grid(Shape shape, double fill = 0.0) : Grid(shape.height, shape.width, fill) {}

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  Shape shape() const { return {height_, width_}; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
  double operator()(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> flat() { return values_; }
  std::span<const double> flat() const { return values_; }
  const std::vector<double>& values() const { return values_; }

  double sum() const;
  bool all_finite() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
};

/// Unit impulse at the geometric center (floor(h/2), floor(w/2)).
Grid centered_dirac(std::size_t height, std::size_t width);

/// Isotropic Gaussian of the given std (pixels) centered like `centered_dirac`, summing to 1.
Grid gaussian_kernel(std::size_t height, std::size_t width, double std_px);

Grid unflatten(std::span<const double> values, Shape shape);

/// Throws std::invalid_argument naming `what` when any entry is NaN or infinite.
void require_finite(const Grid& grid, std::string_view what);
void require_same_shape(const Grid& a, const Grid& b, std::string_view what);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace bpdm

#endif  // BPDM_GRID_HPP_
