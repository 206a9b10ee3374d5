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

#include "bpdm/grid.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace bpdm {

Grid::Grid(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), values_(height * width, fill) {
  if (height == 0 || width == 0) throw std::invalid_argument("Grid: dimensions must be positive");
}

Grid::Grid(std::size_t height, std::size_t width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (height == 0 || width == 0) throw std::invalid_argument("Grid: dimensions must be positive");
  if (values_.size() != height * width)
    throw std::invalid_argument("Grid: expected " + std::to_string(height * width) +
                                " values, got " + std::to_string(values_.size()));
}

double Grid::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

bool Grid::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

Grid centered_dirac(std::size_t height, std::size_t width) {
  Grid g(height, width);
  g(height / 2, width / 2) = 1.0;
  return g;
}

Grid gaussian_kernel(std::size_t height, std::size_t width, double std_px) {
  if (!(std_px > 0.0)) throw std::invalid_argument("gaussian_kernel: std must be positive");
  Grid g(height, width);
  const double ch = static_cast<double>(height / 2);
  const double cw = static_cast<double>(width / 2);
  for (std::size_t r = 0; r < height; ++r)
    for (std::size_t c = 0; c < width; ++c) {
      const double dr = static_cast<double>(r) - ch;
      const double dc = static_cast<double>(c) - cw;
      g(r, c) = std::exp(-(dr * dr + dc * dc) / (2.0 * std_px * std_px));
    }
  const double total = g.sum();
  // Very small stds underflow everywhere except at the center.
  if (!(total > 0.0)) return centered_dirac(height, width);
  for (double& v : g.flat()) v /= total;
  return g;
}

Grid unflatten(std::span<const double> values, Shape shape) {
  return Grid(shape.height, shape.width, std::vector<double>(values.begin(), values.end()));
}

void require_finite(const Grid& grid, std::string_view what) {
  if (!grid.all_finite())
    throw std::invalid_argument(std::string(what) + ": contains non-finite values");
}

void require_same_shape(const Grid& a, const Grid& b, std::string_view what) {
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(what) + ": shape mismatch (" +
                                std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                                " vs " + std::to_string(b.height()) + "x" +
                                std::to_string(b.width()) + ")");
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace bpdm
