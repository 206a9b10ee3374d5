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

#include "bpdm/forward_models.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fft.hpp"

namespace bpdm {
namespace {

std::size_t wrap(std::size_t i, std::size_t center, std::size_t n) {
  return (i + n - center % n) % n;
}

void require_fits(Shape inner, Shape outer, const char* what) {
  if (inner.height > outer.height || inner.width > outer.width)
    throw std::invalid_argument(std::string(what) + ": kernel " + std::to_string(inner.height) +
                                "x" + std::to_string(inner.width) + " larger than image " +
                                std::to_string(outer.height) + "x" + std::to_string(outer.width));
}

Shape kernel_center(Shape kernel) { return {kernel.height / 2, kernel.width / 2}; }

}  // namespace

std::vector<double> LinearOperator::apply(std::span<const double> v) const {
  std::vector<double> out(output_dim());
  apply_to(v, out);
  return out;
}

std::vector<double> LinearOperator::adjoint(std::span<const double> w) const {
  std::vector<double> out(input_dim());
  adjoint_to(w, out);
  return out;
}

NoiseModel::NoiseModel(double sigma) : sigma_y(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("NoiseModel: sigma_y must be positive and finite");
}

DenseOperator::DenseOperator(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("DenseOperator: empty matrix");
  if (values_.size() != rows * cols)
    throw std::invalid_argument("DenseOperator: expected rows*cols values");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("DenseOperator: non-finite entry");
}

void DenseOperator::apply_to(std::span<const double> v, std::span<double> out) const {
  if (v.size() != cols_ || out.size() != rows_)
    throw std::invalid_argument("DenseOperator::apply: dimension mismatch");
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    const double* row = values_.data() + r * cols_;
    for (std::size_t c = 0; c < cols_; ++c) s += row[c] * v[c];
    out[r] = s;
  }
}

void DenseOperator::adjoint_to(std::span<const double> w, std::span<double> out) const {
  if (w.size() != rows_ || out.size() != cols_)
    throw std::invalid_argument("DenseOperator::adjoint: dimension mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* row = values_.data() + r * cols_;
    for (std::size_t c = 0; c < cols_; ++c) out[c] += row[c] * w[r];
  }
}

std::unique_ptr<DenseOperator> dense_operator(std::size_t rows, std::size_t cols,
                                              std::vector<double> values) {
  return std::make_unique<DenseOperator>(rows, cols, std::move(values));
}

ConvolutionOperator::ConvolutionOperator(const Grid& filter, Shape input_shape, Shape center)
    : grid_(filter.shape()), input_shape_(input_shape), center_(center) {
  require_fits(input_shape, grid_, "ConvolutionOperator");
  if (input_shape.size() == 0) throw std::invalid_argument("ConvolutionOperator: empty input");
  require_finite(filter, "ConvolutionOperator filter");
  spectrum_ = fft::forward(filter.flat(), grid_);
}

void ConvolutionOperator::embed(std::span<const double> v, std::span<double> full) const {
  std::fill(full.begin(), full.end(), 0.0);
  for (std::size_t i = 0; i < input_shape_.height; ++i) {
    const std::size_t r = wrap(i, center_.height, grid_.height);
    for (std::size_t j = 0; j < input_shape_.width; ++j) {
      const std::size_t c = wrap(j, center_.width, grid_.width);
      full[r * grid_.width + c] += v[i * input_shape_.width + j];
    }
  }
}

void ConvolutionOperator::extract(std::span<const double> full, std::span<double> v) const {
  for (std::size_t i = 0; i < input_shape_.height; ++i) {
    const std::size_t r = wrap(i, center_.height, grid_.height);
    for (std::size_t j = 0; j < input_shape_.width; ++j) {
      const std::size_t c = wrap(j, center_.width, grid_.width);
      v[i * input_shape_.width + j] = full[r * grid_.width + c];
    }
  }
}

void ConvolutionOperator::apply_to(std::span<const double> v, std::span<double> out) const {
  if (v.size() != input_dim() || out.size() != output_dim())
    throw std::invalid_argument("ConvolutionOperator::apply: dimension mismatch");
  std::vector<double> full(grid_.size());
  embed(v, full);
  auto s = fft::forward(full, grid_);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= spectrum_[i];
  fft::inverse(s, grid_, out);
}

void ConvolutionOperator::adjoint_to(std::span<const double> w, std::span<double> out) const {
  if (w.size() != output_dim() || out.size() != input_dim())
    throw std::invalid_argument("ConvolutionOperator::adjoint: dimension mismatch");
  auto s = fft::forward(w, grid_);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= std::conj(spectrum_[i]);
  std::vector<double> full(grid_.size());
  fft::inverse(s, grid_, full);
  extract(full, out);
}

std::vector<double> ConvolutionOperator::solve_shifted_normal(std::span<const double> rhs,
                                                              double a, double b) const {
  if (!spectrally_solvable())
    throw std::invalid_argument("solve_shifted_normal: input embedding is not a permutation");
  if (rhs.size() != input_dim()) throw std::invalid_argument("solve_shifted_normal: bad rhs");
  if (!(b > 0.0) || a < 0.0) throw std::invalid_argument("solve_shifted_normal: need a>=0, b>0");
  std::vector<double> full(grid_.size());
  embed(rhs, full);
  auto s = fft::forward(full, grid_);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] /= a * std::norm(spectrum_[i]) + b;
  fft::inverse(s, grid_, full);
  std::vector<double> z(input_dim());
  extract(full, z);
  return z;
}

Grid embed_kernel(const Grid& kernel, Shape grid_shape) {
  require_fits(kernel.shape(), grid_shape, "embed_kernel");
  Grid full(grid_shape);
  const Shape c = kernel_center(kernel.shape());
  for (std::size_t i = 0; i < kernel.height(); ++i)
    for (std::size_t j = 0; j < kernel.width(); ++j)
      full(wrap(i, c.height, grid_shape.height), wrap(j, c.width, grid_shape.width)) +=
          kernel(i, j);
  return full;
}

std::unique_ptr<ConvolutionOperator> convolution_by_kernel(const Grid& kernel, Shape image_shape) {
  require_finite(kernel, "convolution kernel");
  return std::make_unique<ConvolutionOperator>(embed_kernel(kernel, image_shape), image_shape,
                                               Shape{0, 0});
}

std::unique_ptr<ConvolutionOperator> as_theta_operator(const Grid& image, Shape kernel_shape) {
  require_finite(image, "as_theta_operator image");
  require_fits(kernel_shape, image.shape(), "as_theta_operator");
  return std::make_unique<ConvolutionOperator>(image, kernel_shape, kernel_center(kernel_shape));
}

Grid conv2d_circular(const Grid& image, const Grid& kernel) {
  require_finite(image, "conv2d_circular image");
  auto op = convolution_by_kernel(kernel, image.shape());
  return unflatten(op->apply(image.flat()), image.shape());
}

Grid conv2d_adjoint(const Grid& residual, const Grid& kernel) {
  require_finite(residual, "conv2d_adjoint residual");
  auto op = convolution_by_kernel(kernel, residual.shape());
  return unflatten(op->adjoint(residual.flat()), residual.shape());
}

Grid BilinearModel::forward(const Grid& image, const Grid& theta) const {
  auto op = image_operator(theta);
  return unflatten(op->apply(image.flat()), measurement_shape());
}

CircularBlurModel::CircularBlurModel(Shape image_shape, Shape kernel_shape)
    : image_(image_shape), kernel_(kernel_shape) {
  if (image_shape.size() == 0 || kernel_shape.size() == 0)
    throw std::invalid_argument("CircularBlurModel: empty shape");
  require_fits(kernel_shape, image_shape, "CircularBlurModel");
}

std::unique_ptr<LinearOperator> CircularBlurModel::image_operator(const Grid& theta) const {
  if (theta.shape() != kernel_) throw std::invalid_argument("image_operator: kernel shape");
  return convolution_by_kernel(theta, image_);
}

std::unique_ptr<LinearOperator> CircularBlurModel::theta_operator(const Grid& image) const {
  if (image.shape() != image_) throw std::invalid_argument("theta_operator: image shape");
  return as_theta_operator(image, kernel_);
}

DenseBilinearModel::DenseBilinearModel(Shape measurement, Shape image, Shape theta,
                                       std::vector<double> tensor)
    : measurement_(measurement), image_(image), theta_(theta), tensor_(std::move(tensor)) {
  if (tensor_.size() != measurement.size() * image.size() * theta.size())
    throw std::invalid_argument("DenseBilinearModel: tensor size must be m*n*b");
  if (tensor_.empty()) throw std::invalid_argument("DenseBilinearModel: empty tensor");
  for (double v : tensor_)
    if (!std::isfinite(v)) throw std::invalid_argument("DenseBilinearModel: non-finite entry");
}

DenseBilinearModel DenseBilinearModel::scalar_gain(std::size_t rows, std::size_t cols,
                                                   std::vector<double> matrix) {
  return DenseBilinearModel({1, rows}, {1, cols}, {1, 1}, std::move(matrix));
}

std::unique_ptr<LinearOperator> DenseBilinearModel::image_operator(const Grid& theta) const {
  if (theta.shape() != theta_) throw std::invalid_argument("image_operator: theta shape");
  const std::size_t m = measurement_.size(), n = image_.size(), b = theta_.size();
  std::vector<double> a(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < b; ++k) s += tensor_[(i * n + j) * b + k] * theta[k];
      a[i * n + j] = s;
    }
  return dense_operator(m, n, std::move(a));
}

std::unique_ptr<LinearOperator> DenseBilinearModel::theta_operator(const Grid& image) const {
  if (image.shape() != image_) throw std::invalid_argument("theta_operator: image shape");
  const std::size_t m = measurement_.size(), n = image_.size(), b = theta_.size();
  std::vector<double> a(m * b, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < b; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += tensor_[(i * n + j) * b + k] * image[j];
      a[i * b + k] = s;
    }
  return dense_operator(m, b, std::move(a));
}

}  // namespace bpdm
