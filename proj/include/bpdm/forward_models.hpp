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

#ifndef BPDM_FORWARD_MODELS_HPP_
#define BPDM_FORWARD_MODELS_HPP_

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "bpdm/grid.hpp"

namespace bpdm {

class ConvolutionOperator;

/// Linear map R^input_dim -> R^output_dim with its transpose.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual std::size_t input_dim() const = 0;
  virtual std::size_t output_dim() const = 0;
  virtual void apply_to(std::span<const double> v, std::span<double> out) const = 0;
  virtual void adjoint_to(std::span<const double> w, std::span<double> out) const = 0;

  /// Non-null when this operator is a circular convolution (downcast hook for the
  /// frequency-domain solvers).
  virtual const ConvolutionOperator* as_convolution() const { return nullptr; }

  std::vector<double> apply(std::span<const double> v) const;
  std::vector<double> adjoint(std::span<const double> w) const;
};

struct NoiseModel {
  double sigma_y = 1.0;

  NoiseModel() = default;
  explicit NoiseModel(double sigma);
};

class DenseOperator final : public LinearOperator {
 public:
  /// `values` is row-major rows x cols.
  DenseOperator(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t input_dim() const override { return cols_; }
  std::size_t output_dim() const override { return rows_; }
  void apply_to(std::span<const double> v, std::span<double> out) const override;
  void adjoint_to(std::span<const double> w, std::span<double> out) const override;

  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

std::unique_ptr<DenseOperator> dense_operator(std::size_t rows, std::size_t cols,
                                              std::vector<double> values);

/// Periodic 2-D convolution out = embed(v) (*) filter on a fixed grid.
///
/// `filter` lives on the output grid with its origin at (0, 0). Inputs of shape
/// `input_shape` are embedded with entry (i, j) placed at
/// ((i - center.height) mod H, (j - center.width) mod W). With input_shape equal
/// to the grid and center (0, 0) this is A(theta) acting on images; with a kernel
/// shaped input and center (floor(kh/2), floor(kw/2)) it is B(x) acting on kernels.
class ConvolutionOperator final : public LinearOperator {
 public:
  ConvolutionOperator(const Grid& filter, Shape input_shape, Shape center);

  std::size_t input_dim() const override { return input_shape_.size(); }
  std::size_t output_dim() const override { return grid_.size(); }
  void apply_to(std::span<const double> v, std::span<double> out) const override;
  void adjoint_to(std::span<const double> w, std::span<double> out) const override;
  const ConvolutionOperator* as_convolution() const override { return this; }

  Shape grid_shape() const { return grid_; }
  Shape input_shape() const { return input_shape_; }

  /// True when the embedding is a permutation, i.e. the normal operator is
  /// diagonal in the DFT basis after a circular shift.
  bool spectrally_solvable() const { return input_shape_ == grid_; }

  /// Exact solution of (a * A^T A + b * I) z = rhs; requires spectrally_solvable().
  std::vector<double> solve_shifted_normal(std::span<const double> rhs, double a, double b) const;

 private:
  void embed(std::span<const double> v, std::span<double> full) const;
  void extract(std::span<const double> full, std::span<double> v) const;

  Shape grid_;
  Shape input_shape_;
  Shape center_;
  std::vector<std::complex<double>> spectrum_;
};

/// Places `kernel` on an image-sized grid with its center at the origin (wrapping).
Grid embed_kernel(const Grid& kernel, Shape grid_shape);

/// Circular convolution of image with kernel centered at (floor(kh/2), floor(kw/2)).
Grid conv2d_circular(const Grid& image, const Grid& kernel);

/// Adjoint of conv2d_circular(., kernel): circular correlation with kernel.
Grid conv2d_adjoint(const Grid& residual, const Grid& kernel);

/// A(theta): convolution by `kernel` acting on images of `image_shape`.
std::unique_ptr<ConvolutionOperator> convolution_by_kernel(const Grid& kernel, Shape image_shape);

/// B(x): maps a kernel v of `kernel_shape` to conv2d_circular(image, v).
std::unique_ptr<ConvolutionOperator> as_theta_operator(const Grid& image, Shape kernel_shape);

/// Forward model y = A(theta) x + e that is linear in x for fixed theta and
/// linear in theta for fixed x.
class BilinearModel {
 public:
  virtual ~BilinearModel() = default;

  virtual Shape image_shape() const = 0;
  virtual Shape theta_shape() const = 0;
  virtual Shape measurement_shape() const = 0;

  /// A(theta), acting on x.
  virtual std::unique_ptr<LinearOperator> image_operator(const Grid& theta) const = 0;
  /// B(x), acting on theta, with B(x) theta = A(theta) x.
  virtual std::unique_ptr<LinearOperator> theta_operator(const Grid& image) const = 0;

  Grid forward(const Grid& image, const Grid& theta) const;
};

class CircularBlurModel final : public BilinearModel {
 public:
  CircularBlurModel(Shape image_shape, Shape kernel_shape);

  Shape image_shape() const override { return image_; }
  Shape theta_shape() const override { return kernel_; }
  Shape measurement_shape() const override { return image_; }
  std::unique_ptr<LinearOperator> image_operator(const Grid& theta) const override;
  std::unique_ptr<LinearOperator> theta_operator(const Grid& image) const override;

 private:
  Shape image_;
  Shape kernel_;
};

/// y_i = sum_{j,k} T(i, j, k) x_j theta_k with an explicit dense tensor.
class DenseBilinearModel final : public BilinearModel {
 public:
  /// `tensor` is indexed [(i * n + j) * b + k] for i < m, j < n, k < b.
  DenseBilinearModel(Shape measurement, Shape image, Shape theta, std::vector<double> tensor);

  /// A(theta) = theta_0 * matrix for a scalar theta.
  static DenseBilinearModel scalar_gain(std::size_t rows, std::size_t cols,
                                        std::vector<double> matrix);

  Shape image_shape() const override { return image_; }
  Shape theta_shape() const override { return theta_; }
  Shape measurement_shape() const override { return measurement_; }
  std::unique_ptr<LinearOperator> image_operator(const Grid& theta) const override;
  std::unique_ptr<LinearOperator> theta_operator(const Grid& image) const override;

 private:
  Shape measurement_;
  Shape image_;
  Shape theta_;
  std::vector<double> tensor_;
};

}  // namespace bpdm

#endif  // BPDM_FORWARD_MODELS_HPP_
