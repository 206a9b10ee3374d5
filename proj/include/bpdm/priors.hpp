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

#ifndef BPDM_PRIORS_HPP_
#define BPDM_PRIORS_HPP_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bpdm {

/// Denoiser D(u, sigma) ~ E[x0 | x0 + sigma * noise = u]; the score is derived.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;

  virtual std::size_t dim() const = 0;
  virtual std::vector<double> denoise(std::span<const double> u, double sigma) const = 0;

  /// (denoise(u, sigma) - u) / sigma^2, i.e. grad log p_sigma(u) by Tweedie's formula.
  std::vector<double> score(std::span<const double> u, double sigma) const;
};

/// N(mean, std^2 I).
class GaussianPrior final : public ScoreModel {
 public:
  GaussianPrior(std::vector<double> mean, double std);
  GaussianPrior(std::size_t dim, double mean, double std)
      : GaussianPrior(std::vector<double>(dim, mean), std) {}

  std::size_t dim() const override { return mean_.size(); }
  std::vector<double> denoise(std::span<const double> u, double sigma) const override;

  /// log of the sigma-smoothed density N(u; mean, (std^2 + sigma^2) I); sigma = 0 gives the prior.
  double smoothed_log_density(std::span<const double> u, double sigma) const;

  const std::vector<double>& mean() const { return mean_; }
  double std() const { return std_; }

 private:
  std::vector<double> mean_;
  double std_;
};

struct GmmComponent {
  double weight;
  std::vector<double> mean;
  double std;
};

/// Mixture of isotropic Gaussians.
class GmmPrior final : public ScoreModel {
 public:
  explicit GmmPrior(std::vector<GmmComponent> components);

  std::size_t dim() const override { return components_.front().mean.size(); }
  std::vector<double> denoise(std::span<const double> u, double sigma) const override;

  /// Posterior component probabilities given u observed at noise level sigma.
  std::vector<double> responsibilities(std::span<const double> u, double sigma) const;
  double smoothed_log_density(std::span<const double> u, double sigma) const;

  const std::vector<GmmComponent>& components() const { return components_; }

 private:
  std::vector<double> log_joint(std::span<const double> u, double sigma) const;

  std::vector<GmmComponent> components_;
};

enum class Activation : std::uint32_t { silu = 0, relu = 1 };

struct DenseLayer {
  std::uint32_t rows = 0;  // output width
  std::uint32_t cols = 0;  // input width
  std::vector<float> weights;  // row-major rows x cols
  std::vector<float> bias;     // rows
};

/// MLP denoiser over [u ; log(sigma)/4] with a linear final layer.
class NeuralDenoiser final : public ScoreModel {
 public:
  NeuralDenoiser(std::uint32_t dim, Activation activation, std::vector<DenseLayer> layers);
  NeuralDenoiser(const NeuralDenoiser& other);

  std::size_t dim() const override { return dim_; }
  std::vector<double> denoise(std::span<const double> u, double sigma) const override;

  /// Sigma values outside [lo, hi] are clamped, with one warning per model.
  void set_sigma_range(double lo, double hi);
  std::optional<std::pair<double, double>> sigma_range() const { return sigma_range_; }

  Activation activation() const { return activation_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

 private:
  std::uint32_t dim_;
  Activation activation_;
  std::vector<DenseLayer> layers_;
  std::optional<std::pair<double, double>> sigma_range_;
  mutable std::atomic<bool> warned_{false};
};

/// Distinct failure modes of the BPDM weight loader.
class LoadError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, bad_version, truncated, bad_activation, dimension_chain };

  LoadError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Reads a BPDM weight file (little-endian):
///   "BPDM", u32 version = 1, u32 dim, u32 layer_count, u32 activation,
///   then per layer: u32 rows, u32 cols, rows*cols f32 weights, rows f32 biases.
NeuralDenoiser load_score_net(const std::filesystem::path& path);
void save_score_net(const std::filesystem::path& path, const NeuralDenoiser& net);

struct TestVector {
  std::vector<float> input;
  float sigma = 0.0f;
  std::vector<float> expected;
};

/// Reads a ".vec" sidecar: u32 count, then per vector dim f32 inputs, f32 sigma,
/// dim f32 expected outputs.
std::vector<TestVector> load_test_vectors(const std::filesystem::path& path, std::size_t dim);
void save_test_vectors(const std::filesystem::path& path, std::span<const TestVector> vectors);

}  // namespace bpdm

#endif  // BPDM_PRIORS_HPP_
