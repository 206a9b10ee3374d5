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

#include "bpdm/priors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bpdm {
namespace {

void require_sigma(double sigma, const char* who) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument(std::string(who) + ": sigma must be positive and finite");
}

void require_dim(std::span<const double> u, std::size_t dim, const char* who) {
  if (u.size() != dim)
    throw std::invalid_argument(std::string(who) + ": expected length " + std::to_string(dim) +
                                ", got " + std::to_string(u.size()));
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double log_isotropic_normal(double sq_dist, std::size_t dim, double variance) {
  return -0.5 * sq_dist / variance -
         0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi * variance);
}

}  // namespace

std::vector<double> ScoreModel::score(std::span<const double> u, double sigma) const {
  std::vector<double> s = denoise(u, sigma);
  const double inv = 1.0 / (sigma * sigma);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = (s[i] - u[i]) * inv;
  return s;
}

GaussianPrior::GaussianPrior(std::vector<double> mean, double std)
    : mean_(std::move(mean)), std_(std) {
  if (mean_.empty()) throw std::invalid_argument("GaussianPrior: empty mean");
  if (!(std > 0.0) || !std::isfinite(std))
    throw std::invalid_argument("GaussianPrior: std must be positive");
}

std::vector<double> GaussianPrior::denoise(std::span<const double> u, double sigma) const {
  require_sigma(sigma, "gaussian_denoise");
  require_dim(u, dim(), "gaussian_denoise");
  const double s2 = std_ * std_;
  const double v2 = sigma * sigma;
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = (s2 * u[i] + v2 * mean_[i]) / (s2 + v2);
  return out;
}

double GaussianPrior::smoothed_log_density(std::span<const double> u, double sigma) const {
  require_dim(u, dim(), "GaussianPrior::smoothed_log_density");
  return log_isotropic_normal(squared_distance(u, mean_), dim(), std_ * std_ + sigma * sigma);
}

GmmPrior::GmmPrior(std::vector<GmmComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("GmmPrior: no components");
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.mean.size() != components_.front().mean.size() || c.mean.empty())
      throw std::invalid_argument("GmmPrior: component means must share a positive length");
    if (!(c.std > 0.0) || !std::isfinite(c.std))
      throw std::invalid_argument("GmmPrior: component std must be positive");
    if (!(c.weight >= 0.0)) throw std::invalid_argument("GmmPrior: negative weight");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("GmmPrior: weights must sum to 1 (got " + std::to_string(total) +
                                ")");
}

std::vector<double> GmmPrior::log_joint(std::span<const double> u, double sigma) const {
  std::vector<double> lj(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const auto& c = components_[i];
    const double var = c.std * c.std + sigma * sigma;
    lj[i] = std::log(c.weight) + log_isotropic_normal(squared_distance(u, c.mean), dim(), var);
  }
  return lj;
}

std::vector<double> GmmPrior::responsibilities(std::span<const double> u, double sigma) const {
  require_dim(u, dim(), "gmm_denoise");
  std::vector<double> r = log_joint(u, sigma);
  const double top = *std::max_element(r.begin(), r.end());
  if (!std::isfinite(top))
    throw std::runtime_error("gmm_denoise: all component responsibilities underflowed");
  double total = 0.0;
  for (double& v : r) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : r) v /= total;
  return r;
}

double GmmPrior::smoothed_log_density(std::span<const double> u, double sigma) const {
  require_dim(u, dim(), "GmmPrior::smoothed_log_density");
  std::vector<double> lj = log_joint(u, sigma);
  const double top = *std::max_element(lj.begin(), lj.end());
  double total = 0.0;
  for (double v : lj) total += std::exp(v - top);
  return top + std::log(total);
}

std::vector<double> GmmPrior::denoise(std::span<const double> u, double sigma) const {
  require_sigma(sigma, "gmm_denoise");
  const std::vector<double> r = responsibilities(u, sigma);
  const double v2 = sigma * sigma;
  std::vector<double> out(u.size(), 0.0);
  for (std::size_t k = 0; k < components_.size(); ++k) {
    if (r[k] == 0.0) continue;
    const auto& c = components_[k];
    const double s2 = c.std * c.std;
    // Same expression as gaussian_denoise so a one-component mixture matches it bitwise.
    for (std::size_t i = 0; i < u.size(); ++i)
      out[i] += r[k] * ((s2 * u[i] + v2 * c.mean[i]) / (s2 + v2));
  }
  return out;
}

}  // namespace bpdm
