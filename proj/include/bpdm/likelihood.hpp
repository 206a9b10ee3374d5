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

#ifndef BPDM_LIKELIHOOD_HPP_
#define BPDM_LIKELIHOOD_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bpdm/forward_models.hpp"
#include "bpdm/grid.hpp"
#include "bpdm/rng.hpp"

namespace bpdm {

/// Density proportional to
///   exp(-|y - A z|^2 / (2 sigma_y^2) - |z - anchor|^2 / (2 rho^2)).
struct TiltedGaussianProblem {
  const LinearOperator& op;
  std::span<const double> measurement;
  std::span<const double> anchor;
  double rho;
  double sigma_y;

  void validate() const;
};

enum class SolverMethod {
  automatic,           // frequency domain when exact, otherwise CG
  fourier_exact,       // requires a spectrally solvable convolution
  conjugate_gradient,
};

struct SolverConfig {
  SolverMethod method = SolverMethod::automatic;
  double cg_tol = 1e-10;
  std::size_t cg_max_iter = 500;

  void validate() const;
};

enum class Perturbation {
  sample,  // perturb-and-solve draw
  none,    // conditional mean
};

/// Applies a symmetric positive definite operator: out = M in.
using SpdApply = std::function<void(std::span<const double>, std::span<double>)>;

struct CgResult {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Solves M x = rhs starting from the contents of x. `preconditioner`, when set,
/// applies an approximation of M^-1. Returns once |rhs - M x| <= tol |rhs| with the
/// residual recomputed from scratch; throws ConvergenceError after max_iter.
CgResult conjugate_gradient(const SpdApply& apply, std::span<const double> rhs,
                            std::span<double> x, double tol, std::size_t max_iter,
                            const SpdApply& preconditioner = {});

/// Exact draw from N(Sigma b, Sigma), Sigma = (A^T A / sigma_y^2 + I / rho^2)^-1,
/// b = A^T y / sigma_y^2 + anchor / rho^2, by perturb-and-solve. Perturbations are
/// drawn measurement-first, then anchor, so any two solver paths fed the same
/// generator state see identical noise.
std::vector<double> sample_tilted_gaussian(const TiltedGaussianProblem& p,
                                           const SolverConfig& cfg, Rng& rng,
                                           Perturbation mode = Perturbation::sample);

/// Applies (A^T A / sigma_y^2 + I / rho^2).
void apply_tilted_precision(const LinearOperator& op, double rho, double sigma_y,
                            std::span<const double> v, std::span<double> out);

/// z-step: tilted Gaussian in the image with A = A(theta_k).
Grid likelihood_step_x(const BilinearModel& model, const Grid& x_k, const Grid& theta_k,
                       const Grid& y, double rho_x, const NoiseModel& noise,
                       const SolverConfig& cfg, Rng& rng,
                       Perturbation mode = Perturbation::sample);

/// v-step: tilted Gaussian in the operator parameters with A = B(x_next), anchored at theta_k.
Grid likelihood_step_theta(const BilinearModel& model, const Grid& x_next, const Grid& theta_k,
                           const Grid& y, double rho_theta, const NoiseModel& noise,
                           const SolverConfig& cfg, Rng& rng,
                           Perturbation mode = Perturbation::sample);

// Circular-blur shorthands (image grid = measurement grid).
Grid likelihood_step_x(const Grid& x_k, const Grid& theta_k, const Grid& y, double rho_x,
                       const NoiseModel& noise, const SolverConfig& cfg, Rng& rng,
                       Perturbation mode = Perturbation::sample);
Grid likelihood_step_theta(const Grid& x_next, const Grid& theta_k, const Grid& y,
                           double rho_theta, const NoiseModel& noise, const SolverConfig& cfg,
                           Rng& rng, Perturbation mode = Perturbation::sample);

}  // namespace bpdm

#endif  // BPDM_LIKELIHOOD_HPP_
