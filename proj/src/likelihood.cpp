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

#include "bpdm/likelihood.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bpdm/errors.hpp"

namespace bpdm {
namespace {

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

double residual_norm(const SpdApply& apply, std::span<const double> rhs,
                     std::span<const double> x, std::vector<double>& r) {
  apply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
  return norm2(r);
}

}  // namespace

void TiltedGaussianProblem::validate() const {
  if (op.input_dim() != anchor.size())
    throw std::invalid_argument("TiltedGaussianProblem: operator input dim " +
                                std::to_string(op.input_dim()) + " != anchor length " +
                                std::to_string(anchor.size()));
  if (op.output_dim() != measurement.size())
    throw std::invalid_argument("TiltedGaussianProblem: operator output dim " +
                                std::to_string(op.output_dim()) + " != measurement length " +
                                std::to_string(measurement.size()));
  if (!positive_finite(rho)) throw std::invalid_argument("TiltedGaussianProblem: rho must be > 0");
  if (!positive_finite(sigma_y))
    throw std::invalid_argument("TiltedGaussianProblem: sigma_y must be > 0");
}

void SolverConfig::validate() const {
  if (!positive_finite(cg_tol)) throw std::invalid_argument("SolverConfig: cg_tol must be > 0");
  if (cg_max_iter < 1) throw std::invalid_argument("SolverConfig: cg_max_iter must be >= 1");
}

CgResult conjugate_gradient(const SpdApply& apply, std::span<const double> rhs,
                            std::span<double> x, double tol, std::size_t max_iter,
                            const SpdApply& preconditioner) {
  const std::size_t n = rhs.size();
  if (x.size() != n) throw std::invalid_argument("conjugate_gradient: size mismatch");
  const double rhs_norm = norm2(rhs);
  CgResult result;
  if (rhs_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return result;
  }
  const double target = tol * rhs_norm;

  std::vector<double> r(n), z(n), p(n), q(n);
  double rnorm = residual_norm(apply, rhs, x, r);
  // Outer loop restarts from the true residual whenever the recursive one has
  // converged but drifted from it.
  while (rnorm > target) {
    if (result.iterations >= max_iter) break;
    if (preconditioner) preconditioner(r, z);
    else z = r;
    p = z;
    double rz = dot(r, z);
    while (result.iterations < max_iter) {
      ++result.iterations;
      apply(p, q);
      const double pq = dot(p, q);
      if (!(pq > 0.0)) break;  // lost positive curvature to roundoff; restart
      const double alpha = rz / pq;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      if (norm2(r) <= target) break;
      if (preconditioner) preconditioner(r, z);
      else z = r;
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    rnorm = residual_norm(apply, rhs, x, r);
  }
  result.relative_residual = rnorm / rhs_norm;
  if (rnorm > target) {
    std::ostringstream msg;
    msg << "conjugate_gradient: no convergence after " << result.iterations
        << " iterations (relative residual " << result.relative_residual << ", tolerance " << tol
        << ")";
    throw ConvergenceError(msg.str(), result.iterations, result.relative_residual);
  }
  return result;
}

void apply_tilted_precision(const LinearOperator& op, double rho, double sigma_y,
                            std::span<const double> v, std::span<double> out) {
  std::vector<double> av = op.apply(v);
  op.adjoint_to(av, out);
  const double a = 1.0 / (sigma_y * sigma_y);
  const double b = 1.0 / (rho * rho);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * out[i] + b * v[i];
}

std::vector<double> sample_tilted_gaussian(const TiltedGaussianProblem& p,
                                           const SolverConfig& cfg, Rng& rng,
                                           Perturbation mode) {
  p.validate();
  cfg.validate();
  const std::size_t m = p.measurement.size();
  const std::size_t n = p.anchor.size();

  std::vector<double> y_pert(p.measurement.begin(), p.measurement.end());
  std::vector<double> anchor_pert(p.anchor.begin(), p.anchor.end());
  if (mode == Perturbation::sample) {
    std::vector<double> eta(m);
    rng.fill_normal(eta, p.sigma_y);
    for (std::size_t i = 0; i < m; ++i) y_pert[i] += eta[i];
    eta.resize(n);
    rng.fill_normal(eta, p.rho);
    for (std::size_t i = 0; i < n; ++i) anchor_pert[i] += eta[i];
  }

  const double a = 1.0 / (p.sigma_y * p.sigma_y);
  const double b = 1.0 / (p.rho * p.rho);
  std::vector<double> rhs = p.op.adjoint(y_pert);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = a * rhs[i] + b * anchor_pert[i];

  const ConvolutionOperator* conv = p.op.as_convolution();
  const bool spectral_ok = conv != nullptr && conv->spectrally_solvable();
  SolverMethod method = cfg.method;
  if (method == SolverMethod::automatic)
    method = spectral_ok ? SolverMethod::fourier_exact : SolverMethod::conjugate_gradient;
  if (method == SolverMethod::fourier_exact) {
    if (!spectral_ok)
      throw std::invalid_argument(
          "sample_tilted_gaussian: fourier-exact needs a circular convolution whose input grid "
          "equals its output grid");
    return conv->solve_shifted_normal(rhs, a, b);
  }

  std::vector<double> z(n, 0.0);
  conjugate_gradient(
      [&](std::span<const double> v, std::span<double> out) {
        apply_tilted_precision(p.op, p.rho, p.sigma_y, v, out);
      },
      rhs, z, cfg.cg_tol, cfg.cg_max_iter);
  return z;
}

Grid likelihood_step_x(const BilinearModel& model, const Grid& x_k, const Grid& theta_k,
                       const Grid& y, double rho_x, const NoiseModel& noise,
                       const SolverConfig& cfg, Rng& rng, Perturbation mode) {
  if (x_k.shape() != model.image_shape())
    throw std::invalid_argument("likelihood_step_x: image shape mismatch");
  if (y.shape() != model.measurement_shape())
    throw std::invalid_argument("likelihood_step_x: measurement shape mismatch");
  auto op = model.image_operator(theta_k);
  TiltedGaussianProblem problem{*op, y.flat(), x_k.flat(), rho_x, noise.sigma_y};
  return unflatten(sample_tilted_gaussian(problem, cfg, rng, mode), x_k.shape());
}

Grid likelihood_step_theta(const BilinearModel& model, const Grid& x_next, const Grid& theta_k,
                           const Grid& y, double rho_theta, const NoiseModel& noise,
                           const SolverConfig& cfg, Rng& rng, Perturbation mode) {
  if (theta_k.shape() != model.theta_shape())
    throw std::invalid_argument("likelihood_step_theta: theta shape mismatch");
  if (y.shape() != model.measurement_shape())
    throw std::invalid_argument("likelihood_step_theta: measurement shape mismatch");
  auto op = model.theta_operator(x_next);
  TiltedGaussianProblem problem{*op, y.flat(), theta_k.flat(), rho_theta, noise.sigma_y};
  return unflatten(sample_tilted_gaussian(problem, cfg, rng, mode), theta_k.shape());
}

Grid likelihood_step_x(const Grid& x_k, const Grid& theta_k, const Grid& y, double rho_x,
                       const NoiseModel& noise, const SolverConfig& cfg, Rng& rng,
                       Perturbation mode) {
  return likelihood_step_x(CircularBlurModel(x_k.shape(), theta_k.shape()), x_k, theta_k, y,
                           rho_x, noise, cfg, rng, mode);
}

Grid likelihood_step_theta(const Grid& x_next, const Grid& theta_k, const Grid& y,
                           double rho_theta, const NoiseModel& noise, const SolverConfig& cfg,
                           Rng& rng, Perturbation mode) {
  return likelihood_step_theta(CircularBlurModel(x_next.shape(), theta_k.shape()), x_next,
                               theta_k, y, rho_theta, noise, cfg, rng, mode);
}

}  // namespace bpdm
