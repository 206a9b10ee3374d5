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

#include "bpdm/gibbs.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bpdm/errors.hpp"

namespace bpdm {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void require_finite_state(const Grid& g, std::size_t k, GibbsStep step) {
  if (!g.all_finite())
    throw StepError(k, std::string(step_name(step)), "non-finite state", true);
}

std::string stream_name(std::size_t k, GibbsStep step) {
  return "iter/" + std::to_string(k) + "/" + std::string(step_name(step));
}

// Runs one step, tagging any failure with the iteration and step.
template <typename F>
Grid run_step(std::size_t k, GibbsStep step, double& timing_ms, F&& body) {
  const auto start = Clock::now();
  Grid out;
  try {
    out = body();
  } catch (const DivergenceError& e) {
    throw StepError(k, std::string(step_name(step)), e.what(), true);
  } catch (const StepError&) {
    throw;
  } catch (const std::exception& e) {
    throw StepError(k, std::string(step_name(step)), e.what(), false);
  }
  timing_ms = elapsed_ms(start);
  require_finite_state(out, k, step);
  return out;
}

}  // namespace

void AnnealSchedule::validate() const {
  if (!(base > 0.0)) throw std::invalid_argument("AnnealSchedule: base must be positive");
  if (!(decay > 0.0 && decay <= 1.0))
    throw std::invalid_argument("AnnealSchedule: decay must lie in (0, 1]");
  if (!(floor > 0.0 && floor <= base))
    throw std::invalid_argument("AnnealSchedule: floor must lie in (0, base]");
}

double anneal_rho(std::size_t k, const AnnealSchedule& s) {
  return std::max(std::pow(s.decay, static_cast<double>(k)) * s.base, s.floor);
}

void SamplerConfig::validate() const {
  anneal_x.validate();
  anneal_theta.validate();
  edm_x.validate();
  edm_theta.validate();
  solver.validate();
  NoiseModel check(noise.sigma_y);
  if (burn_in >= std::max<std::size_t>(K, 1))
    throw std::invalid_argument("SamplerConfig: burn_in must be smaller than K");
}

std::string_view step_name(GibbsStep step) {
  switch (step) {
    case GibbsStep::likelihood_x: return "likelihood_x";
    case GibbsStep::prior_x: return "prior_x";
    case GibbsStep::likelihood_theta: return "likelihood_theta";
    case GibbsStep::prior_theta: return "prior_theta";
  }
  return "unknown";
}

GibbsChain run_blind_pnpdm(const BilinearModel& model, const Grid& y, const Grid& x0,
                           const Grid& theta0, const ScoreModel& d_alpha,
                           const ScoreModel& d_beta, const SamplerConfig& cfg) {
  cfg.validate();
  if (x0.shape() != model.image_shape())
    throw std::invalid_argument("run_blind_pnpdm: x0 shape does not match the model");
  if (theta0.shape() != model.theta_shape())
    throw std::invalid_argument("run_blind_pnpdm: theta0 shape does not match the model");
  if (y.shape() != model.measurement_shape())
    throw std::invalid_argument("run_blind_pnpdm: measurement shape does not match the model");
  if (d_alpha.dim() != x0.size())
    throw std::invalid_argument("run_blind_pnpdm: image prior dim " +
                                std::to_string(d_alpha.dim()) + " != image size " +
                                std::to_string(x0.size()));
  if (d_beta.dim() != theta0.size())
    throw std::invalid_argument("run_blind_pnpdm: kernel prior dim " +
                                std::to_string(d_beta.dim()) + " != kernel size " +
                                std::to_string(theta0.size()));
  require_finite(y, "run_blind_pnpdm measurement");
  require_finite(x0, "run_blind_pnpdm x0");
  require_finite(theta0, "run_blind_pnpdm theta0");

  const Rng root(cfg.seed);
  GibbsChain chain;
  chain.config = cfg;
  chain.seed = cfg.seed;
  chain.entries.reserve(cfg.K + 1);
  chain.step_log.reserve(4 * cfg.K);

  Grid x = x0;
  Grid theta = theta0;
  for (std::size_t k = 0; k < cfg.K; ++k) {
    ChainRecord rec;
    rec.k = k;
    rec.x = x;
    rec.theta = theta;
    rec.rho_x = anneal_rho(k, cfg.anneal_x);
    rec.rho_theta = anneal_rho(k, cfg.anneal_theta);

    Grid z = run_step(k, GibbsStep::likelihood_x, rec.timing.likelihood_x_ms, [&] {
      Rng rng = root.substream(stream_name(k, GibbsStep::likelihood_x));
      return likelihood_step_x(model, x, theta, y, rec.rho_x, cfg.noise, cfg.solver, rng);
    });
    chain.step_log.push_back({k, GibbsStep::likelihood_x});
    x = run_step(k, GibbsStep::prior_x, rec.timing.prior_x_ms, [&] {
      Rng rng = root.substream(stream_name(k, GibbsStep::prior_x));
      return prior_step_grid(z, rec.rho_x, d_alpha, cfg.edm_x, rng);
    });
    chain.step_log.push_back({k, GibbsStep::prior_x});

    Grid v = run_step(k, GibbsStep::likelihood_theta, rec.timing.likelihood_theta_ms, [&] {
      Rng rng = root.substream(stream_name(k, GibbsStep::likelihood_theta));
      return likelihood_step_theta(model, x, theta, y, rec.rho_theta, cfg.noise, cfg.solver, rng);
    });
    chain.step_log.push_back({k, GibbsStep::likelihood_theta});
    theta = run_step(k, GibbsStep::prior_theta, rec.timing.prior_theta_ms, [&] {
      Rng rng = root.substream(stream_name(k, GibbsStep::prior_theta));
      return prior_step_grid(v, rec.rho_theta, d_beta, cfg.edm_theta, rng);
    });
    chain.step_log.push_back({k, GibbsStep::prior_theta});

    if (cfg.record_aux) {
      rec.z = std::move(z);
      rec.v = std::move(v);
    }
    chain.entries.push_back(std::move(rec));
  }
  ChainRecord last;
  last.k = cfg.K;
  last.x = std::move(x);
  last.theta = std::move(theta);
  last.rho_x = anneal_rho(cfg.K, cfg.anneal_x);
  last.rho_theta = anneal_rho(cfg.K, cfg.anneal_theta);
  chain.entries.push_back(std::move(last));
  return chain;
}

GibbsChain run_blind_pnpdm(const Grid& y, const Grid& x0, const Grid& theta0,
                           const ScoreModel& d_alpha, const ScoreModel& d_beta,
                           const SamplerConfig& cfg) {
  return run_blind_pnpdm(CircularBlurModel(x0.shape(), theta0.shape()), y, x0, theta0, d_alpha,
                         d_beta, cfg);
}

PosteriorStats posterior_stats(std::span<const GibbsChain> chains, std::size_t burn_in) {
  if (chains.empty()) throw std::invalid_argument("posterior_stats: no chains");
  const Grid& x_ref = chains.front().entries.front().x;
  const Grid& t_ref = chains.front().entries.front().theta;
  PosteriorStats stats;
  stats.mean_x = Grid(x_ref.shape());
  stats.std_x = Grid(x_ref.shape());
  stats.mean_theta = Grid(t_ref.shape());
  stats.std_theta = Grid(t_ref.shape());

  // Two passes over the window: mean first, then centered second moment.
  for (const auto& chain : chains) {
    if (burn_in >= chain.entries.size())
      throw std::invalid_argument("posterior_stats: empty post-burn-in window (burn_in " +
                                  std::to_string(burn_in) + ", chain length " +
                                  std::to_string(chain.entries.size()) + ")");
    for (std::size_t i = burn_in; i < chain.entries.size(); ++i) {
      const auto& e = chain.entries[i];
      require_same_shape(e.x, x_ref, "posterior_stats");
      require_same_shape(e.theta, t_ref, "posterior_stats");
      for (std::size_t j = 0; j < e.x.size(); ++j) stats.mean_x[j] += e.x[j];
      for (std::size_t j = 0; j < e.theta.size(); ++j) stats.mean_theta[j] += e.theta[j];
      ++stats.samples;
    }
  }
  const double inv = 1.0 / static_cast<double>(stats.samples);
  for (double& v : stats.mean_x.flat()) v *= inv;
  for (double& v : stats.mean_theta.flat()) v *= inv;
  for (const auto& chain : chains) {
    for (std::size_t i = burn_in; i < chain.entries.size(); ++i) {
      const auto& e = chain.entries[i];
      for (std::size_t j = 0; j < e.x.size(); ++j) {
        const double d = e.x[j] - stats.mean_x[j];
        stats.std_x[j] += d * d;
      }
      for (std::size_t j = 0; j < e.theta.size(); ++j) {
        const double d = e.theta[j] - stats.mean_theta[j];
        stats.std_theta[j] += d * d;
      }
    }
  }
  for (double& v : stats.std_x.flat()) v = std::sqrt(v * inv);
  for (double& v : stats.std_theta.flat()) v = std::sqrt(v * inv);
  stats.final_x = chains.front().entries.back().x;
  stats.final_theta = chains.front().entries.back().theta;
  return stats;
}

PosteriorStats posterior_stats(const GibbsChain& chain, std::size_t burn_in) {
  return posterior_stats(std::span<const GibbsChain>(&chain, 1), burn_in);
}

Grid pnp_ista_step(const Grid& x, const Grid& theta, const Grid& y, double gamma, double sigma,
                   const ScoreModel& denoiser, const NoiseModel& noise) {
  require_same_shape(x, y, "pnp_ista_step");
  if (!(gamma >= 0.0)) throw std::invalid_argument("pnp_ista_step: gamma must be nonnegative");
  auto op = convolution_by_kernel(theta, x.shape());
  std::vector<double> r = op->apply(x.flat());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
  const std::vector<double> grad = op->adjoint(r);
  const double scale = gamma / (noise.sigma_y * noise.sigma_y);
  std::vector<double> u(x.values());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] -= scale * grad[i];
  return unflatten(denoiser.denoise(u, sigma), x.shape());
}

Grid project_kernel(const Grid& kernel) {
  Grid out = kernel;
  double total = 0.0;
  for (double& v : out.flat()) {
    v = std::max(v, 0.0);
    total += v;
  }
  if (!(total > 0.0)) return Grid(kernel.shape(), 1.0 / static_cast<double>(kernel.size()));
  for (double& v : out.flat()) v /= total;
  return out;
}

Initialization default_initialization(const Grid& y, Shape kernel_shape, double kernel_std) {
  Grid theta0 = gaussian_kernel(kernel_shape.height, kernel_shape.width, kernel_std);
  Grid x0 = conv2d_adjoint(y, theta0);
  return {std::move(x0), std::move(theta0)};
}

}  // namespace bpdm
