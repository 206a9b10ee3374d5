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

#ifndef BPDM_GIBBS_HPP_
#define BPDM_GIBBS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bpdm/edm.hpp"
#include "bpdm/forward_models.hpp"
#include "bpdm/grid.hpp"
#include "bpdm/likelihood.hpp"
#include "bpdm/priors.hpp"

namespace bpdm {

/// rho^(k) = max(decay^k * base, floor).
struct AnnealSchedule {
  double base = 0.3;
  double decay = 0.9;
  double floor = 0.1;

  void validate() const;
  static AnnealSchedule constant(double rho) { return {rho, 1.0, rho}; }
};

double anneal_rho(std::size_t k, const AnnealSchedule& s);

struct SamplerConfig {
  std::size_t K = 30;
  AnnealSchedule anneal_x{0.3, 0.9, 0.1};
  AnnealSchedule anneal_theta{0.1, 0.9, 0.05};
  EdmConfig edm_x;
  EdmConfig edm_theta;
  SolverConfig solver;
  NoiseModel noise;
  std::uint64_t seed = 0;
  std::size_t burn_in = 15;
  bool record_aux = false;

  void validate() const;
};

enum class GibbsStep : std::uint8_t { likelihood_x, prior_x, likelihood_theta, prior_theta };
std::string_view step_name(GibbsStep step);

struct StepTimings {
  double likelihood_x_ms = 0.0;
  double prior_x_ms = 0.0;
  double likelihood_theta_ms = 0.0;
  double prior_theta_ms = 0.0;
};

/// State at the start of sweep k together with what sweep k drew from it:
/// z^(k) = LikelihoodStep_x(x^(k), theta^(k), rho_x^(k)) and
/// v^(k) = LikelihoodStep_theta(x^(k+1), theta^(k), rho_theta^(k)).
/// The last record (k = K) has no auxiliaries and no timings.
struct ChainRecord {
  std::size_t k = 0;
  Grid x;
  Grid theta;
  std::optional<Grid> z;  // only with record_aux
  std::optional<Grid> v;
  double rho_x = 0.0;  // anneal_rho(k, anneal_x)
  double rho_theta = 0.0;
  StepTimings timing;
};

struct StepEvent {
  std::size_t iteration;
  GibbsStep step;
};

/// K + 1 records; entries[0] holds the initialization.
struct GibbsChain {
  std::vector<ChainRecord> entries;
  std::vector<StepEvent> step_log;
  SamplerConfig config;
  std::uint64_t seed = 0;
};

/// Alternates the x-block (likelihood then prior step) and the theta-block for K
/// sweeps. Randomness for step s of sweep k comes from the substream
/// "iter/<k>/<step name>" of cfg.seed.
GibbsChain run_blind_pnpdm(const BilinearModel& model, const Grid& y, const Grid& x0,
                           const Grid& theta0, const ScoreModel& d_alpha,
                           const ScoreModel& d_beta, const SamplerConfig& cfg);

/// Circular-blur shorthand.
GibbsChain run_blind_pnpdm(const Grid& y, const Grid& x0, const Grid& theta0,
                           const ScoreModel& d_alpha, const ScoreModel& d_beta,
                           const SamplerConfig& cfg);

struct PosteriorStats {
  Grid mean_x, std_x, mean_theta, std_theta, final_x, final_theta;
  std::size_t samples = 0;
};

/// Population mean/std over entries[burn_in:], pooled across chains.
PosteriorStats posterior_stats(std::span<const GibbsChain> chains, std::size_t burn_in);
PosteriorStats posterior_stats(const GibbsChain& chain, std::size_t burn_in);

/// x+ = D_sigma(x - gamma * A^T (A x - y) / sigma_y^2) with A = convolution by theta.
Grid pnp_ista_step(const Grid& x, const Grid& theta, const Grid& y, double gamma, double sigma,
                   const ScoreModel& denoiser, const NoiseModel& noise);

/// Clip negatives to zero and rescale to unit sum (uniform if nothing is left).
Grid project_kernel(const Grid& kernel);

struct Initialization {
  Grid x0;
  Grid theta0;
};

/// theta0 = centered Gaussian of `kernel_std` px; x0 = A(theta0)^T y.
Initialization default_initialization(const Grid& y, Shape kernel_shape, double kernel_std = 1.0);

}  // namespace bpdm

#endif  // BPDM_GIBBS_HPP_
