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

#ifndef BPDM_EDM_HPP_
#define BPDM_EDM_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "bpdm/grid.hpp"
#include "bpdm/priors.hpp"
#include "bpdm/rng.hpp"

namespace bpdm {

/// Reverse-diffusion discretization for prior steps. The diffusion uses
/// sigma(t) = t and s(t) = 1, so a prior step at coupling rho starts at t* = rho
/// from the anchor itself.
struct EdmConfig {
  double sigma_min = 0.002;
  std::size_t n_steps = 40;
  double rho_exp = 7.0;  // curvature of the Karras ladder
  double churn = 0.0;    // S_churn; extra noise re-injected per rung

  void validate() const;
};

/// Strictly decreasing noise levels sigma_0 = rho, ..., sigma_min, followed by 0.
struct SigmaLadder {
  std::vector<double> sigmas;
};

SigmaLadder karras_sigmas(double rho_level, const EdmConfig& cfg);

/// One draw from exp(-g(x) - |x - anchor|^2 / (2 rho^2)) by integrating the
/// reverse SDE from sigma = rho with Euler-Maruyama and finishing with a
/// denoiser evaluation at the last positive rung.
std::vector<double> prior_step(std::span<const double> anchor, double rho_level,
                               const ScoreModel& model, const EdmConfig& cfg, Rng& rng);

Grid prior_step_grid(const Grid& anchor, double rho_level, const ScoreModel& model,
                     const EdmConfig& cfg, Rng& rng);

}  // namespace bpdm

#endif  // BPDM_EDM_HPP_
