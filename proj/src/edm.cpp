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

#include "bpdm/edm.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bpdm/errors.hpp"
#include "bpdm/log.hpp"

namespace bpdm {

void EdmConfig::validate() const {
  if (!(sigma_min > 0.0)) throw std::invalid_argument("EdmConfig: sigma_min must be positive");
  if (n_steps < 1) throw std::invalid_argument("EdmConfig: n_steps must be >= 1");
  if (!(rho_exp > 0.0)) throw std::invalid_argument("EdmConfig: rho_exp must be positive");
  if (!(churn >= 0.0)) throw std::invalid_argument("EdmConfig: churn must be nonnegative");
}

SigmaLadder karras_sigmas(double rho_level, const EdmConfig& cfg) {
  cfg.validate();
  if (!(rho_level > 0.0) || !std::isfinite(rho_level))
    throw std::invalid_argument("karras_sigmas: rho must be positive and finite");
  SigmaLadder ladder;
  if (rho_level <= cfg.sigma_min) {
    std::ostringstream msg;
    msg << "karras_sigmas: rho " << rho_level << " <= sigma_min " << cfg.sigma_min
        << ", using the trivial ladder";
    log_warning(msg.str());
    ladder.sigmas = {rho_level, 0.0};
    return ladder;
  }
  const std::size_t n = cfg.n_steps;
  if (n == 1) {
    ladder.sigmas = {rho_level, 0.0};
    return ladder;
  }
  const double inv = 1.0 / cfg.rho_exp;
  const double hi = std::pow(rho_level, inv);
  const double lo = std::pow(cfg.sigma_min, inv);
  ladder.sigmas.reserve(n + 1);
  ladder.sigmas.push_back(rho_level);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    ladder.sigmas.push_back(std::pow(hi + t * (lo - hi), cfg.rho_exp));
  }
  ladder.sigmas.push_back(cfg.sigma_min);
  ladder.sigmas.push_back(0.0);
  return ladder;
}

std::vector<double> prior_step(std::span<const double> anchor, double rho_level,
                               const ScoreModel& model, const EdmConfig& cfg, Rng& rng) {
  if (anchor.size() != model.dim())
    throw std::invalid_argument("prior_step: anchor length " + std::to_string(anchor.size()) +
                                " does not match model dim " + std::to_string(model.dim()));
  const SigmaLadder ladder = karras_sigmas(rho_level, cfg);
  const auto& s = ladder.sigmas;
  const std::size_t rungs = s.size() - 1;  // transitions, the last one goes to 0
  const double gamma =
      cfg.churn > 0.0 ? std::min(cfg.churn / static_cast<double>(rungs), std::sqrt(2.0) - 1.0)
                      : 0.0;

  std::vector<double> x(anchor.begin(), anchor.end());
  std::vector<double> noise(x.size());
  auto check = [&](std::size_t rung) {
    for (double v : x)
      if (!std::isfinite(v))
        throw DivergenceError("prior_step: non-finite state at rung " + std::to_string(rung),
                              rung);
  };

  for (std::size_t i = 0; i + 1 < rungs; ++i) {
    double sigma = s[i];
    if (gamma > 0.0) {
      const double raised = sigma * (1.0 + gamma);
      rng.fill_normal(noise, std::sqrt(raised * raised - sigma * sigma));
      for (std::size_t j = 0; j < x.size(); ++j) x[j] += noise[j];
      sigma = raised;
    }
    const double next = s[i + 1];
    const double dvar = sigma * sigma - next * next;
    const std::vector<double> sc = model.score(x, sigma);
    rng.fill_normal(noise, std::sqrt(dvar));
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += dvar * sc[j] + noise[j];
    check(i);
  }
  // Terminal rung sigma_last -> 0 is a plain denoiser evaluation.
  x = model.denoise(x, s[rungs - 1]);
  check(rungs - 1);
  return x;
}

Grid prior_step_grid(const Grid& anchor, double rho_level, const ScoreModel& model,
                     const EdmConfig& cfg, Rng& rng) {
  return unflatten(prior_step(anchor.flat(), rho_level, model, cfg, rng), anchor.shape());
}

}  // namespace bpdm
