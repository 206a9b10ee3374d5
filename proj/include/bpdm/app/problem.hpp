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

#ifndef BPDM_APP_PROBLEM_HPP_
#define BPDM_APP_PROBLEM_HPP_

#include <cstddef>
#include <filesystem>
#include <memory>

#include "bpdm/app/config.hpp"
#include "bpdm/grid.hpp"
#include "bpdm/priors.hpp"
#include "bpdm/rng.hpp"

namespace bpdm::app {

/// Sum of `blob_count` isotropic Gaussian bumps (std 2..8 px, amplitude
/// 0.3..1, centers uniform), clipped to [0, 1].
Grid blob_image(Shape shape, std::size_t blob_count, Rng& rng);

/// Seeded 2-D random walk of `steps` moves with N(0, step_std^2) increments per
/// axis, recentered on its mean, splatted bilinearly onto a size x size grid,
/// smoothed with a Gaussian of `smoothing_std` px and normalized to sum 1.
/// `steps` = 0 selects 3 * size.
Grid motion_kernel(std::size_t size, std::size_t steps, double step_std, double smoothing_std,
                   Rng& rng);

/// Image prior of the config for images of `shape`.
std::unique_ptr<ScoreModel> make_image_prior(const LoadedConfig& loaded, Shape shape);
/// Kernel prior of the config for size x size kernels.
std::unique_ptr<ScoreModel> make_kernel_prior(const LoadedConfig& loaded, std::size_t size);

/// Exact draw from a Gaussian or Gaussian-mixture prior.
Grid sample_prior(const ScoreModel& prior, Shape shape, Rng& rng);

struct ProblemBundle {
  Grid x_true;
  Grid kernel_true;
  Grid y;
  double sigma_y = 1.0;
};

/// Deterministic in the config: the image, kernel and noise use the substreams
/// "simulate/image", "simulate/kernel" and "simulate/noise" of the root seed.
ProblemBundle generate_problem(const LoadedConfig& loaded);

/// x_true, kernel_true and y as CSV plus previews in the configured format.
void write_bundle(const std::filesystem::path& dir, const ProblemBundle& bundle,
                  const Json& config);
ProblemBundle read_bundle(const std::filesystem::path& dir, double sigma_y);

}  // namespace bpdm::app

#endif  // BPDM_APP_PROBLEM_HPP_
