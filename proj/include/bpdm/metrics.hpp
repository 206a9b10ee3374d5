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

#ifndef BPDM_METRICS_HPP_
#define BPDM_METRICS_HPP_

#include "bpdm/grid.hpp"

namespace bpdm {

struct MetricReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  double kernel_mse = 0.0;
  double kernel_mse_aligned = 0.0;
};

/// 10 log10(peak^2 / MSE); +infinity for identical grids.
double psnr(const Grid& x, const Grid& ref, double peak = 1.0);

/// Mean SSIM over all fully contained 11x11 Gaussian windows (std 1.5),
/// K1 = 0.01, K2 = 0.03, dynamic range 1.
double ssim(const Grid& x, const Grid& ref);

struct KernelError {
  double mse = 0.0;
  double mse_aligned = 0.0;  // minimum over all circular shifts of the estimate
};

KernelError kernel_error(const Grid& theta_hat, const Grid& theta_true);

double mse(const Grid& a, const Grid& b);

}  // namespace bpdm

#endif  // BPDM_METRICS_HPP_
