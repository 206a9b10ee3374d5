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

#include "bpdm/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bpdm {
namespace {

constexpr std::size_t kWindow = 11;
constexpr double kWindowStd = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, kWindow> window_taps() {
  std::array<double, kWindow> taps{};
  double total = 0.0;
  for (std::size_t i = 0; i < kWindow; ++i) {
    const double d = static_cast<double>(i) - static_cast<double>(kWindow / 2);
    taps[i] = std::exp(-d * d / (2.0 * kWindowStd * kWindowStd));
    total += taps[i];
  }
  for (double& t : taps) t /= total;
  return taps;
}

// Separable 'valid' filtering of a row-major image.
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t h, std::size_t w,
                                 const std::array<double, kWindow>& taps) {
  const std::size_t ow = w - kWindow + 1;
  const std::size_t oh = h - kWindow + 1;
  std::vector<double> rows(h * ow, 0.0);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t t = 0; t < kWindow; ++t) s += taps[t] * img[r * w + c + t];
      rows[r * ow + c] = s;
    }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t r = 0; r < oh; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t t = 0; t < kWindow; ++t) s += taps[t] * rows[(r + t) * ow + c];
      out[r * ow + c] = s;
    }
  return out;
}

}  // namespace

double mse(const Grid& a, const Grid& b) {
  require_same_shape(a, b, "mse");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double psnr(const Grid& x, const Grid& ref, double peak) {
  require_same_shape(x, ref, "psnr");
  if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be positive");
  const double e = mse(x, ref);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / e);
}

double ssim(const Grid& x, const Grid& ref) {
  require_same_shape(x, ref, "ssim");
  if (x.height() < kWindow || x.width() < kWindow)
    throw std::invalid_argument("ssim: grids must be at least 11x11");
  const std::size_t h = x.height(), w = x.width();
  const auto taps = window_taps();
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = ref[i] * ref[i];
    xy[i] = x[i] * ref[i];
  }
  const auto mx = filter_valid(x.values(), h, w, taps);
  const auto my = filter_valid(ref.values(), h, w, taps);
  const auto sxx = filter_valid(xx, h, w, taps);
  const auto syy = filter_valid(yy, h, w, taps);
  const auto sxy = filter_valid(xy, h, w, taps);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    const double num = (2.0 * mx[i] * my[i] + kC1) * (2.0 * cov + kC2);
    const double den = (mx[i] * mx[i] + my[i] * my[i] + kC1) * (vx + vy + kC2);
    total += num / den;
  }
  return total / static_cast<double>(mx.size());
}

KernelError kernel_error(const Grid& theta_hat, const Grid& theta_true) {
  require_same_shape(theta_hat, theta_true, "kernel_error");
  KernelError err;
  err.mse = mse(theta_hat, theta_true);
  err.mse_aligned = err.mse;
  const std::size_t h = theta_hat.height(), w = theta_hat.width();
  for (std::size_t dr = 0; dr < h; ++dr)
    for (std::size_t dc = 0; dc < w; ++dc) {
      double s = 0.0;
      for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
          const double d = theta_hat((r + dr) % h, (c + dc) % w) - theta_true(r, c);
          s += d * d;
        }
      err.mse_aligned = std::min(err.mse_aligned, s / static_cast<double>(theta_hat.size()));
    }
  return err;
}

}  // namespace bpdm
