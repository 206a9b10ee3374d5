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

#ifndef BPDM_TESTS_TEST_UTIL_HPP_
#define BPDM_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "bpdm/grid.hpp"

namespace bpdm::testing {

inline std::vector<double> random_vector(std::mt19937_64& gen, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(gen);
  return v;
}

inline Grid random_grid(std::mt19937_64& gen, std::size_t h, std::size_t w, double lo = -1.0,
                        double hi = 1.0) {
  return Grid(h, w, random_vector(gen, h * w, lo, hi));
}

inline double inner(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double rel_error(std::span<const double> a, std::span<const double> ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ref[i]) * (a[i] - ref[i]);
    den += ref[i] * ref[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

// Direct periodic convolution with the kernel origin at (h/2, w/2).
inline Grid spatial_conv(const Grid& x, const Grid& k) {
  const std::size_t H = x.height(), W = x.width();
  const long ci = static_cast<long>(k.height() / 2), cj = static_cast<long>(k.width() / 2);
  Grid out(H, W, 0.0);
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < k.height(); ++i) {
        for (std::size_t j = 0; j < k.width(); ++j) {
          long rr = (static_cast<long>(r) - (static_cast<long>(i) - ci)) % static_cast<long>(H);
          long cc = (static_cast<long>(c) - (static_cast<long>(j) - cj)) % static_cast<long>(W);
          if (rr < 0) rr += static_cast<long>(H);
          if (cc < 0) cc += static_cast<long>(W);
          s += k(i, j) * x(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
        }
      }
      out(r, c) = s;
    }
  }
  return out;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

inline Moments moments(const std::vector<double>& s) {
  Moments m;
  for (double v : s) m.mean += v;
  m.mean /= static_cast<double>(s.size());
  for (double v : s) m.var += (v - m.mean) * (v - m.mean);
  m.var /= static_cast<double>(s.size() - 1);
  return m;
}

}  // namespace bpdm::testing

#endif  // BPDM_TESTS_TEST_UTIL_HPP_
