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

#include <algorithm>
#include <cmath>
#include <random>

#include "../test_util.hpp"
#include "bpdm/forward_models.hpp"
#include "doctest.h"

using namespace bpdm;
using namespace bpdm::testing;

namespace {

double adjoint_gap(const LinearOperator& op, std::mt19937_64& gen) {
  auto v = random_vector(gen, op.input_dim());
  auto w = random_vector(gen, op.output_dim());
  auto av = op.apply(v);
  auto atw = op.adjoint(w);
  double lhs = inner(av, w), rhs = inner(v, atw);
  double scale = std::sqrt(inner(av, av) * inner(w, w)) + 1e-300;
  return std::abs(lhs - rhs) / scale;
}

}  // namespace

TEST_CASE("grid construction and invariants") {
  Grid g(2, 3, 1.5);
  CHECK(g.size() == 6);
  CHECK(g.sum() == doctest::Approx(9.0));
  CHECK_THROWS_AS(Grid(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(Grid(2, 2, std::vector<double>(3)), std::invalid_argument);
  Grid bad(1, 2, std::vector<double>{1.0, NAN});
  CHECK_FALSE(bad.all_finite());
  CHECK_THROWS(require_finite(bad, "bad"));
}

TEST_CASE("dirac kernel is the identity") {
  std::mt19937_64 gen(1);
  for (auto [kh, kw] : {std::pair<std::size_t, std::size_t>{1, 1}, {3, 3}, {5, 4}, {2, 2}}) {
    Grid x = random_grid(gen, 12, 10);
    Grid y = conv2d_circular(x, centered_dirac(kh, kw));
    CHECK(max_abs_diff(y.flat(), x.flat()) <= 1e-12);
    Grid z = conv2d_adjoint(x, centered_dirac(kh, kw));
    CHECK(max_abs_diff(z.flat(), x.flat()) <= 1e-12);
  }
}

TEST_CASE("constant image scales by kernel sum") {
  std::mt19937_64 gen(2);
  Grid k = random_grid(gen, 5, 3);
  Grid x(9, 11, 0.7);
  Grid y = conv2d_circular(x, k);
  for (double v : y.flat()) CHECK(v == doctest::Approx(0.7 * k.sum()).epsilon(1e-12));
}

TEST_CASE("fft convolution matches the direct periodic sum") {
  std::mt19937_64 gen(3);
  Grid x = random_grid(gen, 16, 16);
  Grid k = random_grid(gen, 5, 5);
  CHECK(rel_error(conv2d_circular(x, k).flat(), spatial_conv(x, k).flat()) <= 1e-10);
  for (std::size_t h : {7u, 8u, 13u, 32u}) {
    for (std::size_t kk : {1u, 2u, 4u, 7u}) {
      Grid xi = random_grid(gen, h, h + 3 > 32 ? h : h + 3);
      Grid ki = random_grid(gen, std::min<std::size_t>(kk, h), kk);
      CHECK(rel_error(conv2d_circular(xi, ki).flat(), spatial_conv(xi, ki).flat()) <= 1e-10);
    }
  }
}

TEST_CASE("kernel larger than image is rejected") {
  CHECK_THROWS_AS(conv2d_circular(Grid(4, 4), Grid(5, 3)), std::invalid_argument);
  CHECK_THROWS_AS(conv2d_adjoint(Grid(4, 4), Grid(3, 5)), std::invalid_argument);
  CHECK_THROWS_AS(as_theta_operator(Grid(4, 4), Shape{5, 5}), std::invalid_argument);
}

TEST_CASE("symmetric kernel is self-adjoint") {
  std::mt19937_64 gen(4);
  Grid k = gaussian_kernel(5, 5, 1.2);
  Grid x = random_grid(gen, 14, 12);
  CHECK(max_abs_diff(conv2d_circular(x, k).flat(), conv2d_adjoint(x, k).flat()) <= 1e-12);
}

TEST_CASE("adjoint consistency over random probes") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    Grid k = random_grid(gen, 1 + trial % 5, 1 + (trial / 5) % 5);
    Shape img{8 + static_cast<std::size_t>(trial % 3), 9};
    auto a = convolution_by_kernel(k, img);
    CHECK(adjoint_gap(*a, gen) <= 1e-10);
    Grid x = random_grid(gen, img.height, img.width);
    auto b = as_theta_operator(x, k.shape());
    CHECK(adjoint_gap(*b, gen) <= 1e-10);
    auto d = dense_operator(3 + trial % 3, 4, random_vector(gen, (3 + trial % 3) * 4));
    CHECK(adjoint_gap(*d, gen) <= 1e-10);
  }
}

TEST_CASE("commutativity: B(x) theta equals A(theta) x") {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 10; ++trial) {
    Grid x = random_grid(gen, 12, 12);
    Grid theta = random_grid(gen, 5, 3);
    auto b = as_theta_operator(x, theta.shape());
    auto lhs = b->apply(theta.flat());
    Grid rhs = conv2d_circular(x, theta);
    CHECK(rel_error(lhs, rhs.flat()) <= 1e-12);
  }
}

TEST_CASE("dirac image turns B(x) into a shifted embedding") {
  Grid x = centered_dirac(8, 8);
  Grid v(3, 3);
  for (std::size_t i = 0; i < 9; ++i) v[i] = static_cast<double>(i + 1);
  auto b = as_theta_operator(x, v.shape());
  auto out = b->apply(v.flat());
  // Same multiset of values, placed as a contiguous block.
  std::vector<double> nonzero;
  for (double o : out) {
    if (std::abs(o) > 1e-12) nonzero.push_back(o);
  }
  std::sort(nonzero.begin(), nonzero.end());
  REQUIRE(nonzero.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) CHECK(nonzero[i] == doctest::Approx(i + 1.0));
  Grid expect = conv2d_circular(x, v);
  CHECK(max_abs_diff(out, expect.flat()) <= 1e-12);
}

TEST_CASE("linearity") {
  std::mt19937_64 gen(7);
  Grid k = random_grid(gen, 3, 3);
  Grid u = random_grid(gen, 10, 10), v = random_grid(gen, 10, 10);
  Grid comb(10, 10);
  for (std::size_t i = 0; i < comb.size(); ++i) comb[i] = 0.3 * u[i] - 1.7 * v[i];
  Grid lhs = conv2d_circular(comb, k);
  Grid au = conv2d_circular(u, k), av = conv2d_circular(v, k);
  Grid rhs(10, 10);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = 0.3 * au[i] - 1.7 * av[i];
  CHECK(rel_error(lhs.flat(), rhs.flat()) <= 1e-12);
}

TEST_CASE("dense operator basics") {
  auto id = dense_operator(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  std::vector<double> v{1.5, -2.0, 0.25};
  CHECK(id->apply(v) == v);
  auto two = dense_operator(1, 1, {2.0});
  CHECK(two->apply(std::vector<double>{3.0})[0] == 6.0);
  CHECK_THROWS_AS(dense_operator(2, 2, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("noise model requires a positive sigma") {
  CHECK_THROWS_AS(NoiseModel(0.0), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel(-1.0), std::invalid_argument);
  CHECK(NoiseModel(0.01).sigma_y == 0.01);
}

TEST_CASE("spectral shifted-normal solve") {
  std::mt19937_64 gen(8);
  Grid k = random_grid(gen, 3, 3);
  auto op = convolution_by_kernel(k, Shape{8, 8});
  REQUIRE(op->spectrally_solvable());
  auto rhs = random_vector(gen, 64);
  const double a = 1e4, b = 25.0;
  auto z = op->solve_shifted_normal(rhs, a, b);
  auto az = op->apply(z);
  auto ataz = op->adjoint(az);
  std::vector<double> res(64);
  for (std::size_t i = 0; i < 64; ++i) res[i] = a * ataz[i] + b * z[i] - rhs[i];
  CHECK(std::sqrt(inner(res, res) / inner(rhs, rhs)) <= 1e-12);
  auto kernel_op = as_theta_operator(random_grid(gen, 8, 8), Shape{3, 3});
  CHECK_FALSE(kernel_op->spectrally_solvable());
}

TEST_CASE("bilinear models agree with their operators") {
  std::mt19937_64 gen(9);
  CircularBlurModel blur(Shape{10, 10}, Shape{3, 3});
  Grid x = random_grid(gen, 10, 10), th = random_grid(gen, 3, 3);
  auto y1 = blur.image_operator(th)->apply(x.flat());
  auto y2 = blur.theta_operator(x)->apply(th.flat());
  CHECK(rel_error(y1, y2) <= 1e-12);
  CHECK(rel_error(blur.forward(x, th).flat(), spatial_conv(x, th).flat()) <= 1e-10);

  auto gain = DenseBilinearModel::scalar_gain(2, 2, {1, 1, 1, -1});
  Grid xs(1, 2, std::vector<double>{0.5, 2.0});
  Grid ts(1, 1, 3.0);
  Grid ys = gain.forward(xs, ts);
  CHECK(ys[0] == doctest::Approx(7.5));
  CHECK(ys[1] == doctest::Approx(-4.5));
  auto g1 = gain.image_operator(ts)->apply(xs.flat());
  auto g2 = gain.theta_operator(xs)->apply(ts.flat());
  CHECK(rel_error(g1, g2) <= 1e-14);
}
