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

#include <chrono>
#include <cmath>
#include <random>

#include "../test_util.hpp"
#include "bpdm/oracle.hpp"
#include "bpdm/priors.hpp"
#include "doctest.h"

using namespace bpdm;
using namespace bpdm::testing;

namespace {

double log_std_normal(std::span<const double> p) { return -0.5 * p[0] * p[0]; }

ConjugateBlindProblem tiny_problem(double rho) {
  ConjugateBlindProblem p;
  p.rows = 2;
  p.cols = 2;
  p.matrix = {1.0, 1.0, 1.0, -1.0};
  p.y = {1.0, 0.4};
  p.sigma_y = 0.5;
  p.x_mean = {0.0, 0.0};
  p.x_std = 1.0;
  p.theta_mean = 1.0;
  p.theta_std = 0.5;
  p.rho_x = rho;
  p.rho_theta = rho;
  return p;
}

std::vector<Axis> tiny_axes(std::size_t nx, std::size_t nt) {
  return {Axis{-3.5, 4.0, nx}, Axis{-3.5, 4.0, nx}, Axis{-1.5, 3.5, nt}};
}

// The same sweep written directly with exact Gaussian draws for every step.
struct ExactSweepChain {
  const ConjugateBlindProblem& p;
  std::mt19937_64 gen;
  std::normal_distribution<double> n01;
  double x[2] = {0.0, 0.0};
  double theta = 1.0;

  ExactSweepChain(const ConjugateBlindProblem& prob, std::uint64_t seed) : p(prob), gen(seed) {}

  void sweep() {
    const double s2 = p.sigma_y * p.sigma_y, rx2 = p.rho_x * p.rho_x, rt2 = p.rho_theta * p.rho_theta;
    for (int i = 0; i < 2; ++i) {
      double d = 0.0, mty = 0.0;
      for (int r = 0; r < 2; ++r) {
        d += p.matrix[r * 2 + i] * p.matrix[r * 2 + i];
        mty += p.matrix[r * 2 + i] * p.y[r];
      }
      const double prec = theta * theta * d / s2 + 1.0 / rx2;
      const double z = (theta * mty / s2 + x[i] / rx2) / prec + n01(gen) / std::sqrt(prec);
      const double sx2 = p.x_std * p.x_std;
      x[i] = (sx2 * z + rx2 * p.x_mean[i]) / (sx2 + rx2) + std::sqrt(sx2 * rx2 / (sx2 + rx2)) * n01(gen);
    }
    double c1 = 0.0, c2 = 0.0;
    for (int r = 0; r < 2; ++r) {
      const double mx = p.matrix[r * 2] * x[0] + p.matrix[r * 2 + 1] * x[1];
      c1 += mx * mx;
      c2 += mx * p.y[r];
    }
    const double prec = c1 / s2 + 1.0 / rt2;
    const double v = (c2 / s2 + theta / rt2) / prec + n01(gen) / std::sqrt(prec);
    const double st2 = p.theta_std * p.theta_std;
    theta = (st2 * v + rt2 * p.theta_mean) / (st2 + rt2) + std::sqrt(st2 * rt2 / (st2 + rt2)) * n01(gen);
  }
};

}  // namespace

TEST_CASE("standard normal oracle moments") {
  GridOracle o = build_grid_oracle(log_std_normal, {Axis{-6.0, 6.0, 256}});
  CHECK(std::abs(o.marginal_mean(0)) <= 1e-4);
  CHECK(std::abs(o.marginal_variance(0) - 1.0) <= 1e-3);
  CHECK(std::abs(o.total_mass() - 1.0) <= 1e-12);
}

TEST_CASE("conjugate gaussian oracle matches the closed form") {
  // Prior N(mu0, s0^2) on x, observation y = a x + e.
  const double mu0 = 0.5, s0 = 1.2, a = 2.0, sy = 0.7, y = 1.9;
  GridOracle o = build_grid_oracle(
      [&](std::span<const double> p) {
        const double x = p[0];
        return -0.5 * (x - mu0) * (x - mu0) / (s0 * s0) - 0.5 * (y - a * x) * (y - a * x) / (sy * sy);
      },
      {Axis{-4.0, 5.0, 2001}});
  const double prec = 1.0 / (s0 * s0) + a * a / (sy * sy);
  const double mean = (mu0 / (s0 * s0) + a * y / (sy * sy)) / prec;
  CHECK(std::abs(o.marginal_mean(0) - mean) <= 1e-4);
  CHECK(std::abs(o.marginal_variance(0) - 1.0 / prec) <= 1e-4);

  // Same posterior as the x-marginal of a 2-D joint with a nuisance axis.
  GridOracle o2 = build_grid_oracle(
      [&](std::span<const double> p) {
        return -0.5 * (p[0] - mu0) * (p[0] - mu0) / (s0 * s0) -
               0.5 * (y - a * p[0]) * (y - a * p[0]) / (sy * sy) - 0.5 * p[1] * p[1] / 0.09;
      },
      {Axis{-4.0, 5.0, 601}, Axis{-2.0, 2.0, 201}});
  CHECK(std::abs(o2.marginal_mean(0) - mean) <= 1e-4);
  CHECK(std::abs(o2.marginal_variance(0) - 1.0 / prec) <= 1e-4);
}

TEST_CASE("bimodal mixture mass split matches the weights") {
  GmmPrior mix({{0.3, {-2.0}, 0.4}, {0.7, {1.5}, 0.3}});
  GridOracle o = build_grid_oracle(
      [&](std::span<const double> p) { return mix.smoothed_log_density(p, 1e-9); },
      {Axis{-6.0, 6.0, 4001}});
  // Split at the density minimum between the modes; tails past it are < 1e-4.
  CHECK(std::abs(o.marginal_mass(0, -6.0, -0.4) - 0.3) <= 1e-3);
  CHECK(std::abs(o.marginal_mass(0, -0.4, 6.0) - 0.7) <= 1e-3);
}

TEST_CASE("marginals integrate to one") {
  GridOracle o = build_grid_oracle(
      [](std::span<const double> p) {
        return -0.5 * (p[0] * p[0] + 2 * p[1] * p[1] + 0.5 * p[2] * p[2] + p[0] * p[1]);
      },
      {Axis{-5, 5, 31}, Axis{-4, 4, 29}, Axis{-7, 7, 41}});
  for (std::size_t a = 0; a < 3; ++a) {
    auto m = o.marginal(a);
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += o.axes()[a].trapezoid_weight(i) * m[i];
    CHECK(std::abs(s - 1.0) <= 1e-6);
  }
}

TEST_CASE("oracle errors") {
  std::vector<Axis> five(5, Axis{-1, 1, 3});
  CHECK_THROWS_AS(build_grid_oracle([](std::span<const double>) { return 0.0; }, five),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_grid_oracle(
                      [](std::span<const double>) { return -std::numeric_limits<double>::infinity(); },
                      {Axis{-1, 1, 5}}),
                  std::runtime_error);
  CHECK_THROWS_AS(build_grid_oracle(log_std_normal, {Axis{1, -1, 5}}), std::invalid_argument);
}

TEST_CASE("tv distance basics") {
  GridOracle o = build_grid_oracle(log_std_normal, {Axis{-6.0, 6.0, 2001}});
  Histogram h(-3.0, 3.0, 3);
  CHECK_THROWS_AS(tv_distance(h, std::vector<double>{0.5, 0.5}), std::invalid_argument);

  // Identical distributions.
  Histogram exact(0.0, 3.0, 3);
  for (int i = 0; i < 30; ++i) exact.add(0.5 + (i % 3));
  CHECK(tv_distance(exact, std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}) <= 1e-15);

  // Disjoint supports.
  Histogram far(-3.0, 3.0, 6);
  for (int i = 0; i < 100; ++i) far.add(2.5);
  CHECK(tv_distance(far, std::vector<double>{1, 0, 0, 0, 0, 0}) == doctest::Approx(1.0));
  Histogram outside(-1.0, 1.0, 4);
  outside.add(50.0);
  CHECK(tv_distance(outside, std::vector<double>{0.25, 0.25, 0.25, 0.25}) == doctest::Approx(1.0));

  // Monte Carlo calibration: N(0,1) samples, 5e4 draws, 50 bins.
  std::mt19937_64 gen(301);
  std::normal_distribution<double> n01;
  Histogram mc(-4.0, 4.0, 50);
  for (int i = 0; i < 50000; ++i) mc.add(n01(gen));
  double tv = tv_distance(mc, o, 0);
  CHECK(tv <= 0.03);
  CHECK(tv >= 0.0);
}

TEST_CASE("stationary oracle agrees with a long exact-kernel chain") {
  ConjugateBlindProblem p = tiny_problem(0.2);
  auto start = std::chrono::steady_clock::now();
  StationaryOracleOptions opt;
  opt.refine = 4;
  opt.tolerance = 1e-9;
  GridOracle o = gibbs_stationary_oracle(p, tiny_axes(31, 21), opt);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  MESSAGE("stationary oracle: " << secs << " s");

  ExactSweepChain chain(p, 302);
  for (int i = 0; i < 1000; ++i) chain.sweep();
  Histogram hx(-2.0, 3.0, 50), ht(-0.5, 2.5, 50);
  std::vector<double> xs, ts;
  for (int i = 0; i < 400000; ++i) {
    chain.sweep();
    hx.add(chain.x[0]);
    ht.add(chain.theta);
    xs.push_back(chain.x[0]);
    ts.push_back(chain.theta);
  }
  Moments mx = moments(xs), mt = moments(ts);
  MESSAGE("x1 mean " << mx.mean << " vs " << o.marginal_mean(0) << ", theta mean " << mt.mean
                     << " vs " << o.marginal_mean(2));
  CHECK(std::abs(mx.mean - o.marginal_mean(0)) <= 0.01);
  CHECK(std::abs(mt.mean - o.marginal_mean(2)) <= 0.01);
  CHECK(std::abs(mx.var / o.marginal_variance(0) - 1.0) <= 0.02);
  CHECK(std::abs(mt.var / o.marginal_variance(2) - 1.0) <= 0.02);
  CHECK(tv_distance(hx, o, 0) <= 0.015);
  CHECK(tv_distance(ht, o, 2) <= 0.015);
  // Edges carry negligible mass, so the truncated grid is not biasing the law.
  CHECK(o.marginal_mass(0, -3.5, -3.0) + o.marginal_mass(0, 3.5, 4.0) <= 1e-4);
  CHECK(o.marginal_mass(2, -1.5, -1.0) + o.marginal_mass(2, 3.0, 3.5) <= 1e-4);
}

TEST_CASE("stationary oracle is sensitive to the coupling strength") {
  StationaryOracleOptions opt;
  opt.refine = 4;
  opt.tolerance = 1e-9;
  GridOracle right = gibbs_stationary_oracle(tiny_problem(0.2), tiny_axes(31, 21), opt);
  GridOracle wrong = gibbs_stationary_oracle(tiny_problem(0.8), tiny_axes(31, 21), opt);
  MESSAGE("theta variance rho 0.2: " << right.marginal_variance(2)
                                     << ", rho 0.8: " << wrong.marginal_variance(2));
  CHECK(wrong.marginal_variance(0) > right.marginal_variance(0));
}

TEST_CASE("stationary oracle argument checks") {
  ConjugateBlindProblem p = tiny_problem(0.2);
  CHECK_THROWS_AS(gibbs_stationary_oracle(p, {Axis{-1, 1, 5}, Axis{-1, 1, 5}}), std::invalid_argument);
  ConjugateBlindProblem skew = p;
  skew.matrix = {1.0, 0.5, 1.0, -1.0};
  CHECK_THROWS_AS(gibbs_stationary_oracle(skew, tiny_axes(5, 5)), std::invalid_argument);
}
