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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "../test_util.hpp"
#include "bpdm/priors.hpp"
#include "doctest.h"

using namespace bpdm;
using namespace bpdm::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = BPDM_FIXTURE_DIR;

// E[x0 | u] for a 1-D mixture by brute-force quadrature.
double quadrature_posterior_mean(const std::vector<GmmComponent>& comps, double u, double sigma) {
  const std::size_t n = 100000;
  const double lo = -12.0, hi = 12.0, h = (hi - lo) / (n - 1);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = lo + h * i;
    double p = 0.0;
    for (const auto& c : comps) {
      double d = (x - c.mean[0]) / c.std;
      p += c.weight * std::exp(-0.5 * d * d) / c.std;
    }
    double lik = std::exp(-0.5 * (u - x) * (u - x) / (sigma * sigma));
    double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    num += w * x * p * lik;
    den += w * p * lik;
  }
  return num / den;
}

template <typename Prior>
double tweedie_fd_error(const Prior& prior, std::span<const double> u, double sigma) {
  const double step = 1e-5;
  std::vector<double> score = prior.score(u, sigma);
  std::vector<double> fd(u.size());
  std::vector<double> p(u.begin(), u.end());
  for (std::size_t i = 0; i < u.size(); ++i) {
    p[i] = u[i] + step;
    double up = prior.smoothed_log_density(p, sigma);
    p[i] = u[i] - step;
    double dn = prior.smoothed_log_density(p, sigma);
    p[i] = u[i];
    fd[i] = (up - dn) / (2 * step);
  }
  return rel_error(fd, score);
}

NeuralDenoiser random_net(std::mt19937_64& gen, std::uint32_t dim, Activation act) {
  std::normal_distribution<float> n01;
  std::vector<DenseLayer> layers;
  std::vector<std::uint32_t> widths{dim + 1, 7, dim};
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer;
    layer.rows = widths[l + 1];
    layer.cols = widths[l];
    layer.weights.resize(layer.rows * layer.cols);
    layer.bias.resize(layer.rows);
    for (auto& w : layer.weights) w = n01(gen);
    for (auto& b : layer.bias) b = n01(gen);
    layers.push_back(std::move(layer));
  }
  return NeuralDenoiser(dim, act, std::move(layers));
}

}  // namespace

TEST_CASE("gaussian denoiser closed form") {
  GaussianPrior p0(1, 0.0, 1.0);
  CHECK(p0.denoise(std::vector<double>{2.0}, 1.0)[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(p0.denoise(std::vector<double>{0.7}, 1e-6)[0] - 0.7) <= 1e-9);
  GaussianPrior p3(1, 3.0, 2.0);
  CHECK(p3.denoise(std::vector<double>{0.0}, 1.0)[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK_THROWS_AS(p0.denoise(std::vector<double>{0.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(p0.denoise(std::vector<double>{0.0}, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(p0.denoise(std::vector<double>{0.0, 1.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GaussianPrior(2, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("gmm denoiser examples") {
  GmmPrior single({{1.0, {0.4, -0.2}, 0.7}});
  GaussianPrior gauss({0.4, -0.2}, 0.7);
  std::vector<double> u{1.3, 0.25};
  for (double s : {0.01, 0.3, 2.0}) {
    auto a = single.denoise(u, s), b = gauss.denoise(u, s);
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
  }

  GmmPrior sym({{0.5, {-1.0}, 0.3}, {0.5, {1.0}, 0.3}});
  CHECK(std::abs(sym.denoise(std::vector<double>{0.0}, 0.5)[0]) <= 1e-15);

  std::vector<GmmComponent> comps{{0.3, {-2.0}, 0.5}, {0.7, {1.0}, 0.5}};
  GmmPrior mix(comps);
  double got = mix.denoise(std::vector<double>{0.2}, 1.0)[0];
  CHECK(std::abs(got - quadrature_posterior_mean(comps, 0.2, 1.0)) <= 1e-8);

  CHECK_THROWS_AS(mix.denoise(std::vector<double>{0.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(GmmPrior({{0.5, {0.0}, 1.0}, {0.4, {1.0}, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(GmmPrior({{0.5, {0.0}, 1.0}, {0.5, {1.0, 2.0}, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(GmmPrior({{1.0, {0.0}, -1.0}}), std::invalid_argument);
}

TEST_CASE("gmm responsibilities are normalized and stable far from the modes") {
  std::mt19937_64 gen(11);
  GmmPrior mix({{0.2, {0.0, 0.0}, 0.1}, {0.5, {3.0, -1.0}, 0.05}, {0.3, {-2.0, 2.0}, 0.4}});
  for (int i = 0; i < 200; ++i) {
    auto u = random_vector(gen, 2, -50.0, 50.0);
    auto r = mix.responsibilities(u, 0.002);
    double total = 0.0;
    for (double v : r) {
      CHECK(std::isfinite(v));
      total += v;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    auto d = mix.denoise(u, 0.002);
    CHECK(std::isfinite(d[0]));
    CHECK(std::isfinite(d[1]));
  }
}

TEST_CASE("tweedie consistency of analytic scores") {
  std::mt19937_64 gen(12);
  GaussianPrior gauss({0.5, -1.0, 2.0}, 0.8);
  GmmPrior mix({{0.25, {0.0, 0.0}, 0.6}, {0.45, {1.5, -0.5}, 0.4}, {0.3, {-1.0, 1.2}, 0.9}});
  std::uniform_real_distribution<double> log_sigma(std::log(0.1), std::log(2.0));
  for (int i = 0; i < 100; ++i) {
    double s = std::exp(log_sigma(gen));
    auto u3 = random_vector(gen, 3, -3.0, 3.0);
    CHECK(tweedie_fd_error(gauss, u3, s) <= 1e-6);
    auto u2 = random_vector(gen, 2, -3.0, 3.0);
    CHECK(tweedie_fd_error(mix, u2, s) <= 1e-6);
  }
}

TEST_CASE("denoise approaches the identity as sigma vanishes") {
  GmmPrior mix({{0.4, {0.0}, 0.5}, {0.6, {2.0}, 0.3}});
  for (double u : {-1.0, 0.3, 1.9, 4.0}) {
    CHECK(std::abs(mix.denoise(std::vector<double>{u}, 1e-6)[0] - u) <= 1e-9);
  }
}

TEST_CASE("neural denoiser degenerate cases") {
  DenseLayer zero{3, 3, std::vector<float>(9, 0.0f), {0.5f, -1.0f}};
  zero.rows = 2;
  zero.cols = 3;
  zero.weights.assign(6, 0.0f);
  NeuralDenoiser bias_only(2, Activation::silu, {zero});
  auto out = bias_only.denoise(std::vector<double>{3.0, 4.0}, 0.3);
  CHECK(out[0] == doctest::Approx(0.5));
  CHECK(out[1] == doctest::Approx(-1.0));

  DenseLayer ident{2, 3, {1, 0, 0, 0, 1, 0}, {0, 0}};
  NeuralDenoiser id(2, Activation::relu, {ident});
  auto o2 = id.denoise(std::vector<double>{-0.25, 1.75}, 0.1);
  CHECK(o2[0] == -0.25);
  CHECK(o2[1] == 1.75);
  CHECK_THROWS_AS(id.denoise(std::vector<double>{1.0}, 0.1), std::invalid_argument);

  DenseLayer wrong{2, 2, {1, 0, 0, 1}, {0, 0}};
  CHECK_THROWS_AS(NeuralDenoiser(2, Activation::relu, {wrong}), LoadError);
}

TEST_CASE("neural denoiser clamps sigma to its range") {
  DenseLayer l{1, 2, {0.0f, 4.0f}, {0.0f}};
  NeuralDenoiser net(1, Activation::silu, {l});
  net.set_sigma_range(0.01, 1.0);
  auto lo = net.denoise(std::vector<double>{0.0}, 1e-5);
  CHECK(lo[0] == doctest::Approx(std::log(0.01)));
  auto hi = net.denoise(std::vector<double>{0.0}, 50.0);
  CHECK(hi[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("neural forward pass is deterministic") {
  std::mt19937_64 gen(13);
  NeuralDenoiser net = random_net(gen, 5, Activation::silu);
  auto u = random_vector(gen, 5);
  auto a = net.denoise(u, 0.2), b = net.denoise(u, 0.2);
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("bpdm write-then-read round trip is bitwise") {
  std::mt19937_64 gen(14);
  NeuralDenoiser net = random_net(gen, 4, Activation::relu);
  fs::path path = fs::temp_directory_path() / "bpdm_roundtrip_test.bpdm";
  save_score_net(path, net);
  NeuralDenoiser back = load_score_net(path);
  REQUIRE(back.layers().size() == net.layers().size());
  CHECK(back.activation() == net.activation());
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const auto& a = net.layers()[l];
    const auto& b = back.layers()[l];
    CHECK(a.rows == b.rows);
    CHECK(a.cols == b.cols);
    CHECK(std::memcmp(a.weights.data(), b.weights.data(), a.weights.size() * 4) == 0);
    CHECK(std::memcmp(a.bias.data(), b.bias.data(), a.bias.size() * 4) == 0);
  }
  fs::remove(path);
}

TEST_CASE("bpdm load errors are distinct") {
  std::mt19937_64 gen(15);
  NeuralDenoiser net = random_net(gen, 3, Activation::silu);
  fs::path good = fs::temp_directory_path() / "bpdm_err_good.bpdm";
  save_score_net(good, net);
  std::string bytes;
  {
    std::ifstream in(good, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [](const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  };
  auto kind_of = [](const fs::path& p) {
    try {
      load_score_net(p);
    } catch (const LoadError& e) {
      return e.kind();
    }
    FAIL("expected a load error");
    return LoadError::Kind::io;
  };
  fs::path bad = fs::temp_directory_path() / "bpdm_err_bad.bpdm";

  write(bad, bytes.substr(0, bytes.size() / 2));
  CHECK(kind_of(bad) == LoadError::Kind::truncated);

  std::string magic = bytes;
  magic[0] = 'X';
  write(bad, magic);
  CHECK(kind_of(bad) == LoadError::Kind::bad_magic);

  std::string version = bytes;
  version[4] = 2;
  write(bad, version);
  CHECK(kind_of(bad) == LoadError::Kind::bad_version);

  std::string act = bytes;
  act[16] = 9;
  write(bad, act);
  CHECK(kind_of(bad) == LoadError::Kind::bad_activation);

  std::string chain = bytes;
  chain[8] = 5;  // dim no longer matches the first layer
  write(bad, chain);
  CHECK(kind_of(bad) == LoadError::Kind::dimension_chain);

  CHECK(kind_of(fs::temp_directory_path() / "bpdm_does_not_exist.bpdm") == LoadError::Kind::io);
  fs::remove(good);
  fs::remove(bad);
}

TEST_CASE("fixture networks reproduce their reference vectors") {
  for (auto [stem, dim] : {std::pair<const char*, std::size_t>{"toy_silu", 6}, {"toy_relu", 4}}) {
    NeuralDenoiser net = load_score_net(kFixtures / (std::string(stem) + ".bpdm"));
    CHECK(net.dim() == dim);
    auto vectors = load_test_vectors(kFixtures / (std::string(stem) + ".vec"), dim);
    REQUIRE(vectors.size() == 10);
    for (const auto& tv : vectors) {
      std::vector<double> u(tv.input.begin(), tv.input.end());
      std::vector<double> expect(tv.expected.begin(), tv.expected.end());
      auto got = net.denoise(u, tv.sigma);
      CHECK(rel_error(got, expect) <= 1e-5);
    }
  }
}

TEST_CASE("test vector round trip") {
  std::vector<TestVector> tvs{{{1.0f, 2.0f}, 0.5f, {3.0f, 4.0f}}, {{-1.0f, 0.0f}, 0.1f, {0.0f, 1.0f}}};
  fs::path p = fs::temp_directory_path() / "bpdm_tv_test.vec";
  save_test_vectors(p, tvs);
  auto back = load_test_vectors(p, 2);
  REQUIRE(back.size() == 2);
  CHECK(back[1].sigma == 0.1f);
  CHECK(back[0].expected[1] == 4.0f);
  CHECK_THROWS(load_test_vectors(p, 3));
  fs::remove(p);
}
