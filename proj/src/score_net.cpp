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
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "bpdm/log.hpp"
#include "bpdm/priors.hpp"

namespace bpdm {

static_assert(std::endian::native == std::endian::little,
              "BPDM readers assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'B', 'P', 'D', 'M'};
constexpr std::uint32_t kVersion = 1;

class Reader {
 public:
  Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw LoadError(LoadError::Kind::io, "cannot open " + path.string());
  }

  template <typename T>
  T read(const char* what) {
    T v{};
    read_bytes(&v, sizeof(T), what);
    return v;
  }

  template <typename T>
  std::vector<T> read_array(std::size_t n, const char* what) {
    std::vector<T> v(n);
    if (n) read_bytes(v.data(), n * sizeof(T), what);
    return v;
  }

 private:
  void read_bytes(void* dst, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n))
      throw LoadError(LoadError::Kind::truncated,
                      path_.string() + ": truncated while reading " + what);
  }

  std::filesystem::path path_;
  std::ifstream in_;
};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  template <typename T>
  void write(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  template <typename T>
  void write_array(const std::vector<T>& v) {
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(T)));
  }
  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

void validate_chain(std::uint32_t dim, const std::vector<DenseLayer>& layers) {
  using K = LoadError::Kind;
  if (layers.empty()) throw LoadError(K::dimension_chain, "network has no layers");
  if (dim == 0) throw LoadError(K::dimension_chain, "network dim is zero");
  if (layers.front().cols != dim + 1)
    throw LoadError(K::dimension_chain, "first layer expects " +
                                            std::to_string(layers.front().cols) +
                                            " inputs, dim + 1 = " + std::to_string(dim + 1));
  for (std::size_t i = 1; i < layers.size(); ++i)
    if (layers[i].cols != layers[i - 1].rows)
      throw LoadError(K::dimension_chain, "layer " + std::to_string(i) + " expects " +
                                              std::to_string(layers[i].cols) +
                                              " inputs but layer " + std::to_string(i - 1) +
                                              " produces " + std::to_string(layers[i - 1].rows));
  if (layers.back().rows != dim)
    throw LoadError(K::dimension_chain, "last layer produces " +
                                            std::to_string(layers.back().rows) +
                                            " outputs, expected " + std::to_string(dim));
  for (const auto& l : layers)
    if (l.weights.size() != std::size_t{l.rows} * l.cols || l.bias.size() != l.rows)
      throw LoadError(K::dimension_chain, "layer storage does not match its declared shape");
}

}  // namespace

NeuralDenoiser::NeuralDenoiser(std::uint32_t dim, Activation activation,
                               std::vector<DenseLayer> layers)
    : dim_(dim), activation_(activation), layers_(std::move(layers)) {
  validate_chain(dim_, layers_);
}

NeuralDenoiser::NeuralDenoiser(const NeuralDenoiser& other)
    : dim_(other.dim_),
      activation_(other.activation_),
      layers_(other.layers_),
      sigma_range_(other.sigma_range_) {}

void NeuralDenoiser::set_sigma_range(double lo, double hi) {
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("sigma range must satisfy 0<lo<=hi");
  sigma_range_ = std::make_pair(lo, hi);
}

std::vector<double> NeuralDenoiser::denoise(std::span<const double> u, double sigma) const {
  if (u.size() != dim_)
    throw std::invalid_argument("net_denoise: expected length " + std::to_string(dim_) +
                                ", got " + std::to_string(u.size()));
  if (!(sigma > 0.0)) throw std::invalid_argument("net_denoise: sigma must be positive");
  if (sigma_range_ && (sigma < sigma_range_->first || sigma > sigma_range_->second)) {
    if (!warned_.exchange(true)) {
      std::ostringstream msg;
      msg << "net_denoise: sigma " << sigma << " outside trained range [" << sigma_range_->first
          << ", " << sigma_range_->second << "], clamping";
      log_warning(msg.str());
    }
    sigma = std::clamp(sigma, sigma_range_->first, sigma_range_->second);
  }

  std::vector<double> h(u.begin(), u.end());
  h.push_back(std::log(sigma) / 4.0);
  std::vector<double> next;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    next.assign(layer.rows, 0.0);
    for (std::uint32_t r = 0; r < layer.rows; ++r) {
      const float* w = layer.weights.data() + std::size_t{r} * layer.cols;
      double s = layer.bias[r];
      for (std::uint32_t c = 0; c < layer.cols; ++c) s += static_cast<double>(w[c]) * h[c];
      next[r] = s;
    }
    if (l + 1 < layers_.size()) {
      for (double& v : next) {
        v = activation_ == Activation::relu ? std::max(v, 0.0) : v / (1.0 + std::exp(-v));
      }
    }
    h.swap(next);
  }
  return h;
}

NeuralDenoiser load_score_net(const std::filesystem::path& path) {
  using K = LoadError::Kind;
  Reader in(path);
  char magic[4];
  for (char& c : magic) c = in.read<char>("magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw LoadError(K::bad_magic, path.string() + ": not a BPDM file (bad magic)");
  const auto version = in.read<std::uint32_t>("version");
  if (version != kVersion)
    throw LoadError(K::bad_version, path.string() + ": unsupported BPDM version " +
                                        std::to_string(version));
  const auto dim = in.read<std::uint32_t>("dim");
  const auto count = in.read<std::uint32_t>("layer_count");
  const auto act = in.read<std::uint32_t>("activation");
  if (act > 1)
    throw LoadError(K::bad_activation, path.string() + ": unknown activation code " +
                                           std::to_string(act));
  std::vector<DenseLayer> layers;
  for (std::uint32_t l = 0; l < count; ++l) {
    const std::string tag = "layer " + std::to_string(l);
    DenseLayer layer;
    layer.rows = in.read<std::uint32_t>((tag + " rows").c_str());
    layer.cols = in.read<std::uint32_t>((tag + " cols").c_str());
    // Guard against absurd headers before allocating.
    if (std::size_t{layer.rows} * layer.cols > (std::size_t{1} << 32))
      throw LoadError(K::dimension_chain, path.string() + ": " + tag + " is implausibly large");
    layer.weights = in.read_array<float>(std::size_t{layer.rows} * layer.cols,
                                         (tag + " weights").c_str());
    layer.bias = in.read_array<float>(layer.rows, (tag + " biases").c_str());
    layers.push_back(std::move(layer));
  }
  return NeuralDenoiser(dim, static_cast<Activation>(act), std::move(layers));
}

void save_score_net(const std::filesystem::path& path, const NeuralDenoiser& net) {
  Writer out(path);
  for (char c : kMagic) out.write(c);
  out.write(kVersion);
  out.write(static_cast<std::uint32_t>(net.dim()));
  out.write(static_cast<std::uint32_t>(net.layers().size()));
  out.write(static_cast<std::uint32_t>(net.activation()));
  for (const auto& layer : net.layers()) {
    out.write(layer.rows);
    out.write(layer.cols);
    out.write_array(layer.weights);
    out.write_array(layer.bias);
  }
  out.finish();
}

std::vector<TestVector> load_test_vectors(const std::filesystem::path& path, std::size_t dim) {
  Reader in(path);
  const auto count = in.read<std::uint32_t>("count");
  std::vector<TestVector> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    TestVector tv;
    tv.input = in.read_array<float>(dim, "test vector input");
    tv.sigma = in.read<float>("test vector sigma");
    tv.expected = in.read_array<float>(dim, "test vector output");
    out.push_back(std::move(tv));
  }
  return out;
}

void save_test_vectors(const std::filesystem::path& path, std::span<const TestVector> vectors) {
  Writer out(path);
  out.write(static_cast<std::uint32_t>(vectors.size()));
  for (const auto& tv : vectors) {
    out.write_array(tv.input);
    out.write(tv.sigma);
    out.write_array(tv.expected);
  }
  out.finish();
}

}  // namespace bpdm
