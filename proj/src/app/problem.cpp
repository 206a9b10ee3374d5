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

#include "bpdm/app/problem.hpp"

#include <algorithm>
#include <cmath>

#include "bpdm/forward_models.hpp"
#include "bpdm/io.hpp"

namespace bpdm::app {
namespace {

namespace fs = std::filesystem;

std::vector<GmmComponent> scalar_components(const Json& list, std::size_t dim) {
  std::vector<GmmComponent> out;
  for (const auto& c : list)
    out.push_back({c.at("weight").get<double>(),
                   std::vector<double>(dim, c.at("mean").get<double>()), c.at("std").get<double>()});
  return out;
}

std::unique_ptr<ScoreModel> load_network(const LoadedConfig& loaded, const Json& spec,
                                         std::size_t dim, const char* what) {
  const fs::path path = resolve_input(loaded, spec.at("path").get<std::string>());
  auto net = std::make_unique<NeuralDenoiser>(load_score_net(path));
  if (net->dim() != dim)
    throw ValidationError(std::string(what) + " network " + path.string() + " has dimension " +
                          std::to_string(net->dim()) + ", expected " + std::to_string(dim));
  if (spec.contains("sigma_range")) {
    const auto r = spec.at("sigma_range").get<std::vector<double>>();
    net->set_sigma_range(r[0], r[1]);
  }
  return net;
}

void check_kernel_params(const Json& k) {
  const std::size_t size = k.at("size").get<std::size_t>();
  if (size == 0) throw ValidationError("problem.kernel.size must be positive");
  if (!(k.at("std").get<double>() > 0) || !(k.at("step_std").get<double>() > 0) ||
      !(k.at("smoothing_std").get<double>() > 0))
    throw ValidationError("problem.kernel: std parameters must be positive");
}

}  // namespace

Grid blob_image(Shape shape, std::size_t blob_count, Rng& rng) {
  Grid img(shape, 0.0);
  for (std::size_t b = 0; b < blob_count; ++b) {
    const double cr = rng.uniform() * static_cast<double>(shape.height);
    const double cc = rng.uniform() * static_cast<double>(shape.width);
    const double s = 2.0 + 6.0 * rng.uniform();
    const double a = 0.3 + 0.7 * rng.uniform();
    for (std::size_t r = 0; r < shape.height; ++r)
      for (std::size_t c = 0; c < shape.width; ++c) {
        const double dr = static_cast<double>(r) - cr, dc = static_cast<double>(c) - cc;
        img(r, c) += a * std::exp(-(dr * dr + dc * dc) / (2.0 * s * s));
      }
  }
  for (double& v : img.flat()) v = std::min(v, 1.0);
  return img;
}

Grid motion_kernel(std::size_t size, std::size_t steps, double step_std, double smoothing_std,
                   Rng& rng) {
  if (size == 0 || !(step_std > 0) || !(smoothing_std > 0))
    throw ValidationError("motion kernel: size and std parameters must be positive");
  if (steps == 0) steps = 3 * size;
  std::vector<double> pr{0.0}, pc{0.0};
  for (std::size_t i = 0; i < steps; ++i) {
    pr.push_back(pr.back() + step_std * rng.normal());
    pc.push_back(pc.back() + step_std * rng.normal());
  }
  double mr = 0.0, mc = 0.0;
  for (std::size_t i = 0; i < pr.size(); ++i) {
    mr += pr[i];
    mc += pc[i];
  }
  mr /= static_cast<double>(pr.size());
  mc /= static_cast<double>(pc.size());
  const double center = static_cast<double>(size / 2), top = static_cast<double>(size - 1);
  Grid raster(size, size, 0.0);
  for (std::size_t i = 0; i < pr.size(); ++i) {
    const double r = std::clamp(pr[i] - mr + center, 0.0, top);
    const double c = std::clamp(pc[i] - mc + center, 0.0, top);
    const auto r0 = static_cast<std::size_t>(r), c0 = static_cast<std::size_t>(c);
    const std::size_t r1 = std::min(r0 + 1, size - 1), c1 = std::min(c0 + 1, size - 1);
    const double fr = r - static_cast<double>(r0), fc = c - static_cast<double>(c0);
    raster(r0, c0) += (1 - fr) * (1 - fc);
    raster(r0, c1) += (1 - fr) * fc;
    raster(r1, c0) += fr * (1 - fc);
    raster(r1, c1) += fr * fc;
  }
  // Zero-padded separable smoothing keeps the support inside the grid.
  const int half = static_cast<int>(std::ceil(3.0 * smoothing_std));
  std::vector<double> taps(2 * half + 1);
  for (int t = -half; t <= half; ++t)
    taps[t + half] = std::exp(-0.5 * t * t / (smoothing_std * smoothing_std));
  const int n = static_cast<int>(size);
  Grid tmp(size, size, 0.0), out(size, size, 0.0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      for (int t = -half; t <= half; ++t)
        if (c + t >= 0 && c + t < n) tmp(r, c) += taps[t + half] * raster(r, c + t);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      for (int t = -half; t <= half; ++t)
        if (r + t >= 0 && r + t < n) out(r, c) += taps[t + half] * tmp(r + t, c);
  const double total = out.sum();
  for (double& v : out.flat()) v /= total;
  return out;
}

std::unique_ptr<ScoreModel> make_image_prior(const LoadedConfig& loaded, Shape shape) {
  const Json& spec = loaded.config.at("priors").at("image");
  const std::string type = spec.at("type").get<std::string>();
  if (type == "gaussian")
    return std::make_unique<GaussianPrior>(shape.size(), spec.at("mean").get<double>(),
                                           spec.at("std").get<double>());
  if (type == "gmm")
    return std::make_unique<GmmPrior>(scalar_components(spec.at("components"), shape.size()));
  if (type == "blob_templates") {
    const Rng root(spec.at("seed").get<std::uint64_t>());
    const std::size_t count = spec.at("templates").get<std::size_t>();
    std::vector<GmmComponent> comps;
    for (std::size_t t = 0; t < count; ++t) {
      Rng rng = root.substream("template/" + std::to_string(t));
      comps.push_back({1.0 / static_cast<double>(count),
                       blob_image(shape, spec.at("blob_count").get<std::size_t>(), rng).values(),
                       spec.at("component_std").get<double>()});
    }
    return std::make_unique<GmmPrior>(std::move(comps));
  }
  return load_network(loaded, spec, shape.size(), "image prior");
}

std::unique_ptr<ScoreModel> make_kernel_prior(const LoadedConfig& loaded, std::size_t size) {
  const Json& spec = loaded.config.at("priors").at("kernel");
  const std::string type = spec.at("type").get<std::string>();
  const std::size_t dim = size * size;
  if (type == "gaussian")
    return std::make_unique<GaussianPrior>(
        gaussian_kernel(size, size, spec.at("mean_kernel_std").get<double>()).values(),
        spec.at("std").get<double>());
  if (type == "gmm") return std::make_unique<GmmPrior>(scalar_components(spec.at("components"), dim));
  if (type == "kernel_dictionary") {
    const auto stds = spec.at("stds").get<std::vector<double>>();
    std::vector<GmmComponent> comps;
    for (double s : stds)
      comps.push_back({1.0 / static_cast<double>(stds.size()), gaussian_kernel(size, size, s).values(),
                       spec.at("component_std").get<double>()});
    return std::make_unique<GmmPrior>(std::move(comps));
  }
  return load_network(loaded, spec, dim, "kernel prior");
}

Grid sample_prior(const ScoreModel& prior, Shape shape, Rng& rng) {
  Grid out(shape, 0.0);
  if (const auto* g = dynamic_cast<const GaussianPrior*>(&prior)) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = g->mean()[i] + g->std() * rng.normal();
    return out;
  }
  if (const auto* m = dynamic_cast<const GmmPrior*>(&prior)) {
    double total = 0.0;
    for (const auto& c : m->components()) total += c.weight;
    double u = rng.uniform() * total;
    const GmmComponent* pick = &m->components().back();
    for (const auto& c : m->components()) {
      if (u < c.weight) {
        pick = &c;
        break;
      }
      u -= c.weight;
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = pick->mean[i] + pick->std * rng.normal();
    return out;
  }
  throw ValidationError("problem.image.source 'prior_sample' needs a gaussian or mixture image prior");
}

ProblemBundle generate_problem(const LoadedConfig& loaded) {
  const Json& cfg = loaded.config;
  const Json& p = cfg.at("problem");
  const Rng root(cfg.at("seed").get<std::uint64_t>());
  ProblemBundle b;
  b.sigma_y = p.at("sigma_y").get<double>();
  if (!(b.sigma_y > 0)) throw ValidationError("problem.sigma_y must be positive");

  const Json& img = p.at("image");
  const Shape shape{img.at("height").get<std::size_t>(), img.at("width").get<std::size_t>()};
  const std::string source = img.at("source").get<std::string>();
  Rng image_rng = root.substream("simulate/image");
  if (source == "file") {
    b.x_true = read_grid(resolve_input(loaded, img.at("path").get<std::string>()));
  } else if (source == "blobs") {
    b.x_true = blob_image(shape, img.at("blob_count").get<std::size_t>(), image_rng);
  } else {
    b.x_true = sample_prior(*make_image_prior(loaded, shape), shape, image_rng);
  }

  const Json& k = p.at("kernel");
  check_kernel_params(k);
  const std::size_t ks = k.at("size").get<std::size_t>();
  if (ks > b.x_true.height() || ks > b.x_true.width())
    throw ValidationError("problem.kernel.size exceeds the image size");
  Rng kernel_rng = root.substream("simulate/kernel");
  b.kernel_true = k.at("type") == "motion"
                      ? motion_kernel(ks, k.at("walk_steps").get<std::size_t>(),
                                      k.at("step_std").get<double>(),
                                      k.at("smoothing_std").get<double>(), kernel_rng)
                      : gaussian_kernel(ks, ks, k.at("std").get<double>());

  b.y = conv2d_circular(b.x_true, b.kernel_true);
  Rng noise_rng = root.substream("simulate/noise");
  for (double& v : b.y.flat()) v += b.sigma_y * noise_rng.normal();
  return b;
}

void write_bundle(const fs::path& dir, const ProblemBundle& bundle, const Json& config) {
  fs::create_directories(dir);
  const std::string ext = "." + config.at("output").at("image_format").get<std::string>();
  const int depth = config.at("output").at("bit_depth").get<int>();
  write_grid_csv(dir / "x_true.csv", bundle.x_true);
  write_grid_csv(dir / "kernel_true.csv", bundle.kernel_true);
  write_grid_csv(dir / "y.csv", bundle.y);
  write_grid(dir / ("x_true" + ext), bundle.x_true, depth);
  write_grid(dir / ("y" + ext), bundle.y, depth);
  // Kernel previews are scaled to their peak so they remain visible.
  Grid preview = bundle.kernel_true;
  double peak = 0.0;
  for (double v : preview.flat()) peak = std::max(peak, v);
  if (peak > 0)
    for (double& v : preview.flat()) v /= peak;
  write_grid(dir / ("kernel_true" + ext), preview, depth);
}

ProblemBundle read_bundle(const fs::path& dir, double sigma_y) {
  ProblemBundle b;
  for (const char* name : {"x_true.csv", "kernel_true.csv", "y.csv"})
    if (!fs::exists(dir / name))
      throw ValidationError("problem bundle " + dir.string() + " is missing " + name);
  b.x_true = read_grid_csv(dir / "x_true.csv");
  b.kernel_true = read_grid_csv(dir / "kernel_true.csv");
  b.y = read_grid_csv(dir / "y.csv");
  b.sigma_y = sigma_y;
  return b;
}

}  // namespace bpdm::app
