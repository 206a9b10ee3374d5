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

#include "bpdm/app/config.hpp"

#include <rapidjson/document.h>
#include <rapidjson/schema.h>
#include <rapidjson/stringbuffer.h>

#include <fstream>
#include <sstream>

#include "bpdm/io.hpp"

namespace bpdm::app {
namespace {

namespace fs = std::filesystem;

constexpr int kMaxExtendsDepth = 8;

const rapidjson::SchemaDocument& schema_document() {
  static const rapidjson::SchemaDocument schema = [] {
    rapidjson::Document doc;
    const auto text = config_schema_text();
    doc.Parse(text.data(), text.size());
    if (doc.HasParseError()) throw std::logic_error("embedded config schema is not valid JSON");
    return rapidjson::SchemaDocument(doc);
  }();
  return schema;
}

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(origin + ": " + e.what());
  }
}

Json read_layer(const fs::path& path, int depth, std::string* raw) {
  if (depth > kMaxExtendsDepth) throw ValidationError(path.string() + ": 'extends' chain too deep");
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("cannot read config: ") + e.what());
  }
  if (raw) *raw = text;
  Json doc = parse_json(text, path.string());
  if (!doc.is_object()) throw ValidationError(path.string() + ": top level must be an object");
  if (!doc.contains("extends")) return doc;
  if (!doc["extends"].is_string()) throw ValidationError(path.string() + ": 'extends' must be a path");
  const fs::path parent = path.parent_path() / doc["extends"].get<std::string>();
  doc.erase("extends");
  return merge_config(read_layer(parent, depth + 1, nullptr), doc);
}

AnnealSchedule anneal(const Json& j) {
  return {j.at("base").get<double>(), j.at("decay").get<double>(), j.at("floor").get<double>()};
}

EdmConfig edm(const Json& j) {
  EdmConfig c;
  c.sigma_min = j.at("sigma_min").get<double>();
  c.n_steps = j.at("n_steps").get<std::size_t>();
  c.rho_exp = j.at("rho_exp").get<double>();
  c.churn = j.at("churn").get<double>();
  return c;
}

Axis axis(const Json& j) {
  return {j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("points").get<std::size_t>()};
}

void check_oracle_block(const Json& o) {
  const auto& m = o.at("matrix");
  const std::size_t cols = m.front().size();
  for (const auto& row : m)
    if (row.size() != cols) throw ValidationError("oracle.matrix: rows have different lengths");
  if (cols > 2)
    throw ValidationError("oracle: at most 2 image dimensions plus the scalar theta are supported");
  if (o.at("y").size() != m.size()) throw ValidationError("oracle.y: length must equal matrix rows");
  if (o.at("burn_in").get<std::size_t>() > o.at("iterations").get<std::size_t>())
    throw ValidationError("oracle.burn_in exceeds oracle.iterations");
  for (const char* name : {"x_axis", "theta_axis"})
    if (!(o.at(name).at("lo").get<double>() < o.at(name).at("hi").get<double>()))
      throw ValidationError(std::string("oracle.") + name + ": lo must be below hi");
}

// Members of the top-level "priors" block are tagged variants; every other
// object merges field by field.
enum class MergeLevel { root, priors, variant, plain };

Json merge_at(Json base, const Json& patch, MergeLevel level) {
  if (!patch.is_object() || !base.is_object()) return patch;
  if (level == MergeLevel::variant && patch.contains("type") && base.contains("type") &&
      patch["type"] != base["type"])
    return patch;
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const MergeLevel child = level == MergeLevel::root && it.key() == "priors" ? MergeLevel::priors
                             : level == MergeLevel::priors                      ? MergeLevel::variant
                                                                                : MergeLevel::plain;
    if (it.value().is_null())
      base.erase(it.key());
    else if (base.contains(it.key()))
      base[it.key()] = merge_at(base[it.key()], it.value(), child);
    else
      base[it.key()] = it.value();
  }
  return base;
}

}  // namespace

Json merge_config(Json base, const Json& patch) { return merge_at(std::move(base), patch, MergeLevel::root); }

void validate_config(const Json& config) {
  rapidjson::Document doc;
  const std::string text = config.dump();
  doc.Parse(text.c_str());
  rapidjson::SchemaValidator validator(schema_document());
  if (!doc.Accept(validator)) {
    rapidjson::StringBuffer where, rule;
    validator.GetInvalidDocumentPointer().StringifyUriFragment(where);
    validator.GetInvalidSchemaPointer().StringifyUriFragment(rule);
    std::string at = where.GetString();
    if (at.size() > 1 && at[0] == '#') at.erase(0, 1);
    throw ValidationError("config" + (at.empty() ? std::string(" root") : " " + at) +
                          ": violates schema rule '" + validator.GetInvalidSchemaKeyword() +
                          "' (" + rule.GetString() + ")");
  }
  try {
    sampler_config(config).validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("sampler: ") + e.what());
  }
  const auto& image = config.at("problem").at("image");
  if (image.at("source") == "file" && image.at("path").get<std::string>().empty())
    throw ValidationError("problem.image.path is required when source is 'file'");
  const std::size_t ks = config.at("problem").at("kernel").at("size").get<std::size_t>();
  if (ks > image.at("height").get<std::size_t>() || ks > image.at("width").get<std::size_t>())
    throw ValidationError("problem.kernel.size exceeds the image size");
  check_oracle_block(config.at("oracle"));
  try {
    oracle_spec(config).problem.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("oracle: ") + e.what());
  }
}

LoadedConfig load_config(const std::optional<fs::path>& path, const ConfigOverrides& overrides) {
  LoadedConfig out;
  Json config = parse_json(std::string(default_config_text()), "defaults");
  if (path) {
    config = merge_config(std::move(config), read_layer(*path, 0, &out.source_text));
    out.base_dir = path->parent_path();
  } else {
    out.source_text = std::string(default_config_text());
    out.base_dir = fs::current_path();
  }
  if (overrides.seed) config["seed"] = *overrides.seed;
  if (overrides.output_dir) config["output_dir"] = overrides.output_dir->string();
  validate_config(config);
  out.config = std::move(config);
  return out;
}

fs::path resolve_input(const LoadedConfig& loaded, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p : loaded.base_dir / p;
}

SamplerConfig sampler_config(const Json& config) {
  const auto& s = config.at("sampler");
  SamplerConfig c;
  c.K = s.at("K").get<std::size_t>();
  c.burn_in = s.at("burn_in").get<std::size_t>();
  c.anneal_x = anneal(s.at("anneal_x"));
  c.anneal_theta = anneal(s.at("anneal_theta"));
  c.edm_x = edm(s.at("edm_x"));
  c.edm_theta = edm(s.at("edm_theta"));
  const std::string method = s.at("solver").at("method").get<std::string>();
  c.solver.method = method == "fourier" ? SolverMethod::fourier_exact
                    : method == "cg"    ? SolverMethod::conjugate_gradient
                                        : SolverMethod::automatic;
  c.solver.cg_tol = s.at("solver").at("cg_tol").get<double>();
  c.solver.cg_max_iter = s.at("solver").at("cg_max_iter").get<std::size_t>();
  c.record_aux = s.at("record_aux").get<bool>();
  c.noise.sigma_y = config.at("problem").at("sigma_y").get<double>();
  c.seed = config.at("seed").get<std::uint64_t>();
  return c;
}

OracleSpec oracle_spec(const Json& config) {
  const auto& o = config.at("oracle");
  OracleSpec spec;
  auto& p = spec.problem;
  p.rows = o.at("matrix").size();
  p.cols = o.at("matrix").front().size();
  for (const auto& row : o.at("matrix"))
    for (const auto& v : row) p.matrix.push_back(v.get<double>());
  p.y = o.at("y").get<std::vector<double>>();
  p.sigma_y = o.at("sigma_y").get<double>();
  p.x_mean.assign(p.cols, o.at("x_prior").at("mean").get<double>());
  p.x_std = o.at("x_prior").at("std").get<double>();
  p.theta_mean = o.at("theta_prior").at("mean").get<double>();
  p.theta_std = o.at("theta_prior").at("std").get<double>();
  p.rho_x = o.at("rho_x").get<double>();
  p.rho_theta = o.at("rho_theta").get<double>();
  spec.iterations = o.at("iterations").get<std::size_t>();
  spec.burn_in = o.at("burn_in").get<std::size_t>();
  spec.edm_steps = o.at("edm_steps").get<std::size_t>();
  spec.x_axis = axis(o.at("x_axis"));
  spec.theta_axis = axis(o.at("theta_axis"));
  spec.refine = o.at("refine").get<std::size_t>();
  spec.tolerance = o.at("tolerance").get<double>();
  spec.bins = o.at("bins").get<std::size_t>();
  spec.tv_threshold = o.at("tv_threshold").get<double>();
  spec.negative_control = o.at("negative_control").at("enabled").get<bool>();
  spec.negative_rho = o.at("negative_control").at("rho").get<double>();
  spec.negative_min_tv = o.at("negative_control").at("min_tv").get<double>();
  spec.seed = config.at("seed").get<std::uint64_t>();
  return spec;
}

}  // namespace bpdm::app
