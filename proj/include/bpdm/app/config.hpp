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

#ifndef BPDM_APP_CONFIG_HPP_
#define BPDM_APP_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bpdm/gibbs.hpp"
#include "bpdm/oracle.hpp"
#include "json.hpp"

namespace bpdm::app {

using Json = nlohmann::json;

/// Bad configuration or arguments; maps to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string_view config_schema_text();
std::string_view default_config_text();

/// RFC 7386 merge, except that a prior under "priors" whose "type" changes is replaced
/// wholesale so that fields of the old variant do not leak into the new one.
Json merge_config(Json base, const Json& patch);

/// Schema check plus the cross-field rules the schema cannot express.
void validate_config(const Json& config);

struct LoadedConfig {
  Json config;                      // defaults <- extends chain <- file <- overrides, validated
  std::string source_text;          // bytes of the file as given (defaults text without a file)
  std::filesystem::path base_dir;   // relative input paths resolve against this
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
};

/// Reads `path` (or only the defaults when empty), follows "extends", applies
/// overrides and validates. Throws ValidationError.
LoadedConfig load_config(const std::optional<std::filesystem::path>& path,
                         const ConfigOverrides& overrides = {});

std::filesystem::path resolve_input(const LoadedConfig& loaded, const std::string& path);

SamplerConfig sampler_config(const Json& config);

struct OracleSpec {
  ConjugateBlindProblem problem;
  std::size_t iterations = 0;
  std::size_t burn_in = 0;
  std::size_t edm_steps = 40;
  Axis x_axis;
  Axis theta_axis;
  std::size_t refine = 1;
  double tolerance = 1e-9;
  std::size_t bins = 30;
  double tv_threshold = 0.05;
  bool negative_control = true;
  double negative_rho = 1.0;
  double negative_min_tv = 0.15;
  std::uint64_t seed = 0;
};

OracleSpec oracle_spec(const Json& config);

}  // namespace bpdm::app

#endif  // BPDM_APP_CONFIG_HPP_
