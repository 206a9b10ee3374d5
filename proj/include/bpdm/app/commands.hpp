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

#ifndef BPDM_APP_COMMANDS_HPP_
#define BPDM_APP_COMMANDS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bpdm/app/config.hpp"
#include "bpdm/app/problem.hpp"
#include "bpdm/gibbs.hpp"
#include "bpdm/metrics.hpp"
#include "bpdm/oracle.hpp"

namespace bpdm::app {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2 };

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::size_t threads = 1;
};

/// Runs `body`, reporting exceptions on stderr and mapping them to exit codes:
/// ValidationError, std::invalid_argument and LoadError -> 1, anything else -> 2.
int run_guarded(const std::function<int()>& body);

// --- simulate ---------------------------------------------------------------

/// Writes the problem bundle, config echo and manifest into the output directory.
std::filesystem::path simulate(const LoadedConfig& loaded);
int cmd_simulate(const CommandOptions& options);

// --- sample -----------------------------------------------------------------

struct SampleOutcome {
  ProblemBundle problem;
  Initialization init;
  std::vector<GibbsChain> chains;  // chain c is seeded with derive_seed(seed, "chain/<c>")
  PosteriorStats stats;
};

/// Runs the configured chains; at most `threads` run at once. Results do not
/// depend on `threads`.
SampleOutcome run_sampler(const LoadedConfig& loaded, const ProblemBundle& problem,
                          std::size_t threads);

/// Full sample command: bundle (read or generated), chains, exports, estimates.
std::filesystem::path sample(const LoadedConfig& loaded, std::size_t threads);
int cmd_sample(const CommandOptions& options);

// --- eval -------------------------------------------------------------------

struct EvalRow {
  std::string estimate;  // measurement, init, final, mean
  std::optional<double> psnr_db;
  std::optional<double> ssim;
  std::optional<KernelError> kernel;
  std::optional<double> kernel_mse_aligned_projected;
};

std::vector<EvalRow> evaluate_run(const std::filesystem::path& run_dir,
                                  const std::filesystem::path& truth_dir);
/// Appends one row per estimate to `results` (header written for new files).
void append_results(const std::filesystem::path& results, const std::string& run_name,
                    const std::vector<EvalRow>& rows);
int cmd_eval(const std::filesystem::path& run_dir, const std::optional<std::filesystem::path>& truth,
             const std::optional<std::filesystem::path>& out);

// --- oracle -----------------------------------------------------------------

struct OracleMarginal {
  std::string name;  // x1, x2, theta
  std::size_t axis = 0;
  Histogram histogram{0.0, 1.0, 1};
  double tv = 0.0;
  double tv_wrong = 0.0;  // against the mis-specified oracle, when enabled
};

struct OracleReport {
  std::vector<OracleMarginal> marginals;
  std::vector<std::vector<double>> samples;  // post-burn-in (x..., theta)
  std::optional<GridOracle> oracle;
  std::optional<GridOracle> wrong_oracle;
  std::size_t oracle_sweeps = 0;
  double max_tv = 0.0;
  double negative_tv = 0.0;  // max over marginals
  bool pass = false;
  bool negative_pass = true;
};

/// Runs a fixed-rho library chain on the tiny conjugate problem and compares
/// each marginal with the stationary grid oracle (and the wrong-rho control).
OracleReport run_oracle_comparison(const OracleSpec& spec, std::size_t threads);
std::filesystem::path oracle(const LoadedConfig& loaded, std::size_t threads, bool* passed);
int cmd_oracle(const CommandOptions& options);

}  // namespace bpdm::app

#endif  // BPDM_APP_COMMANDS_HPP_
