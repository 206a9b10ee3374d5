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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bpdm/app/commands.hpp"

namespace fs = std::filesystem;
using namespace bpdm::app;

int main(int argc, char** argv) {
  CLI::App app{"bpdm: blind plug-and-play diffusion sampler"};
  app.require_subcommand(1);

  std::string config, out, run, truth;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  const auto common = [&](CLI::App* sub, bool with_seed) {
    sub->add_option("--config", config, "JSON run configuration (merged onto the defaults)")
        ->check(CLI::ExistingFile);
    if (with_seed) sub->add_option("--seed", seed, "root seed; overrides the config");
    sub->add_option("--out", out, "output directory; overrides output_dir");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  };
  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic problem bundle");
  common(simulate, true);
  CLI::App* sample = app.add_subcommand("sample", "run the blind sampler and export the chain");
  common(sample, true);
  CLI::App* oracle = app.add_subcommand("oracle", "compare a tiny conjugate chain with its grid oracle");
  common(oracle, true);
  CLI::App* eval = app.add_subcommand("eval", "append PSNR/SSIM/kernel errors of a run to a CSV");
  eval->add_option("--run", run, "run directory written by 'sample'")->required();
  eval->add_option("--truth", truth, "problem bundle with ground truth (default <run>/problem)");
  eval->add_option("--out", out, "results CSV (default <run>/results.csv)");
  app.add_flag_callback("--version", [] {
    std::cout << "bpdm 0.1.0\n";
    std::exit(0);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  CommandOptions opts;
  if (!config.empty()) opts.config = fs::path(config);
  if (!out.empty()) opts.out = fs::path(out);
  opts.threads = threads;
  for (CLI::App* sub : {simulate, sample, oracle})
    if (sub->parsed() && sub->count("--seed") > 0) opts.seed = seed;

  if (simulate->parsed()) return cmd_simulate(opts);
  if (sample->parsed()) return cmd_sample(opts);
  if (oracle->parsed()) return cmd_oracle(opts);
  return cmd_eval(fs::path(run), truth.empty() ? std::nullopt : std::optional<fs::path>(truth),
                  opts.out);
}
