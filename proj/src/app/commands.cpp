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

#include "bpdm/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "bpdm/errors.hpp"
#include "bpdm/forward_models.hpp"
#include "bpdm/io.hpp"
#include "bpdm/log.hpp"
#include "bpdm/priors.hpp"

namespace bpdm::app {
namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path output_dir(const LoadedConfig& loaded) {
  return fs::path(loaded.config.at("output_dir").get<std::string>());
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

// The config echo is the input file byte for byte; the resolved document
// (defaults and overrides applied) lives in the manifest.
void write_config_echo(const fs::path& dir, const LoadedConfig& loaded) {
  write_text_file(dir / "config.json", loaded.source_text);
}

Json manifest_base(const std::string& command, const LoadedConfig& loaded) {
  Json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["created_utc"] = utc_now();
  m["seed"] = loaded.config.at("seed");
  m["config_file"] = "config.json";
  m["resolved_config"] = loaded.config;
  return m;
}

void write_manifest(const fs::path& dir, const Json& manifest) {
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::string image_ext(const Json& config) {
  return "." + config.at("output").at("image_format").get<std::string>();
}

void write_estimate(const fs::path& dir, const std::string& stem, const Grid& g, const Json& config,
                    bool preview) {
  write_grid_csv(dir / (stem + ".csv"), g);
  if (preview)
    write_grid(dir / (stem + image_ext(config)), g, config.at("output").at("bit_depth").get<int>());
}

fs::path run_name_dir(const fs::path& run_dir) {
  fs::path p = fs::absolute(run_dir).lexically_normal();
  if (p.filename().empty()) p = p.parent_path();
  return p;
}

std::string format_optional(const std::optional<double>& v) {
  if (!v) return "";
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return format_double(*v);
}

}  // namespace

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const StepError& e) {
    std::cerr << "error: " << (e.divergence() ? "divergence at " : "failure at ") << e.what()
              << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

// --- simulate ---------------------------------------------------------------

fs::path simulate(const LoadedConfig& loaded) {
  const ProblemBundle bundle = generate_problem(loaded);
  const fs::path dir = output_dir(loaded);
  prepare_dir(dir);
  write_bundle(dir, bundle, loaded.config);
  write_config_echo(dir, loaded);
  Json m = manifest_base("simulate", loaded);
  m["generation_seed"] = loaded.config.at("seed");
  m["streams"] = {"simulate/image", "simulate/kernel", "simulate/noise"};
  m["image_shape"] = {bundle.x_true.height(), bundle.x_true.width()};
  m["kernel_shape"] = {bundle.kernel_true.height(), bundle.kernel_true.width()};
  m["sigma_y"] = bundle.sigma_y;
  m["measurement_psnr_db"] = psnr(bundle.y, bundle.x_true);
  write_manifest(dir, m);
  return dir;
}

int cmd_simulate(const CommandOptions& options) {
  return run_guarded([&] {
    const LoadedConfig loaded = load_config(options.config, {options.seed, options.out});
    const fs::path dir = simulate(loaded);
    std::cout << "problem bundle written to " << dir.string() << "\n";
    return kExitOk;
  });
}

// --- sample -----------------------------------------------------------------

SampleOutcome run_sampler(const LoadedConfig& loaded, const ProblemBundle& problem,
                          std::size_t threads) {
  const Json& cfg = loaded.config;
  SamplerConfig base = sampler_config(cfg);
  base.noise = NoiseModel(problem.sigma_y);
  const std::size_t ks = cfg.at("problem").at("kernel").at("size").get<std::size_t>();
  if (problem.kernel_true.shape() != Shape{ks, ks})
    throw ValidationError("problem bundle kernel shape does not match problem.kernel.size");
  const auto image_prior = make_image_prior(loaded, problem.y.shape());
  const auto kernel_prior = make_kernel_prior(loaded, ks);

  SampleOutcome out;
  out.problem = problem;
  out.init = default_initialization(problem.y, Shape{ks, ks},
                                    cfg.at("init").at("kernel_std").get<double>());
  const std::size_t n = cfg.at("sampler").at("chains").get<std::size_t>();
  out.chains.resize(n);
  std::vector<std::exception_ptr> errors(n);
  const auto run_one = [&](std::size_t c) {
    try {
      SamplerConfig sc = base;
      sc.seed = Rng::derive_seed(base.seed, "chain/" + std::to_string(c));
      out.chains[c] = run_blind_pnpdm(problem.y, out.init.x0, out.init.theta0, *image_prior,
                                      *kernel_prior, sc);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, n);
  if (workers == 1) {
    for (std::size_t c = 0; c < n; ++c) run_one(c);
  } else {
    std::vector<std::thread> pool;
    std::mutex mu;
    std::size_t next = 0;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t c;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next == n) return;
            c = next++;
          }
          run_one(c);
        }
      });
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  out.stats = posterior_stats(out.chains, base.burn_in);
  return out;
}

fs::path sample(const LoadedConfig& loaded, std::size_t threads) {
  const Json& cfg = loaded.config;
  const std::string bundle_path = cfg.at("problem").at("bundle").get<std::string>();
  const ProblemBundle problem =
      bundle_path.empty()
          ? generate_problem(loaded)
          : read_bundle(resolve_input(loaded, bundle_path), cfg.at("problem").at("sigma_y").get<double>());
  const fs::path dir = output_dir(loaded);
  prepare_dir(dir);
  write_config_echo(dir, loaded);
  write_bundle(dir / "problem", problem, cfg);

  const SampleOutcome result = run_sampler(loaded, problem, threads);

  const Json& out_cfg = cfg.at("output");
  ChainExportOptions export_opts;
  export_opts.per_iteration_grids = out_cfg.at("per_iteration_grids").get<bool>();
  export_opts.binary_dump = out_cfg.at("binary_dump").get<bool>();
  export_opts.measurement = &problem.y;
  Json chains = Json::array();
  for (std::size_t c = 0; c < result.chains.size(); ++c) {
    char name[32];
    std::snprintf(name, sizeof name, "chain_%02zu", c);
    prepare_dir(dir / name);
    export_chain(dir / name, result.chains[c], export_opts);
    chains.push_back({{"dir", name}, {"seed", result.chains[c].seed}});
  }

  const auto& st = result.stats;
  write_estimate(dir, "init_x", result.init.x0, cfg, false);
  write_estimate(dir, "init_theta", result.init.theta0, cfg, false);
  write_estimate(dir, "mean_x", st.mean_x, cfg, true);
  write_estimate(dir, "std_x", st.std_x, cfg, false);
  write_estimate(dir, "final_x", st.final_x, cfg, true);
  write_estimate(dir, "mean_theta", st.mean_theta, cfg, false);
  write_estimate(dir, "std_theta", st.std_theta, cfg, false);
  write_estimate(dir, "final_theta", st.final_theta, cfg, false);
  if (cfg.at("metrics").at("project_kernel").get<bool>()) {
    write_estimate(dir, "mean_theta_projected", project_kernel(st.mean_theta), cfg, false);
    write_estimate(dir, "final_theta_projected", project_kernel(st.final_theta), cfg, false);
  }

  Json m = manifest_base("sample", loaded);
  m["chains"] = chains;
  m["samples_pooled"] = st.samples;
  m["burn_in"] = cfg.at("sampler").at("burn_in");
  m["problem_dir"] = "problem";
  m["problem_source"] = bundle_path.empty() ? "generated" : bundle_path;
  m["threads"] = threads;
  write_manifest(dir, m);
  return dir;
}

int cmd_sample(const CommandOptions& options) {
  return run_guarded([&] {
    const LoadedConfig loaded = load_config(options.config, {options.seed, options.out});
    const fs::path dir = sample(loaded, options.threads);
    std::cout << "run written to " << dir.string() << "\n";
    return kExitOk;
  });
}

// --- eval -------------------------------------------------------------------

std::vector<EvalRow> evaluate_run(const fs::path& run_dir, const fs::path& truth_dir) {
  if (!fs::exists(run_dir / "manifest.json"))
    throw ValidationError("run directory " + run_dir.string() + " has no manifest.json");
  Json manifest;
  try {
    manifest = Json::parse(read_text_file(run_dir / "manifest.json"));
  } catch (const Json::exception& e) {
    throw ValidationError(run_dir.string() + "/manifest.json: " + e.what());
  }
  const Json& metrics = manifest.at("resolved_config").at("metrics");
  const bool want_psnr = metrics.at("psnr").get<bool>();
  const bool want_ssim = metrics.at("ssim").get<bool>();
  const bool want_kernel = metrics.at("kernel_error").get<bool>();
  const bool want_proj = metrics.at("project_kernel").get<bool>();

  const auto need = [](const fs::path& p) {
    if (!fs::exists(p)) throw ValidationError("missing artifact " + p.string());
    return read_grid_csv(p);
  };
  const Grid x_true = need(truth_dir / "x_true.csv");
  const Grid k_true = need(truth_dir / "kernel_true.csv");
  const Grid y = need(truth_dir / "y.csv");

  const auto image_metrics = [&](EvalRow& row, const Grid& x) {
    if (want_psnr) row.psnr_db = psnr(x, x_true);
    if (want_ssim && x.height() >= 11 && x.width() >= 11) row.ssim = ssim(x, x_true);
  };
  const auto kernel_metrics = [&](EvalRow& row, const Grid& k) {
    if (want_kernel) row.kernel = kernel_error(k, k_true);
    if (want_kernel && want_proj) row.kernel_mse_aligned_projected = kernel_error(project_kernel(k), k_true).mse_aligned;
  };

  std::vector<EvalRow> rows;
  EvalRow meas{"measurement", {}, {}, {}, {}};
  image_metrics(meas, y);
  rows.push_back(meas);
  for (const char* which : {"init", "final", "mean"}) {
    EvalRow row{which, {}, {}, {}, {}};
    image_metrics(row, need(run_dir / (std::string(which) + "_x.csv")));
    kernel_metrics(row, need(run_dir / (std::string(which) + "_theta.csv")));
    rows.push_back(row);
  }
  return rows;
}

void append_results(const fs::path& results, const std::string& run_name,
                    const std::vector<EvalRow>& rows) {
  std::string text;
  if (fs::exists(results)) text = read_text_file(results);
  if (text.empty())
    text = "run,estimate,psnr_db,ssim,kernel_mse,kernel_mse_aligned,kernel_mse_aligned_projected\r\n";
  for (const auto& r : rows) {
    text += csv_field(run_name) + "," + r.estimate + "," + format_optional(r.psnr_db) + "," +
            format_optional(r.ssim) + "," +
            format_optional(r.kernel ? std::optional<double>(r.kernel->mse) : std::nullopt) + "," +
            format_optional(r.kernel ? std::optional<double>(r.kernel->mse_aligned) : std::nullopt) +
            "," + format_optional(r.kernel_mse_aligned_projected) + "\r\n";
  }
  if (results.has_parent_path()) prepare_dir(results.parent_path());
  write_text_file(results, text);
}

int cmd_eval(const fs::path& run_dir, const std::optional<fs::path>& truth,
             const std::optional<fs::path>& out) {
  return run_guarded([&] {
    const fs::path truth_dir = truth ? *truth : run_dir / "problem";
    const auto rows = evaluate_run(run_dir, truth_dir);
    const fs::path results = out ? *out : run_dir / "results.csv";
    append_results(results, run_name_dir(run_dir).filename().string(), rows);
    for (const auto& r : rows) {
      std::cout << r.estimate << ": psnr " << format_optional(r.psnr_db) << " dB, ssim "
                << format_optional(r.ssim);
      if (r.kernel) std::cout << ", kernel mse (aligned) " << format_double(r.kernel->mse_aligned);
      std::cout << "\n";
    }
    std::cout << "results appended to " << results.string() << "\n";
    return kExitOk;
  });
}

// --- oracle -----------------------------------------------------------------

OracleReport run_oracle_comparison(const OracleSpec& spec, std::size_t threads) {
  const auto& p = spec.problem;
  p.validate();
  if (p.cols + 1 > GridOracle::kMaxDims)
    throw ValidationError("oracle: problem dimension exceeds the grid cap");
  if (spec.burn_in > spec.iterations)
    throw ValidationError("oracle: burn_in exceeds iterations");

  DenseBilinearModel model = DenseBilinearModel::scalar_gain(p.rows, p.cols, p.matrix);
  GaussianPrior x_prior(p.x_mean, p.x_std);
  GaussianPrior t_prior(1, p.theta_mean, p.theta_std);
  SamplerConfig cfg;
  cfg.K = spec.iterations;
  cfg.burn_in = spec.burn_in;
  cfg.anneal_x = AnnealSchedule::constant(p.rho_x);
  cfg.anneal_theta = AnnealSchedule::constant(p.rho_theta);
  cfg.edm_x.n_steps = spec.edm_steps;
  cfg.edm_theta.n_steps = spec.edm_steps;
  cfg.noise = NoiseModel(p.sigma_y);
  cfg.seed = Rng::derive_seed(spec.seed, "oracle/chain");
  const GibbsChain chain = run_blind_pnpdm(model, Grid(1, p.rows, p.y), Grid(1, p.cols, p.x_mean),
                                           Grid(1, 1, p.theta_mean), x_prior, t_prior, cfg);

  std::vector<Axis> axes(p.cols, spec.x_axis);
  axes.push_back(spec.theta_axis);
  StationaryOracleOptions opts;
  opts.tolerance = spec.tolerance;
  opts.refine = spec.refine;
  opts.threads = threads;
  OracleReport report;
  opts.sweeps_used = &report.oracle_sweeps;
  report.oracle.emplace(gibbs_stationary_oracle(p, axes, opts));
  if (spec.negative_control) {
    ConjugateBlindProblem wrong = p;
    wrong.rho_x = spec.negative_rho;
    wrong.rho_theta = spec.negative_rho;
    StationaryOracleOptions wopts = opts;
    wopts.sweeps_used = nullptr;
    report.wrong_oracle.emplace(gibbs_stationary_oracle(wrong, axes, wopts));
  }

  for (std::size_t k = spec.burn_in; k < chain.entries.size(); ++k) {
    std::vector<double> s(chain.entries[k].x.values());
    s.push_back(chain.entries[k].theta[0]);
    report.samples.push_back(std::move(s));
  }

  const GridOracle& oracle = *report.oracle;
  report.pass = true;
  for (std::size_t a = 0; a <= p.cols; ++a) {
    const double mean = oracle.marginal_mean(a), sd = std::sqrt(oracle.marginal_variance(a));
    OracleMarginal m;
    m.name = a < p.cols ? "x" + std::to_string(a + 1) : "theta";
    m.axis = a;
    m.histogram = Histogram(mean - 4 * sd, mean + 4 * sd, spec.bins);
    for (const auto& s : report.samples) m.histogram.add(s[a]);
    m.tv = tv_distance(m.histogram, oracle, a);
    report.max_tv = std::max(report.max_tv, m.tv);
    if (!(m.tv <= spec.tv_threshold)) report.pass = false;
    if (report.wrong_oracle) {
      m.tv_wrong = tv_distance(m.histogram, *report.wrong_oracle, a);
      report.negative_tv = std::max(report.negative_tv, m.tv_wrong);
    }
    report.marginals.push_back(std::move(m));
  }
  if (report.wrong_oracle) report.negative_pass = report.negative_tv >= spec.negative_min_tv;
  return report;
}

fs::path oracle(const LoadedConfig& loaded, std::size_t threads, bool* passed) {
  const OracleSpec spec = oracle_spec(loaded.config);
  const OracleReport r = run_oracle_comparison(spec, threads);
  const fs::path dir = output_dir(loaded);
  prepare_dir(dir);
  write_config_echo(dir, loaded);

  std::string table = "marginal,reference,tv,criterion,pass\r\n";
  for (const auto& m : r.marginals)
    table += m.name + ",stationary," + format_double(m.tv) + ",<=" + format_double(spec.tv_threshold) +
             "," + (m.tv <= spec.tv_threshold ? "true" : "false") + "\r\n";
  if (r.wrong_oracle) {
    for (const auto& m : r.marginals)
      table += m.name + ",wrong_rho," + format_double(m.tv_wrong) + ",,\r\n";
    table += "max,wrong_rho," + format_double(r.negative_tv) + ",>=" +
             format_double(spec.negative_min_tv) + "," + (r.negative_pass ? "true" : "false") + "\r\n";
  }
  write_text_file(dir / "oracle.csv", table);

  for (const auto& m : r.marginals) {
    const auto write_marginal = [&](const GridOracle& o, const std::string& file) {
      const Axis& ax = o.axes()[m.axis];
      const auto dens = o.marginal(m.axis);
      std::string csv = "coordinate,density\r\n";
      for (std::size_t i = 0; i < ax.points; ++i)
        csv += format_double(ax.coord(i)) + "," + format_double(dens[i]) + "\r\n";
      write_text_file(dir / file, csv);
    };
    write_marginal(*r.oracle, "marginal_" + m.name + ".csv");
    if (r.wrong_oracle) write_marginal(*r.wrong_oracle, "marginal_" + m.name + "_wrong_rho.csv");
    const auto& edges = m.histogram.edges();
    const auto probs = r.oracle->bin_probabilities(m.axis, edges);
    std::string csv = "bin_lo,bin_hi,empirical,oracle\r\n";
    for (std::size_t b = 0; b + 1 < edges.size(); ++b)
      csv += format_double(edges[b]) + "," + format_double(edges[b + 1]) + "," +
             format_double(static_cast<double>(m.histogram.counts()[b]) /
                           static_cast<double>(m.histogram.total())) +
             "," + format_double(probs[b]) + "\r\n";
    write_text_file(dir / ("histogram_" + m.name + ".csv"), csv);
  }
  std::string samples = "iteration";
  for (const auto& m : r.marginals) samples += "," + m.name;
  samples += "\r\n";
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    samples += std::to_string(spec.burn_in + i);
    for (double v : r.samples[i]) samples += "," + format_double(v);
    samples += "\r\n";
  }
  write_text_file(dir / "samples.csv", samples);

  Json m = manifest_base("oracle", loaded);
  m["oracle_sweeps"] = r.oracle_sweeps;
  m["max_tv"] = r.max_tv;
  m["pass"] = r.pass;
  if (r.wrong_oracle) {
    m["negative_control_tv"] = r.negative_tv;
    m["negative_control_pass"] = r.negative_pass;
  }
  write_manifest(dir, m);
  if (passed) *passed = r.pass && r.negative_pass;
  return dir;
}

int cmd_oracle(const CommandOptions& options) {
  return run_guarded([&] {
    const LoadedConfig loaded = load_config(options.config, {options.seed, options.out});
    bool passed = false;
    const fs::path dir = oracle(loaded, options.threads, &passed);
    std::cout << read_text_file(dir / "oracle.csv");
    std::cout << (passed ? "oracle comparison passed" : "oracle comparison FAILED") << "; see "
              << dir.string() << "\n";
    return passed ? kExitOk : kExitValidation;
  });
}

}  // namespace bpdm::app
