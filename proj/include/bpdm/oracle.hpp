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

#ifndef BPDM_ORACLE_HPP_
#define BPDM_ORACLE_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bpdm {

/// Uniform grid of `points` nodes from lo to hi inclusive.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t points = 2;

  double spacing() const { return (hi - lo) / static_cast<double>(points - 1); }
  double coord(std::size_t i) const { return lo + static_cast<double>(i) * spacing(); }
  double trapezoid_weight(std::size_t i) const {
    return (i == 0 || i + 1 == points) ? 0.5 * spacing() : spacing();
  }
};

using LogDensity = std::function<double(std::span<const double>)>;

/// Normalized density tabulated on a tensor grid of at most four axes.
/// Integrals use the trapezoid rule, so marginals are the integrals of their
/// piecewise-linear interpolants.
class GridOracle {
 public:
  static constexpr std::size_t kMaxDims = 4;

  /// Takes unnormalized density values at the nodes (row-major, first axis slowest).
  GridOracle(std::vector<Axis> axes, std::vector<double> density);

  std::size_t dims() const { return axes_.size(); }
  const std::vector<Axis>& axes() const { return axes_; }
  const std::vector<double>& density() const { return density_; }

  /// Marginal density values at the nodes of `axis`.
  std::vector<double> marginal(std::size_t axis) const;
  double marginal_mean(std::size_t axis) const;
  double marginal_variance(std::size_t axis) const;
  /// Integral of the marginal over [a, b].
  double marginal_mass(std::size_t axis, double a, double b) const;
  /// marginal_mass over consecutive bins.
  std::vector<double> bin_probabilities(std::size_t axis, std::span<const double> edges) const;
  /// Trapezoid integral of the whole table (1 after construction).
  double total_mass() const;

 private:
  std::vector<Axis> axes_;
  std::vector<double> density_;
};

/// Tabulates exp(log_density) on the tensor grid and normalizes it.
GridOracle build_grid_oracle(const LogDensity& log_density, std::vector<Axis> axes);

/// Equal-width histogram with out-of-range counts kept separately.
class Histogram {
 public:
  Histogram(double lo, double hi, std::size_t bins);

  void add(double value);
  void add(std::span<const double> values);

  const std::vector<double>& edges() const { return edges_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::size_t outside() const { return outside_; }
  std::size_t total() const { return total_; }

 private:
  std::vector<double> edges_;
  std::vector<std::size_t> counts_;
  std::size_t outside_ = 0;
  std::size_t total_ = 0;
};

/// 1/2 sum |p_hat - p| over the bins plus the out-of-range remainder.
/// `probabilities` must have one entry per histogram bin.
double tv_distance(const Histogram& histogram, std::span<const double> probabilities);
double tv_distance(const Histogram& histogram, const GridOracle& oracle, std::size_t axis);

/// Scalar-gain blind problem y = theta * M x + e with Gaussian priors on x and
/// theta. M must have orthogonal columns and at most two of them.
struct ConjugateBlindProblem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> matrix;  // row-major rows x cols
  std::vector<double> y;
  double sigma_y = 1.0;
  std::vector<double> x_mean;
  double x_std = 1.0;
  double theta_mean = 0.0;
  double theta_std = 1.0;
  double rho_x = 0.2;
  double rho_theta = 0.2;

  void validate() const;
};

struct StationaryOracleOptions {
  double tolerance = 1e-11;  // L1 change between sweeps
  std::size_t max_sweeps = 5000;
  std::size_t threads = 1;
  std::size_t refine = 1;  // output grid has (points - 1) * refine + 1 nodes per axis
  std::size_t* sweeps_used = nullptr;  // optional report
  double* final_change = nullptr;
};

/// Stationary law over (x_1, ..., x_n, theta) of the blind split-Gibbs sweep,
/// computed by Nystrom discretization of the exact per-sweep transition kernel
/// (closed-form Gaussian conditionals for both likelihood and prior steps) and
/// power iteration. `axes` lists the x axes followed by the theta axis.
GridOracle gibbs_stationary_oracle(const ConjugateBlindProblem& problem, std::vector<Axis> axes,
                                   const StationaryOracleOptions& options = {});

}  // namespace bpdm

#endif  // BPDM_ORACLE_HPP_
