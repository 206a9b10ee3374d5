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

#include "bpdm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

namespace bpdm {

namespace {

void check_axes(const std::vector<Axis>& axes) {
  if (axes.empty()) throw std::invalid_argument("grid oracle: no axes");
  if (axes.size() > GridOracle::kMaxDims) {
    throw std::invalid_argument("grid oracle: " + std::to_string(axes.size()) +
                                " dimensions exceed the cap of 4");
  }
  for (const Axis& a : axes) {
    if (a.points < 2 || !(a.hi > a.lo) || !std::isfinite(a.lo) || !std::isfinite(a.hi)) {
      throw std::invalid_argument("grid oracle: axis needs lo < hi and at least 2 points");
    }
  }
}

std::size_t node_count(const std::vector<Axis>& axes) {
  std::size_t n = 1;
  for (const Axis& a : axes) n *= a.points;
  return n;
}

// Integral of the piecewise-linear interpolant of `f` over [a, b].
double linear_integral(const Axis& axis, std::span<const double> f, double a, double b) {
  a = std::max(a, axis.lo);
  b = std::min(b, axis.hi);
  if (!(b > a)) return 0.0;
  const double h = axis.spacing();
  auto value_at = [&](double x) {
    double t = (x - axis.lo) / h;
    std::size_t i = std::min(static_cast<std::size_t>(std::max(t, 0.0)), axis.points - 2);
    double frac = t - static_cast<double>(i);
    return f[i] + frac * (f[i + 1] - f[i]);
  };
  std::size_t first = static_cast<std::size_t>(std::ceil((a - axis.lo) / h - 1e-12));
  std::size_t last = static_cast<std::size_t>(std::floor((b - axis.lo) / h + 1e-12));
  first = std::min(first, axis.points - 1);
  last = std::min(last, axis.points - 1);
  double total = 0.0;
  double prev_x = a;
  double prev_f = value_at(a);
  for (std::size_t i = first; i <= last && i < axis.points; ++i) {
    double x = axis.coord(i);
    if (x <= prev_x) continue;
    if (x > b) break;
    total += 0.5 * (prev_f + f[i]) * (x - prev_x);
    prev_x = x;
    prev_f = f[i];
  }
  if (b > prev_x) total += 0.5 * (prev_f + value_at(b)) * (b - prev_x);
  return total;
}

}  // namespace

GridOracle::GridOracle(std::vector<Axis> axes, std::vector<double> density)
    : axes_(std::move(axes)), density_(std::move(density)) {
  check_axes(axes_);
  if (density_.size() != node_count(axes_)) {
    throw std::invalid_argument("grid oracle: density size does not match the grid");
  }
  for (double v : density_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("grid oracle: density must be finite and non-negative");
    }
  }
  double mass = total_mass();
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw std::runtime_error("grid oracle: zero total mass");
  }
  for (double& v : density_) v /= mass;
}

double GridOracle::total_mass() const {
  std::vector<double> m = marginal(0);
  double total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) total += axes_[0].trapezoid_weight(i) * m[i];
  return total;
}

std::vector<double> GridOracle::marginal(std::size_t axis) const {
  if (axis >= axes_.size()) throw std::out_of_range("grid oracle: axis index");
  const std::size_t d = axes_.size();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> out(axes_[axis].points, 0.0);
  for (std::size_t flat = 0; flat < density_.size(); ++flat) {
    double w = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      if (k != axis) w *= axes_[k].trapezoid_weight(idx[k]);
    }
    out[idx[axis]] += w * density_[flat];
    for (std::size_t k = d; k-- > 0;) {
      if (++idx[k] < axes_[k].points) break;
      idx[k] = 0;
    }
  }
  return out;
}

double GridOracle::marginal_mean(std::size_t axis) const {
  std::vector<double> m = marginal(axis);
  const Axis& a = axes_[axis];
  double mean = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) mean += a.trapezoid_weight(i) * m[i] * a.coord(i);
  return mean;
}

double GridOracle::marginal_variance(std::size_t axis) const {
  std::vector<double> m = marginal(axis);
  const Axis& a = axes_[axis];
  double mean = marginal_mean(axis);
  double var = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double dx = a.coord(i) - mean;
    var += a.trapezoid_weight(i) * m[i] * dx * dx;
  }
  return var;
}

double GridOracle::marginal_mass(std::size_t axis, double a, double b) const {
  std::vector<double> m = marginal(axis);
  return linear_integral(axes_[axis], m, a, b);
}

std::vector<double> GridOracle::bin_probabilities(std::size_t axis,
                                                  std::span<const double> edges) const {
  if (edges.size() < 2) throw std::invalid_argument("bin_probabilities: need two edges");
  std::vector<double> m = marginal(axis);
  std::vector<double> p(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i + 1] > edges[i])) throw std::invalid_argument("bin_probabilities: edges");
    p[i] = linear_integral(axes_[axis], m, edges[i], edges[i + 1]);
  }
  return p;
}

GridOracle build_grid_oracle(const LogDensity& log_density, std::vector<Axis> axes) {
  check_axes(axes);
  const std::size_t d = axes.size();
  const std::size_t n = node_count(axes);
  std::vector<double> logs(n);
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> point(d);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t flat = 0; flat < n; ++flat) {
    for (std::size_t k = 0; k < d; ++k) point[k] = axes[k].coord(idx[k]);
    double v = log_density(point);
    if (std::isnan(v)) throw std::invalid_argument("grid oracle: log density is NaN");
    logs[flat] = v;
    peak = std::max(peak, v);
    for (std::size_t k = d; k-- > 0;) {
      if (++idx[k] < axes[k].points) break;
      idx[k] = 0;
    }
  }
  if (!std::isfinite(peak)) throw std::runtime_error("grid oracle: zero total mass");
  for (double& v : logs) v = std::exp(v - peak);
  return GridOracle(std::move(axes), std::move(logs));
}

Histogram::Histogram(double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw std::invalid_argument("histogram: need lo < hi and bins > 0");
  edges_.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    edges_[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  }
  counts_.assign(bins, 0);
}

void Histogram::add(double value) {
  ++total_;
  const double lo = edges_.front();
  const double hi = edges_.back();
  if (!(value >= lo) || !(value <= hi)) {
    ++outside_;
    return;
  }
  const std::size_t bins = counts_.size();
  auto b = static_cast<std::size_t>((value - lo) / (hi - lo) * static_cast<double>(bins));
  ++counts_[std::min(b, bins - 1)];
}

void Histogram::add(std::span<const double> values) {
  for (double v : values) add(v);
}

double tv_distance(const Histogram& histogram, std::span<const double> probabilities) {
  if (probabilities.size() != histogram.counts().size()) {
    throw std::invalid_argument("tv_distance: bin count mismatch");
  }
  if (histogram.total() == 0) throw std::invalid_argument("tv_distance: empty histogram");
  const double n = static_cast<double>(histogram.total());
  double sum = 0.0;
  double p_inside = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    sum += std::abs(static_cast<double>(histogram.counts()[i]) / n - probabilities[i]);
    p_inside += probabilities[i];
  }
  // Mass outside the shared bins counts against both sides.
  double outside_hat = static_cast<double>(histogram.outside()) / n;
  double outside_ref = std::max(0.0, 1.0 - p_inside);
  sum += std::abs(outside_hat - outside_ref);
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

double tv_distance(const Histogram& histogram, const GridOracle& oracle, std::size_t axis) {
  return tv_distance(histogram, oracle.bin_probabilities(axis, histogram.edges()));
}

void ConjugateBlindProblem::validate() const {
  if (rows == 0 || cols == 0 || cols > 2) {
    throw std::invalid_argument("conjugate problem: need rows > 0 and 1 or 2 columns");
  }
  if (matrix.size() != rows * cols || y.size() != rows || x_mean.size() != cols) {
    throw std::invalid_argument("conjugate problem: size mismatch");
  }
  if (!(sigma_y > 0) || !(x_std > 0) || !(theta_std > 0) || !(rho_x > 0) || !(rho_theta > 0)) {
    throw std::invalid_argument("conjugate problem: scales must be positive");
  }
  if (cols == 2) {
    double c01 = 0, c00 = 0, c11 = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      c01 += matrix[r * 2] * matrix[r * 2 + 1];
      c00 += matrix[r * 2] * matrix[r * 2];
      c11 += matrix[r * 2 + 1] * matrix[r * 2 + 1];
    }
    if (std::abs(c01) > 1e-12 * std::sqrt(c00 * c11)) {
      throw std::invalid_argument("conjugate problem: columns of M must be orthogonal");
    }
  }
}

namespace {

double gauss(double x, double mean, double var) {
  double d = x - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

namespace {

// Closed-form pieces of one sweep for the scalar-gain problem.
struct SweepModel {
  const ConjugateBlindProblem& p;
  std::size_t nx;
  std::vector<double> col_norm, mty;
  double s2y, rx2, rt2;
  double sx2, alpha_x, prior_var_x;
  double st2, alpha_t, beta_t, prior_var_t;

  explicit SweepModel(const ConjugateBlindProblem& prob)
      : p(prob), nx(prob.cols), col_norm(prob.cols, 0.0), mty(prob.cols, 0.0) {
    for (std::size_t r = 0; r < p.rows; ++r) {
      for (std::size_t i = 0; i < nx; ++i) {
        col_norm[i] += p.matrix[r * nx + i] * p.matrix[r * nx + i];
        mty[i] += p.matrix[r * nx + i] * p.y[r];
      }
    }
    s2y = p.sigma_y * p.sigma_y;
    rx2 = p.rho_x * p.rho_x;
    rt2 = p.rho_theta * p.rho_theta;
    sx2 = p.x_std * p.x_std;
    alpha_x = sx2 / (sx2 + rx2);
    prior_var_x = sx2 * rx2 / (sx2 + rx2);
    st2 = p.theta_std * p.theta_std;
    alpha_t = st2 / (st2 + rt2);
    beta_t = rt2 * p.theta_mean / (st2 + rt2);
    prior_var_t = st2 * rt2 / (st2 + rt2);
  }
};

// x-block kernels [theta node][coordinate], mapping `in` x nodes to `out` x nodes.
// With M^T M diagonal the tilted Gaussian factorizes, so the x transition is a
// product of 1-D kernels: z_i ~ N(mz, 1/P), then x_i ~ N(alpha z_i + beta, q).
struct XKernel {
  std::size_t n_in = 0, n_out = 0;
  std::vector<double> k;  // [in][out], rows normalized on the out axis
};

std::vector<std::vector<XKernel>> build_x_kernels(const SweepModel& m, const std::vector<Axis>& in,
                                                  const std::vector<Axis>& out) {
  const Axis& ta = in.back();
  std::vector<std::vector<XKernel>> kx(ta.points, std::vector<XKernel>(m.nx));
  for (std::size_t t = 0; t < ta.points; ++t) {
    const double th = ta.coord(t);
    for (std::size_t i = 0; i < m.nx; ++i) {
      const double prec = th * th * m.col_norm[i] / m.s2y + 1.0 / m.rx2;
      const double beta = m.rx2 * m.p.x_mean[i] / (m.sx2 + m.rx2);
      const double var = m.alpha_x * m.alpha_x / prec + m.prior_var_x;
      XKernel& kern = kx[t][i];
      kern.n_in = in[i].points;
      kern.n_out = out[i].points;
      kern.k.resize(kern.n_in * kern.n_out);
      for (std::size_t a = 0; a < kern.n_in; ++a) {
        const double mz = (th * m.mty[i] / m.s2y + in[i].coord(a) / m.rx2) / prec;
        const double mean = m.alpha_x * mz + beta;
        double mass = 0.0;
        for (std::size_t b = 0; b < kern.n_out; ++b) {
          double v = gauss(out[i].coord(b), mean, var);
          kern.k[a * kern.n_out + b] = v;
          mass += out[i].trapezoid_weight(b) * v;
        }
        if (mass > 0.0) {
          for (std::size_t b = 0; b < kern.n_out; ++b) kern.k[a * kern.n_out + b] /= mass;
        }
      }
    }
  }
  return kx;
}

// One sweep of the transition operator: density on `in` nodes -> density on `out` nodes.
// Layout is ((i0 * n1 + i1) * nt + t).
std::vector<double> apply_sweep(const SweepModel& m, const std::vector<std::vector<XKernel>>& kx,
                                const std::vector<Axis>& in, const std::vector<Axis>& out,
                                const std::vector<double>& q, std::size_t threads) {
  const std::size_t nx = m.nx;
  const std::size_t n0i = in[0].points, n0o = out[0].points;
  const std::size_t n1i = nx == 2 ? in[1].points : 1, n1o = nx == 2 ? out[1].points : 1;
  const Axis& tin = in.back();
  const Axis& tout = out.back();
  const std::size_t nti = tin.points, nto = tout.points;

  // x-block along axis 0, then axis 1, for each theta node.
  std::vector<double> a0(n0o * n1i * nti, 0.0);
  parallel_for(nti, threads, [&](std::size_t t) {
    const XKernel& k0 = kx[t][0];
    for (std::size_t a = 0; a < n0i; ++a) {
      const double wa = in[0].trapezoid_weight(a);
      for (std::size_t b = 0; b < n0o; ++b) {
        const double c = wa * k0.k[a * n0o + b];
        for (std::size_t i1 = 0; i1 < n1i; ++i1) {
          a0[(b * n1i + i1) * nti + t] += c * q[(a * n1i + i1) * nti + t];
        }
      }
    }
  });
  std::vector<double> a1;
  if (nx == 2) {
    a1.assign(n0o * n1o * nti, 0.0);
    parallel_for(nti, threads, [&](std::size_t t) {
      const XKernel& k1 = kx[t][1];
      for (std::size_t i0 = 0; i0 < n0o; ++i0) {
        for (std::size_t a = 0; a < n1i; ++a) {
          const double src = in[1].trapezoid_weight(a) * a0[(i0 * n1i + a) * nti + t];
          if (src == 0.0) continue;
          for (std::size_t b = 0; b < n1o; ++b) a1[(i0 * n1o + b) * nti + t] += src * k1.k[a * n1o + b];
        }
      }
    });
  } else {
    a1 = std::move(a0);
  }

  // theta-block conditioned on the new x: v ~ N(mv, 1/Pv), then theta ~ N(alpha v + beta, q).
  std::vector<double> next(n0o * n1o * nto, 0.0);
  parallel_for(n0o * n1o, threads, [&](std::size_t ix) {
    const double x0 = out[0].coord(ix / n1o);
    const double x1 = nx == 2 ? out[1].coord(ix % n1o) : 0.0;
    double c1 = 0.0, c2 = 0.0;
    for (std::size_t r = 0; r < m.p.rows; ++r) {
      double v = m.p.matrix[r * nx] * x0 + (nx == 2 ? m.p.matrix[r * nx + 1] * x1 : 0.0);
      c1 += v * v;
      c2 += v * m.p.y[r];
    }
    const double prec = c1 / m.s2y + 1.0 / m.rt2;
    const double var = m.alpha_t * m.alpha_t / prec + m.prior_var_t;
    std::vector<double> row(nto);
    for (std::size_t t = 0; t < nti; ++t) {
      const double src = a1[ix * nti + t] * tin.trapezoid_weight(t);
      if (src == 0.0) continue;
      const double mean = m.alpha_t * (c2 / m.s2y + tin.coord(t) / m.rt2) / prec + m.beta_t;
      double mass = 0.0;
      for (std::size_t u = 0; u < nto; ++u) {
        row[u] = gauss(tout.coord(u), mean, var);
        mass += tout.trapezoid_weight(u) * row[u];
      }
      if (!(mass > 0.0)) continue;
      const double scale = src / mass;
      for (std::size_t u = 0; u < nto; ++u) next[ix * nto + u] += scale * row[u];
    }
  });
  return next;
}

}  // namespace

GridOracle gibbs_stationary_oracle(const ConjugateBlindProblem& p, std::vector<Axis> axes,
                                   const StationaryOracleOptions& options) {
  p.validate();
  if (axes.size() != p.cols + 1) {
    throw std::invalid_argument("stationary oracle: expected one axis per x coordinate plus theta");
  }
  check_axes(axes);
  if (options.refine == 0) throw std::invalid_argument("stationary oracle: refine must be >= 1");
  const SweepModel model(p);
  const auto kx = build_x_kernels(model, axes, axes);

  // Start from the product of the priors restricted to the grid.
  const std::size_t n0 = axes[0].points;
  const std::size_t n1 = p.cols == 2 ? axes[1].points : 1;
  const Axis& ta = axes.back();
  std::vector<double> q(n0 * n1 * ta.points);
  for (std::size_t i0 = 0; i0 < n0; ++i0) {
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
      double px = gauss(axes[0].coord(i0), p.x_mean[0], p.x_std * p.x_std);
      if (p.cols == 2) px *= gauss(axes[1].coord(i1), p.x_mean[1], p.x_std * p.x_std);
      for (std::size_t t = 0; t < ta.points; ++t) {
        q[(i0 * n1 + i1) * ta.points + t] =
            px * gauss(ta.coord(t), p.theta_mean, p.theta_std * p.theta_std);
      }
    }
  }
  q = GridOracle(axes, q).density();

  double cell = 1.0;
  for (const Axis& a : axes) cell *= a.spacing();
  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    GridOracle snapshot(axes, apply_sweep(model, kx, axes, axes, q, options.threads));
    double change = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) change += std::abs(snapshot.density()[i] - q[i]) * cell;
    q = snapshot.density();
    if (options.sweeps_used) *options.sweeps_used = sweep + 1;
    if (options.final_change) *options.final_change = change;
    if (change < options.tolerance) break;
  }
  if (options.refine == 1) return GridOracle(std::move(axes), std::move(q));

  // The stationary law satisfies q = T q, so one more application of T with
  // finer output nodes interpolates it through the smooth transition kernel.
  std::vector<Axis> fine = axes;
  for (Axis& a : fine) a.points = (a.points - 1) * options.refine + 1;
  const auto kx_fine = build_x_kernels(model, axes, fine);
  return GridOracle(fine, apply_sweep(model, kx_fine, axes, fine, q, options.threads));
}

}  // namespace bpdm
