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

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "bpdm/forward_models.hpp"
#include "bpdm/io.hpp"

namespace bpdm {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "chain dump assumes little-endian");

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

void put_f32(std::string& out, double v) {
  float f = static_cast<float>(v);
  char b[4];
  std::memcpy(b, &f, 4);
  out.append(b, 4);
}

std::string iter_name(std::size_t k, const char* what) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "iter_%04zu_%s.csv", k, what);
  return buf;
}

}  // namespace

void export_chain(const fs::path& dir, const GibbsChain& chain, const ChainExportOptions& options) {
  fs::create_directories(dir);
  const bool with_residual = options.measurement != nullptr;
  std::string csv = "iteration,rho_x,rho_theta,x_norm,theta_norm,theta_sum,x_step_norm";
  if (with_residual) csv += ",data_residual";
  csv += "\r\n";
  std::string timing = "iteration,likelihood_x_ms,prior_x_ms,likelihood_theta_ms,prior_theta_ms\r\n";
  for (std::size_t i = 0; i < chain.entries.size(); ++i) {
    const ChainRecord& rec = chain.entries[i];
    double step = 0.0;
    if (i > 0) {
      const Grid& prev = chain.entries[i - 1].x;
      for (std::size_t j = 0; j < prev.size(); ++j) {
        double d = rec.x[j] - prev[j];
        step += d * d;
      }
      step = std::sqrt(step);
    }
    csv += std::to_string(rec.k) + "," + format_double(rec.rho_x) + "," +
           format_double(rec.rho_theta) + "," + format_double(norm2(rec.x.flat())) + "," +
           format_double(norm2(rec.theta.flat())) + "," + format_double(rec.theta.sum()) + "," +
           format_double(step);
    if (with_residual) {
      Grid pred = conv2d_circular(rec.x, rec.theta);
      double r = 0.0;
      for (std::size_t j = 0; j < pred.size(); ++j) {
        double d = pred[j] - (*options.measurement)[j];
        r += d * d;
      }
      csv += "," + format_double(std::sqrt(r));
    }
    csv += "\r\n";
    if (i + 1 < chain.entries.size()) {
      timing += std::to_string(rec.k) + "," + format_double(rec.timing.likelihood_x_ms) + "," +
                format_double(rec.timing.prior_x_ms) + "," +
                format_double(rec.timing.likelihood_theta_ms) + "," +
                format_double(rec.timing.prior_theta_ms) + "\r\n";
    }
    if (options.per_iteration_grids) {
      write_grid_csv(dir / iter_name(rec.k, "x"), rec.x);
      write_grid_csv(dir / iter_name(rec.k, "theta"), rec.theta);
      if (rec.z) write_grid_csv(dir / iter_name(rec.k, "z"), *rec.z);
      if (rec.v) write_grid_csv(dir / iter_name(rec.k, "v"), *rec.v);
    }
  }
  write_text_file(dir / "chain.csv", csv);
  write_text_file(dir / "timing.csv", timing);
  if (options.binary_dump) write_chain_dump(dir / "chain.bin", chain);
}

void write_chain_dump(const fs::path& path, const GibbsChain& chain) {
  if (chain.entries.empty()) throw std::invalid_argument("chain dump: empty chain");
  const Shape xs = chain.entries.front().x.shape();
  const Shape ts = chain.entries.front().theta.shape();
  std::string out = "BPCH";
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(chain.entries.size() - 1));
  put_u32(out, static_cast<std::uint32_t>(xs.height));
  put_u32(out, static_cast<std::uint32_t>(xs.width));
  put_u32(out, static_cast<std::uint32_t>(ts.height));
  put_u32(out, static_cast<std::uint32_t>(ts.width));
  for (const ChainRecord& rec : chain.entries) {
    for (double v : rec.x.flat()) put_f32(out, v);
    for (double v : rec.theta.flat()) put_f32(out, v);
  }
  write_text_file(path, out);
}

ChainDump read_chain_dump(const fs::path& path) {
  std::string data = read_text_file(path);
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (data.size() < pos + n) throw std::runtime_error(path.string() + ": truncated chain dump");
  };
  auto u32 = [&]() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, data.data() + pos, 4);
    pos += 4;
    return v;
  };
  need(4);
  if (data.compare(0, 4, "BPCH") != 0) throw std::runtime_error(path.string() + ": bad chain dump magic");
  pos = 4;
  if (u32() != 1) throw std::runtime_error(path.string() + ": unsupported chain dump version");
  ChainDump dump;
  dump.K = u32();
  dump.x_shape.height = u32();
  dump.x_shape.width = u32();
  dump.theta_shape.height = u32();
  dump.theta_shape.width = u32();
  auto read_grid_f32 = [&](Shape s) {
    std::vector<double> v(s.size());
    need(4 * s.size());
    for (double& d : v) {
      float f;
      std::memcpy(&f, data.data() + pos, 4);
      pos += 4;
      d = f;
    }
    return Grid(s.height, s.width, std::move(v));
  };
  for (std::size_t k = 0; k <= dump.K; ++k) {
    dump.x.push_back(read_grid_f32(dump.x_shape));
    dump.theta.push_back(read_grid_f32(dump.theta_shape));
  }
  if (pos != data.size()) throw std::runtime_error(path.string() + ": trailing bytes in chain dump");
  return dump;
}

}  // namespace bpdm
