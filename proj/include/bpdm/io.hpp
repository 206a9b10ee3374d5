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

#ifndef BPDM_IO_HPP_
#define BPDM_IO_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "bpdm/gibbs.hpp"
#include "bpdm/grid.hpp"

namespace bpdm {

// Grid files. CSV holds one grid row per line with round-trip precision and is
// the only lossless form; PGM/PNG map [0, 1] linearly onto the integer range
// with clipping.

void write_grid_csv(const std::filesystem::path& path, const Grid& grid);
Grid read_grid_csv(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const Grid& grid, int bit_depth = 8);
Grid read_pgm(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const Grid& grid, int bit_depth = 8);
Grid read_png(const std::filesystem::path& path);

/// Dispatch on extension: .csv, .pgm, .png.
Grid read_grid(const std::filesystem::path& path);
void write_grid(const std::filesystem::path& path, const Grid& grid, int bit_depth = 8);

/// Writes `content` through a temporary file so readers never see partial files.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& value);
/// Shortest text that parses back to the same double.
std::string format_double(double value);

struct ChainExportOptions {
  bool per_iteration_grids = true;  // iter_<k>_x.csv / iter_<k>_theta.csv
  bool binary_dump = true;          // chain.bin
  const Grid* measurement = nullptr;  // adds a data_residual column (circular blur)
};

/// Writes chain.csv (iteration, rho_x, rho_theta, norms), timing.csv, and the
/// optional per-iteration grids and binary dump into `dir`.
void export_chain(const std::filesystem::path& dir, const GibbsChain& chain,
                  const ChainExportOptions& options = {});

/// Binary dump layout (little-endian): "BPCH", u32 version = 1, u32 K,
/// u32 x_height, u32 x_width, u32 theta_height, u32 theta_width, then for each
/// k = 0..K the x values followed by the theta values as f32, row-major.
struct ChainDump {
  std::size_t K = 0;
  Shape x_shape;
  Shape theta_shape;
  std::vector<Grid> x;
  std::vector<Grid> theta;
};
void write_chain_dump(const std::filesystem::path& path, const GibbsChain& chain);
ChainDump read_chain_dump(const std::filesystem::path& path);

}  // namespace bpdm

#endif  // BPDM_IO_HPP_
