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

#include <png.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "bpdm/io.hpp"

namespace bpdm {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void io_fail(const fs::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

std::string lower_ext(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

unsigned quantize(double v, unsigned maxval) {
  if (!std::isfinite(v)) v = 0.0;
  v = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned>(std::lround(v * maxval));
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), end);
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) io_fail(path, "cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) io_fail(path, "write failed");
  }
  fs::rename(tmp, path);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_grid_csv(const fs::path& path, const Grid& grid) {
  std::string out;
  out.reserve(grid.size() * 24);
  for (std::size_t r = 0; r < grid.height(); ++r) {
    for (std::size_t c = 0; c < grid.width(); ++c) {
      if (c) out += ',';
      out += format_double(grid(r, c));
    }
    out += "\r\n";
  }
  write_text_file(path, out);
}

Grid read_grid_csv(const fs::path& path) {
  std::string text = read_text_file(path);
  std::vector<double> values;
  std::size_t width = 0, height = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      std::string_view field = line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                                                   : comma - start);
      while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
      while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        io_fail(path, "bad number '" + std::string(field) + "' on row " + std::to_string(height + 1));
      }
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (height == 0) width = count;
    if (count != width) io_fail(path, "ragged row " + std::to_string(height + 1));
    ++height;
  }
  if (height == 0) io_fail(path, "empty grid file");
  return Grid(height, width, std::move(values));
}

void write_pgm(const fs::path& path, const Grid& grid, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw std::invalid_argument("pgm: bit depth must be 8 or 16");
  const unsigned maxval = bit_depth == 8 ? 255u : 65535u;
  std::string out = "P5\n" + std::to_string(grid.width()) + " " + std::to_string(grid.height()) +
                    "\n" + std::to_string(maxval) + "\n";
  for (double v : grid.flat()) {
    unsigned q = quantize(v, maxval);
    if (bit_depth == 16) out += static_cast<char>((q >> 8) & 0xff);
    out += static_cast<char>(q & 0xff);
  }
  write_text_file(path, out);
}

Grid read_pgm(const fs::path& path) {
  std::string data = read_text_file(path);
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return data.substr(start, pos - start);
  };
  if (token() != "P5") io_fail(path, "not a binary PGM (P5)");
  std::size_t w = 0, h = 0;
  unsigned long maxval = 0;
  try {
    w = std::stoul(token());
    h = std::stoul(token());
    maxval = std::stoul(token());
  } catch (const std::exception&) {
    io_fail(path, "bad PGM header");
  }
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) io_fail(path, "bad PGM header");
  ++pos;  // single whitespace after maxval
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  if (data.size() < pos + w * h * bpp) io_fail(path, "truncated PGM payload");
  std::vector<double> values(w * h);
  for (std::size_t i = 0; i < w * h; ++i) {
    unsigned v = static_cast<unsigned char>(data[pos + i * bpp]);
    if (bpp == 2) v = (v << 8) | static_cast<unsigned char>(data[pos + i * bpp + 1]);
    values[i] = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return Grid(h, w, std::move(values));
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_png(const fs::path& path, const Grid& grid, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw std::invalid_argument("png: bit depth must be 8 or 16");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    FilePtr fp(std::fopen(tmp.c_str(), "wb"));
    if (!fp) io_fail(path, "cannot open for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
      png_destroy_write_struct(&png, nullptr);
      io_fail(path, "libpng init failed");
    }
    const unsigned maxval = bit_depth == 8 ? 255u : 65535u;
    const std::size_t bpp = bit_depth / 8;
    std::vector<unsigned char> rows(grid.size() * bpp);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      unsigned q = quantize(grid[i], maxval);
      if (bpp == 2) {
        rows[2 * i] = static_cast<unsigned char>(q >> 8);
        rows[2 * i + 1] = static_cast<unsigned char>(q & 0xff);
      } else {
        rows[i] = static_cast<unsigned char>(q);
      }
    }
    std::vector<png_bytep> row_ptrs(grid.height());
    for (std::size_t r = 0; r < grid.height(); ++r) row_ptrs[r] = rows.data() + r * grid.width() * bpp;
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      io_fail(path, "libpng write failed");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(grid.width()),
                 static_cast<png_uint_32>(grid.height()), bit_depth, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  }
  fs::rename(tmp, path);
}

Grid read_png(const fs::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) io_fail(path, "cannot open for reading");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    io_fail(path, "libpng init failed");
  }
  std::vector<unsigned char> buffer;
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    io_fail(path, "not a readable PNG");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int depth = png_get_bit_depth(png, info);
  int color = png_get_color_type(png, info);
  // Normalize to gray 8/16 bit.
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  depth = png_get_bit_depth(png, info);
  const std::size_t bpp = depth == 16 ? 2 : 1;
  buffer.resize(static_cast<std::size_t>(w) * h * bpp);
  row_ptrs.resize(h);
  for (png_uint_32 r = 0; r < h; ++r) row_ptrs[r] = buffer.data() + static_cast<std::size_t>(r) * w * bpp;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  const double maxval = depth == 16 ? 65535.0 : 255.0;
  std::vector<double> values(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < values.size(); ++i) {
    unsigned v = buffer[i * bpp];
    if (bpp == 2) v = (v << 8) | buffer[i * bpp + 1];
    values[i] = v / maxval;
  }
  return Grid(h, w, std::move(values));
}

Grid read_grid(const fs::path& path) {
  std::string ext = lower_ext(path);
  if (ext == ".csv") return read_grid_csv(path);
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  throw std::invalid_argument(path.string() + ": unsupported grid format (use .csv, .pgm or .png)");
}

void write_grid(const fs::path& path, const Grid& grid, int bit_depth) {
  std::string ext = lower_ext(path);
  if (ext == ".csv") return write_grid_csv(path, grid);
  if (ext == ".pgm") return write_pgm(path, grid, bit_depth);
  if (ext == ".png") return write_png(path, grid, bit_depth);
  throw std::invalid_argument(path.string() + ": unsupported grid format (use .csv, .pgm or .png)");
}

}  // namespace bpdm
