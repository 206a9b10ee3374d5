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

#ifndef BPDM_RNG_HPP_
#define BPDM_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace bpdm {

/// Seeded generator with named substreams.
///
/// Substream rule: derive_seed(root, name) = splitmix64(root XOR fnv1a64(name)).
/// Substreams depend only on the root seed and the name, never on how many
/// draws the parent has made, so the same (root, name) reproduces the same
/// stream from any thread and in any order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  static std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

  std::uint64_t seed() const { return seed_; }
  Rng substream(std::string_view stream) const { return Rng(derive_seed(seed_, stream)); }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  void fill_normal(std::span<double> out, double scale = 1.0);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace bpdm

#endif  // BPDM_RNG_HPP_
