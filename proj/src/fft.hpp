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

#ifndef BPDM_SRC_FFT_HPP_
#define BPDM_SRC_FFT_HPP_

#include <complex>
#include <span>
#include <vector>

#include "bpdm/grid.hpp"

namespace bpdm::fft {

/// Number of complex bins in the real-to-complex half spectrum of a grid.
inline std::size_t half_size(Shape s) { return s.height * (s.width / 2 + 1); }

/// Unnormalized forward real DFT over a row-major grid.
std::vector<std::complex<double>> forward(std::span<const double> values, Shape shape);

/// Inverse of `forward`, including the 1/(h*w) normalization.
void inverse(std::span<const std::complex<double>> spectrum, Shape shape, std::span<double> out);

}  // namespace bpdm::fft

#endif  // BPDM_SRC_FFT_HPP_
