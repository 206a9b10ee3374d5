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

#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace bpdm::fft {
namespace {

// FFTW planning is not thread safe, execution with the new-array interface is.
// Plans are created once per shape and reused.
struct Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [shape, plans] : plans_) {
      fftw_destroy_plan(plans.forward);
      fftw_destroy_plan(plans.backward);
    }
  }

  Plans get(Shape s) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(s.height, s.width);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const int h = static_cast<int>(s.height);
    const int w = static_cast<int>(s.width);
    std::vector<double> real(s.size());
    std::vector<std::complex<double>> cplx(half_size(s));
    auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Plans plans;
    plans.forward = fftw_plan_dft_r2c_2d(h, w, real.data(), c, flags);
    plans.backward = fftw_plan_dft_c2r_2d(h, w, c, real.data(), flags | FFTW_DESTROY_INPUT);
    if (!plans.forward || !plans.backward) throw std::runtime_error("fftw planning failed");
    plans_.emplace(key, plans);
    return plans;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, std::size_t>, Plans> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

std::vector<std::complex<double>> forward(std::span<const double> values, Shape shape) {
  if (values.size() != shape.size()) throw std::invalid_argument("fft::forward: size mismatch");
  Plans plans = cache().get(shape);
  std::vector<double> in(values.begin(), values.end());
  std::vector<std::complex<double>> out(half_size(shape));
  fftw_execute_dft_r2c(plans.forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

void inverse(std::span<const std::complex<double>> spectrum, Shape shape, std::span<double> out) {
  if (spectrum.size() != half_size(shape) || out.size() != shape.size())
    throw std::invalid_argument("fft::inverse: size mismatch");
  Plans plans = cache().get(shape);
  std::vector<std::complex<double>> in(spectrum.begin(), spectrum.end());
  fftw_execute_dft_c2r(plans.backward, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(shape.size());
  for (double& v : out) v *= scale;
}

}  // namespace bpdm::fft
