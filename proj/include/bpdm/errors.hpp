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

#ifndef BPDM_ERRORS_HPP_
#define BPDM_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bpdm {

// Argument/shape problems are reported as std::invalid_argument throughout.

/// Iterative solver stopped at max_iter without reaching the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations, double relative_residual)
      : std::runtime_error(what), iterations_(iterations), relative_residual_(relative_residual) {}

  std::size_t iterations() const { return iterations_; }
  double relative_residual() const { return relative_residual_; }

 private:
  std::size_t iterations_;
  double relative_residual_;
};

/// A state vector became non-finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t index)
      : std::runtime_error(what), index_(index) {}

  /// Rung index for prior steps, iteration index for chains.
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// Failure inside one step of a Gibbs sweep, tagged with where it happened.
class StepError : public std::runtime_error {
 public:
  StepError(std::size_t iteration, std::string step, const std::string& cause, bool divergence)
      : std::runtime_error("iteration " + std::to_string(iteration) + ", " + step + ": " + cause),
        iteration_(iteration),
        step_(std::move(step)),
        divergence_(divergence) {}

  std::size_t iteration() const { return iteration_; }
  const std::string& step() const { return step_; }
  bool divergence() const { return divergence_; }

 private:
  std::size_t iteration_;
  std::string step_;
  bool divergence_;
};

}  // namespace bpdm

#endif  // BPDM_ERRORS_HPP_
