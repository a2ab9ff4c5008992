// Copyright 2026 The ecvr Authors. All Rights Reserved.
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
// =============================================================================

#ifndef ECVR_REFERENCE_HPP_
#define ECVR_REFERENCE_HPP_

#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include "ecvr/problem.hpp"
#include "ecvr/vec.hpp"

namespace ecvr {

struct ReferenceOptions {
  double tol = 1e-12;  // target norm of the proximal gradient mapping
  std::uint64_t seed = 0;
  std::size_t max_epochs = 200000;
};

struct ReferenceSolution {
  Vec x;
  double value = 0.0;
  double residual = 0.0;
  std::size_t epochs = 0;
};

class ReferenceNotConverged : public std::runtime_error {
 public:
  ReferenceNotConverged(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Runs uncompressed L-SVRG with eta = 1/(4 L_f + 42 L / n) and p = 1/m until
/// the gradient mapping with step 1/L_f drops to tol, checked once per epoch.
ReferenceSolution SolveReference(const Problem& problem, const ReferenceOptions& options = {});

}  // namespace ecvr

#endif  // ECVR_REFERENCE_HPP_
