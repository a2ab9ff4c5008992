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

// Expected separable overestimation for one-index-per-node sampling:
//
//   E || sum_{tau} a_{i_tau} h_{i_tau} ||^2 <= sum_i (1/m)(R_m^2 + n R^2) h_i^2
//
// where i_tau is uniform over node tau's m examples.

#ifndef ECVR_ESO_HPP_
#define ECVR_ESO_HPP_

#include <cstddef>
#include <span>

#include "ecvr/dataset.hpp"
#include "ecvr/rng.hpp"

namespace ecvr {

struct EsoReport {
  std::size_t trials = 0;
  double lhs = 0.0;     // Monte-Carlo mean of ||A h_[S]||^2
  double lhs_se = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;   // lhs / rhs
  double ratio_se = 0.0;
  bool passed = false;  // ratio <= 1 + 3 ratio_se
};

/// Monte-Carlo ESO check for a fixed h (one entry per retained example).
EsoReport EsoCheck(const CscMatrix& a, const Partition& partition, std::span<const double> h,
                   std::size_t trials, RngStream& rng);

/// Same with h drawn standard normal from rng.
EsoReport EsoCheck(const CscMatrix& a, const Partition& partition, std::size_t trials,
                   RngStream& rng);

/// The right-hand side sum_i (1/m)(R_m^2 + n R^2) h_i^2.
double EsoBound(const CscMatrix& a, const Partition& partition, std::span<const double> h);

/// Dense standard-normal d x (n m) matrix stored column-wise.
CscMatrix RandomGaussianMatrix(std::size_t d, std::size_t cols, RngStream& rng);

}  // namespace ecvr

#endif  // ECVR_ESO_HPP_
