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

// Step sizes that carry the linear-rate guarantees of EC-LSVRG and
// EC-Quartz / EC-SDCA. They are conservative by large constant factors; the
// experiment driver grid-searches eta instead and uses these as a fallback.

#ifndef ECVR_STEP_SIZE_HPP_
#define ECVR_STEP_SIZE_HPP_

#include <cstddef>
#include <string>

#include "ecvr/problem.hpp"

namespace ecvr {

enum class LsvrgRegime {
  kComposite,         // psi != 0, general contraction compressors
  kCompositeMeanScaled,  // psi != 0, E[Q(x)] = delta x and E[Q1(x)] = delta1 x
  kSmooth,            // psi = 0
  kSmoothMeanScaled,
};

LsvrgRegime ParseLsvrgRegime(const std::string& s);

/// EC-LSVRG step size for the given regime. delta, delta1 and p in (0, 1].
double TheoreticalEta(const ProblemConstants& c, std::size_t nodes, double delta,
                      double delta1, double p, LsvrgRegime regime);

/// EC-Quartz / EC-SDCA theta with p_i = 1/m and v_i = R_m^2 + n R^2.
/// `mean_scaled` selects the tighter a_2 constant. For delta = 1 (no
/// compression) the uncompressed Quartz choice N lambda gamma p / (v + N
/// lambda gamma) is returned.
double TheoreticalTheta(const ProblemConstants& c, double delta, std::size_t per_node,
                        std::size_t nodes, double lambda, double gamma, bool mean_scaled);

/// Linear rate min{theta, delta / 4} used to weight averaged iterates.
double DualAveragingRate(double theta, double delta);

}  // namespace ecvr

#endif  // ECVR_STEP_SIZE_HPP_
