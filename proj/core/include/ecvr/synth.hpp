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

#ifndef ECVR_SYNTH_HPP_
#define ECVR_SYNTH_HPP_

#include <cstddef>
#include <cstdint>
#include <string>

#include "ecvr/dataset.hpp"

namespace ecvr {

/// Sparse Gaussian features with labels drawn from a planted logistic model.
/// Each entry is nonzero with probability `density` and scaled so that
/// E||a||^2 = 1; every example keeps at least one nonzero.
struct SynthSpec {
  std::size_t examples = 200;
  std::size_t features = 50;
  double density = 0.2;
  std::uint64_t seed = 2026;
  double planted_scale = 2.0;  // std-dev of the planted weight entries
};

/// "N,d,s" or "N,d,s,seed".
SynthSpec ParseSynthSpec(const std::string& text);
std::string ToString(const SynthSpec& spec);

Dataset SynthesizeDataset(const SynthSpec& spec);

}  // namespace ecvr

#endif  // ECVR_SYNTH_HPP_
