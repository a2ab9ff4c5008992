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

#include "ecvr/synth.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ecvr/problem.hpp"
#include "ecvr/rng.hpp"

namespace ecvr {

SynthSpec ParseSynthSpec(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) parts.push_back(part);
  if (parts.size() != 3 && parts.size() != 4)
    throw std::invalid_argument("synthetic spec must be N,d,s[,seed], got '" + text + "'");
  SynthSpec spec;
  try {
    spec.examples = std::stoul(parts[0]);
    spec.features = std::stoul(parts[1]);
    spec.density = std::stod(parts[2]);
    if (parts.size() == 4) spec.seed = std::stoull(parts[3]);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad synthetic spec '" + text + "'");
  }
  if (spec.examples == 0 || spec.features == 0 || !(spec.density > 0.0 && spec.density <= 1.0))
    throw std::invalid_argument("synthetic spec needs N, d >= 1 and s in (0, 1]");
  return spec;
}

std::string ToString(const SynthSpec& spec) {
  std::ostringstream out;
  out << spec.examples << ',' << spec.features << ',' << spec.density << ',' << spec.seed;
  return out.str();
}

Dataset SynthesizeDataset(const SynthSpec& spec) {
  RngStream rng = RngStream::Split(spec.seed, 0, StreamPurpose::kData);
  const std::size_t d = spec.features;
  Vec planted(d);
  for (double& v : planted) v = spec.planted_scale * rng.Normal();

  const double scale = 1.0 / std::sqrt(static_cast<double>(d) * spec.density);
  Dataset data;
  data.features = CscMatrix(d);
  data.labels.reserve(spec.examples);
  for (std::size_t j = 0; j < spec.examples; ++j) {
    std::vector<std::pair<std::uint32_t, double>> entries;
    for (std::size_t i = 0; i < d; ++i)
      if (rng.Bernoulli(spec.density))
        entries.emplace_back(static_cast<std::uint32_t>(i), scale * rng.Normal());
    if (entries.empty())
      entries.emplace_back(static_cast<std::uint32_t>(rng.Index(d)), scale * rng.Normal());
    double margin = 0.0;
    for (const auto& [i, v] : entries) margin += v * planted[i];
    data.labels.push_back(rng.Bernoulli(Sigmoid(margin)) ? 1.0 : -1.0);
    data.features.AppendColumn(std::move(entries));
  }
  return data;
}

}  // namespace ecvr
