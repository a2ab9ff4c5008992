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

#include "ecvr/reference.hpp"

#include <sstream>

#include "ecvr/algorithms.hpp"

namespace ecvr {

ReferenceSolution SolveReference(const Problem& problem, const ReferenceOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("reference tolerance must be positive");
  const ProblemConstants c = problem.ComputeConstants();
  const double n = static_cast<double>(problem.nodes());
  const double eta = 1.0 / (4.0 * c.L_f + 42.0 * c.L / n);
  const double map_eta = 1.0 / c.L_f;
  const std::size_t m = problem.per_node();

  Lsvrg solver(problem, eta, 1.0 / static_cast<double>(m), options.seed);
  ReferenceSolution out;
  out.residual = problem.GradientMappingNorm(solver.x(), map_eta);
  while (out.residual > options.tol) {
    if (out.epochs >= options.max_epochs) {
      std::ostringstream msg;
      msg << "reference solver stopped after " << out.epochs
          << " epochs with gradient-mapping norm " << out.residual << " > " << options.tol;
      throw ReferenceNotConverged(msg.str(), out.residual);
    }
    for (std::size_t s = 0; s < m; ++s) solver.Step();
    ++out.epochs;
    out.residual = problem.GradientMappingNorm(solver.x(), map_eta);
  }
  out.x = solver.x();
  out.value = problem.PrimalValue(out.x);
  return out;
}

}  // namespace ecvr
