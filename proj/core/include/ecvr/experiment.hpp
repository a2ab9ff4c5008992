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

#ifndef ECVR_EXPERIMENT_HPP_
#define ECVR_EXPERIMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ecvr/algorithms.hpp"
#include "ecvr/compressors.hpp"
#include "ecvr/dataset.hpp"
#include "ecvr/problem.hpp"
#include "ecvr/synth.hpp"
#include "ecvr/trace.hpp"

namespace ecvr {

enum class Algorithm { kEcLsvrg, kLsvrg, kEcQuartz, kEcSdca, kQuartz, kSdca, kEcGd };

Algorithm ParseAlgorithm(const std::string& s);
std::string ToString(Algorithm algo);
bool IsDualAlgorithm(Algorithm algo);

/// A step parameter given as a number, "theory", or "grid".
struct StepChoice {
  enum class Mode { kValue, kTheory, kGrid };
  Mode mode = Mode::kTheory;
  double value = 0.0;

  static StepChoice Value(double v) { return {Mode::kValue, v}; }
  static StepChoice Theory() { return {Mode::kTheory, 0.0}; }
  static StepChoice Grid() { return {Mode::kGrid, 0.0}; }
  static StepChoice Parse(const std::string& s);
  std::string ToString() const;
};

struct RunConfig {
  // Data: a LIBSVM file, or a synthetic spec when synth is set.
  std::string data_path;
  std::optional<SynthSpec> synth;
  bool normalize = false;
  std::size_t nodes = 4;

  Algorithm algo = Algorithm::kEcLsvrg;
  CompressorSpec compressor = CompressorSpec::TopK(1);
  std::optional<CompressorSpec> compressor_q1;  // defaults to compressor
  StepChoice eta = StepChoice::Theory();
  StepChoice theta = StepChoice::Theory();
  std::optional<double> p;
  bool zero_shift_init = false;

  double lambda1 = 1e-3;
  double lambda2 = 1e-3;
  ObjectiveMode mode = ObjectiveMode::kComposite;

  std::size_t epochs = 100;
  std::size_t record_every = 1;  // epochs between trace rows
  std::uint64_t seed = 1;

  bool check_invariants = false;
  /// When false wall_ms is written as 0 so traces are byte-reproducible.
  bool record_wall_time = true;
  double threshold = 1e-8;  // gap used for bits-to-threshold and grid ranking
  double reference_tol = 1e-12;
};

void Validate(const RunConfig& config);
std::map<std::string, std::string> Describe(const RunConfig& config);

/// Loads or synthesizes the data and builds the partitioned problem.
Problem BuildProblem(const RunConfig& config);

/// Worst per-step identity residuals seen during a run.
struct InvariantSummary {
  std::size_t steps_checked = 0;
  StepDiagnostics worst;
  /// cumulative bits == k * per-step cost after every step (constant-cost methods).
  bool bits_exact = true;
};

struct RunResult {
  std::string algo_name;
  double eta = 0.0;    // NaN when not used
  double theta = 0.0;  // NaN when not used
  double p = 0.0;      // NaN when not used
  double p_star = 0.0;
  std::vector<TrialRecord> records;
  TraceSummary summary;
  Vec final_x;
  InvariantSummary invariants;
};

/// Resolves "theory" step parameters for the configured method.
double ResolveEta(const Problem& problem, const RunConfig& config);
double ResolveTheta(const Problem& problem, const RunConfig& config);

/// Builds the optimizer for a config whose eta / theta are already numbers.
std::unique_ptr<Optimizer> MakeOptimizer(const Problem& problem, const DualProblem* dual,
                                         const RunConfig& config);

/// Runs on an already-built problem with known optimum value p_star. An eta
/// of kind "grid" triggers GridSearchEta and returns the winning run.
RunResult RunOnProblem(const Problem& problem, const RunConfig& config, double p_star);

/// Builds the problem, solves for P*, then RunOnProblem.
RunResult RunExperiment(const RunConfig& config);

/// {1, 3} x 10^t for t = -4..1.
std::vector<double> DefaultEtaGrid();

struct GridSearchResult {
  double best_eta = 0.0;
  std::vector<double> etas;
  std::vector<std::optional<RunResult>> runs;  // nullopt when the run diverged
};

/// Runs every grid value. Ranking: runs that reach config.threshold by fewest
/// bits first, then lowest final primal gap.
GridSearchResult GridSearchEta(const Problem& problem, const RunConfig& config, double p_star,
                               const std::vector<double>& grid = DefaultEtaGrid());

TraceDocument ToDocument(const RunResult& result, const RunConfig& config);

}  // namespace ecvr

#endif  // ECVR_EXPERIMENT_HPP_
