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


#include "ecvr/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ecvr/reference.hpp"
#include "ecvr/step_size.hpp"

namespace ecvr {

namespace {

// Integer per-step costs accumulate exactly in a double; fractional ones
// (dithering's 2.8d) pick up summation rounding.
bool BitsMatch(double cumulative, std::size_t k, double per_step) {
  const double expected = static_cast<double>(k) * per_step;
  if (per_step == std::floor(per_step)) return cumulative == expected;
  return std::abs(cumulative - expected) <= 1e-12 * expected;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool UsesEta(Algorithm a) {
  return a == Algorithm::kEcLsvrg || a == Algorithm::kLsvrg || a == Algorithm::kEcGd;
}

CompressorSpec Q1Of(const RunConfig& config) {
  return config.compressor_q1.value_or(config.compressor);
}

void TakeWorst(StepDiagnostics& worst, const StepDiagnostics& d) {
  worst.conservation = std::max(worst.conservation, d.conservation);
  worst.h_average = std::max(worst.h_average, d.h_average);
  worst.shadow_recursion = std::max(worst.shadow_recursion, d.shadow_recursion);
  worst.dual_aggregate = std::max(worst.dual_aggregate, d.dual_aggregate);
  worst.feasibility = std::max(worst.feasibility, d.feasibility);
}

// true if a ranks strictly ahead of b
bool Better(const RunResult& a, const RunResult& b) {
  const auto& ta = a.summary.bits_to_threshold;
  const auto& tb = b.summary.bits_to_threshold;
  if (ta && tb) return *ta < *tb;
  if (ta || tb) return ta.has_value();
  return a.records.back().primal_gap < b.records.back().primal_gap;
}

}  // namespace

Algorithm ParseAlgorithm(const std::string& s) {
  if (s == "ec_lsvrg") return Algorithm::kEcLsvrg;
  if (s == "lsvrg") return Algorithm::kLsvrg;
  if (s == "ec_quartz") return Algorithm::kEcQuartz;
  if (s == "ec_sdca") return Algorithm::kEcSdca;
  if (s == "quartz") return Algorithm::kQuartz;
  if (s == "sdca") return Algorithm::kSdca;
  if (s == "ec_gd") return Algorithm::kEcGd;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

std::string ToString(Algorithm algo) {
  switch (algo) {
    case Algorithm::kEcLsvrg: return "ec_lsvrg";
    case Algorithm::kLsvrg: return "lsvrg";
    case Algorithm::kEcQuartz: return "ec_quartz";
    case Algorithm::kEcSdca: return "ec_sdca";
    case Algorithm::kQuartz: return "quartz";
    case Algorithm::kSdca: return "sdca";
    case Algorithm::kEcGd: return "ec_gd";
  }
  return "?";
}

bool IsDualAlgorithm(Algorithm algo) {
  return algo == Algorithm::kEcQuartz || algo == Algorithm::kEcSdca ||
         algo == Algorithm::kQuartz || algo == Algorithm::kSdca;
}

StepChoice StepChoice::Parse(const std::string& s) {
  if (s == "theory") return Theory();
  if (s == "grid") return Grid();
  const double v = ParseReal(s);
  if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("bad step value '" + s + "'");
  return Value(v);
}

std::string StepChoice::ToString() const {
  switch (mode) {
    case Mode::kTheory: return "theory";
    case Mode::kGrid: return "grid";
    case Mode::kValue: return FormatReal(value);
  }
  return "?";
}

void Validate(const RunConfig& config) {
  if (config.data_path.empty() && !config.synth)
    throw std::invalid_argument("config needs a data path or a synthetic spec");
  if (config.nodes == 0) throw std::invalid_argument("node count must be >= 1");
  if (config.record_every == 0) throw std::invalid_argument("record cadence must be >= 1");
  if (config.p && !(*config.p > 0.0 && *config.p <= 1.0))
    throw std::invalid_argument("p must lie in (0, 1]");
  if (config.lambda1 < 0.0 || config.lambda2 < 0.0)
    throw std::invalid_argument("regularization weights must be >= 0");
  if (IsDualAlgorithm(config.algo) && !(config.lambda2 > 0.0))
    throw std::invalid_argument("dual methods need lambda2 > 0");
  if (config.theta.mode == StepChoice::Mode::kGrid)
    throw std::invalid_argument("theta has no grid search; use a value or 'theory'");
}

std::map<std::string, std::string> Describe(const RunConfig& config) {
  std::map<std::string, std::string> m;
  m["data"] = config.synth ? "synth:" + ToString(*config.synth) : config.data_path;
  m["normalize"] = config.normalize ? "true" : "false";
  m["nodes"] = std::to_string(config.nodes);
  m["algo"] = ToString(config.algo);
  m["compressor"] = config.compressor.ToString();
  m["compressor_q1"] = Q1Of(config).ToString();
  m["eta"] = config.eta.ToString();
  m["theta"] = config.theta.ToString();
  m["p"] = config.p ? FormatReal(*config.p) : "default";
  m["zero_shift_init"] = config.zero_shift_init ? "true" : "false";
  m["lambda1"] = FormatReal(config.lambda1);
  m["lambda2"] = FormatReal(config.lambda2);
  m["mode"] = ToString(config.mode);
  m["max_epochs"] = std::to_string(config.epochs);
  m["record_every"] = std::to_string(config.record_every);
  m["seed"] = std::to_string(config.seed);
  return m;
}

Problem BuildProblem(const RunConfig& config) {
  Validate(config);
  auto data = std::make_shared<Dataset>(config.synth ? SynthesizeDataset(*config.synth)
                                                     : ParseLibsvm(config.data_path));
  if (config.normalize) NormalizeColumns(*data);
  Partition partition = MakePartition(*data, config.nodes);
  return Problem(std::move(data), partition, config.lambda1, config.lambda2, config.mode);
}

double ResolveEta(const Problem& problem, const RunConfig& config) {
  if (config.eta.mode == StepChoice::Mode::kValue) return config.eta.value;
  if (config.eta.mode == StepChoice::Mode::kGrid)
    throw std::invalid_argument("grid eta must be resolved by GridSearchEta");
  const ProblemConstants c = problem.ComputeConstants();
  const std::size_t d = problem.dim();
  const bool composite = problem.mode() == ObjectiveMode::kComposite;
  switch (config.algo) {
    case Algorithm::kLsvrg: {
      const double p = config.p.value_or(1.0 / static_cast<double>(problem.per_node()));
      return TheoreticalEta(c, problem.nodes(), 1.0, 1.0, p,
                            composite ? LsvrgRegime::kComposite : LsvrgRegime::kSmooth);
    }
    case Algorithm::kEcLsvrg: {
      const CompressorSpec q1 = Q1Of(config);
      const double delta = DeltaOf(config.compressor, d);
      const double delta1 = DeltaOf(q1, d);
      const bool scaled = config.compressor.HasMeanScaling() && q1.HasMeanScaling();
      LsvrgRegime regime;
      if (composite)
        regime = scaled ? LsvrgRegime::kCompositeMeanScaled : LsvrgRegime::kComposite;
      else
        regime = scaled ? LsvrgRegime::kSmoothMeanScaled : LsvrgRegime::kSmooth;
      return TheoreticalEta(c, problem.nodes(), delta, delta1, config.p.value_or(delta), regime);
    }
    default:
      throw std::invalid_argument("no theoretical step size for " + ToString(config.algo));
  }
}

double ResolveTheta(const Problem& problem, const RunConfig& config) {
  if (config.theta.mode == StepChoice::Mode::kValue) return config.theta.value;
  if (!IsDualAlgorithm(config.algo))
    throw std::invalid_argument("theta applies only to dual methods");
  const ProblemConstants c = problem.ComputeConstants();
  const bool compressed = config.algo == Algorithm::kEcQuartz || config.algo == Algorithm::kEcSdca;
  const double delta = compressed ? DeltaOf(config.compressor, problem.dim()) : 1.0;
  const bool scaled = compressed && config.compressor.HasMeanScaling();
  return TheoreticalTheta(c, delta, problem.per_node(), problem.nodes(), problem.lambda2(), 4.0,
                          scaled);
}

std::unique_ptr<Optimizer> MakeOptimizer(const Problem& problem, const DualProblem* dual,
                                         const RunConfig& config) {
  const double eta = config.eta.value;
  const double theta = config.theta.value;
  switch (config.algo) {
    case Algorithm::kEcLsvrg: {
      LsvrgOptions o;
      o.eta = eta;
      o.p = config.p;
      o.q = config.compressor;
      o.q1 = Q1Of(config);
      o.zero_shift_init = config.zero_shift_init;
      return std::make_unique<EcLsvrg>(problem, o, config.seed);
    }
    case Algorithm::kLsvrg:
      return std::make_unique<Lsvrg>(
          problem, eta, config.p.value_or(1.0 / static_cast<double>(problem.per_node())),
          config.seed);
    case Algorithm::kEcGd:
      return std::make_unique<EcGd>(problem, eta, config.compressor, config.seed);
    case Algorithm::kEcQuartz:
    case Algorithm::kEcSdca: {
      DualOptions o;
      o.theta = theta;
      o.variant = config.algo == Algorithm::kEcQuartz ? DualVariant::kQuartz : DualVariant::kSdca;
      o.q = config.compressor;
      return std::make_unique<EcDual>(*dual, o, config.seed);
    }
    case Algorithm::kQuartz:
      return std::make_unique<Dual>(*dual, theta, DualVariant::kQuartz, config.seed);
    case Algorithm::kSdca:
      return std::make_unique<Dual>(*dual, theta, DualVariant::kSdca, config.seed);
  }
  throw std::invalid_argument("unknown algorithm");
}

RunResult RunOnProblem(const Problem& problem, const RunConfig& config_in, double p_star) {
  Validate(config_in);
  if (UsesEta(config_in.algo) && config_in.eta.mode == StepChoice::Mode::kGrid) {
    GridSearchResult grid = GridSearchEta(problem, config_in, p_star);
    for (std::size_t i = 0; i < grid.etas.size(); ++i)
      if (grid.etas[i] == grid.best_eta && grid.runs[i]) return std::move(*grid.runs[i]);
    throw std::runtime_error("every step size in the grid diverged");
  }

  RunConfig config = config_in;
  RunResult result;
  result.p_star = p_star;
  result.eta = result.theta = result.p = kNaN;
  if (UsesEta(config.algo)) {
    config.eta = StepChoice::Value(ResolveEta(problem, config));
    result.eta = config.eta.value;
  }
  std::optional<DualProblem> dual;
  if (IsDualAlgorithm(config.algo)) {
    config.theta = StepChoice::Value(ResolveTheta(problem, config));
    result.theta = config.theta.value;
    dual.emplace(problem);
  }

  std::unique_ptr<Optimizer> opt = MakeOptimizer(problem, dual ? &*dual : nullptr, config);
  opt->set_check_invariants(config.check_invariants);
  result.algo_name = opt->name();
  if (auto* ec = dynamic_cast<EcLsvrg*>(opt.get())) result.p = ec->p();
  if (config.algo == Algorithm::kLsvrg)
    result.p = config.p.value_or(1.0 / static_cast<double>(problem.per_node()));

  const double eps = opt->EpochsPerStep();
  const std::size_t steps_per_epoch = static_cast<std::size_t>(std::llround(1.0 / eps));
  const std::size_t total_steps = config.epochs * steps_per_epoch;
  const std::size_t record_steps = config.record_every * steps_per_epoch;
  const std::optional<double> per_step_bits = opt->ConstantBitsPerStep();

  const auto start = std::chrono::steady_clock::now();
  auto record = [&](std::size_t k) {
    TrialRecord r;
    r.k = k;
    r.epoch = static_cast<double>(k) / static_cast<double>(steps_per_epoch);
    r.bits = opt->cumulative_bits();
    const double primal = problem.PrimalValue(opt->x());
    if (!std::isfinite(primal)) throw NumericalError("non-finite primal value", k);
    r.primal_gap = primal - p_star;
    r.dual_gap = dual ? primal - dual->DualValue(*opt->alpha()) : kNaN;
    r.err_norm = opt->ErrorNorm();
    r.wall_ms = config.record_wall_time
                    ? std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count()
                    : 0.0;
    result.records.push_back(r);
  };

  if (total_steps > 0) record(0);
  for (std::size_t k = 1; k <= total_steps; ++k) {
    opt->Step();
    if (config.check_invariants) {
      ++result.invariants.steps_checked;
      TakeWorst(result.invariants.worst, opt->diagnostics());
      if (per_step_bits && !BitsMatch(opt->cumulative_bits(), k, *per_step_bits))
        result.invariants.bits_exact = false;
    }
    if (k % record_steps == 0 || k == total_steps) record(k);
  }

  result.final_x = opt->x();
  result.summary.threshold = config.threshold;
  result.summary.best_gap = std::numeric_limits<double>::infinity();
  for (const TrialRecord& r : result.records) {
    result.summary.best_gap = std::min(result.summary.best_gap, r.primal_gap);
    if (!result.summary.bits_to_threshold && r.primal_gap <= config.threshold)
      result.summary.bits_to_threshold = r.bits;
  }
  return result;
}

RunResult RunExperiment(const RunConfig& config) {
  const Problem problem = BuildProblem(config);
  ReferenceOptions ref;
  ref.tol = config.reference_tol;
  const ReferenceSolution star = SolveReference(problem, ref);
  return RunOnProblem(problem, config, star.value);
}

std::vector<double> DefaultEtaGrid() {
  std::vector<double> grid;
  for (int t = -4; t <= 1; ++t) {
    const double base = std::pow(10.0, t);
    grid.push_back(base);
    grid.push_back(3.0 * base);
  }
  return grid;
}

GridSearchResult GridSearchEta(const Problem& problem, const RunConfig& config, double p_star,
                               const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("empty step-size grid");
  GridSearchResult out;
  std::optional<std::size_t> best;
  for (double eta : grid) {
    RunConfig c = config;
    c.eta = StepChoice::Value(eta);
    out.etas.push_back(eta);
    try {
      RunResult r = RunOnProblem(problem, c, p_star);
      if (r.records.empty()) {
        out.runs.emplace_back(std::move(r));
        if (!best) best = out.runs.size() - 1;
        continue;
      }
      // a finite but exploding run loses to everything that stayed bounded
      if (!std::isfinite(r.records.back().primal_gap)) {
        out.runs.emplace_back(std::nullopt);
        continue;
      }
      out.runs.emplace_back(std::move(r));
      const std::size_t i = out.runs.size() - 1;
      if (!best || (!out.runs[*best]->records.empty() && Better(*out.runs[i], *out.runs[*best])))
        best = i;
    } catch (const NumericalError&) {
      out.runs.emplace_back(std::nullopt);
    }
  }
  if (!best) throw std::runtime_error("every step size in the grid diverged");
  out.best_eta = out.etas[*best];
  return out;
}

TraceDocument ToDocument(const RunResult& result, const RunConfig& config) {
  TraceDocument doc;
  doc.metadata = Describe(config);
  doc.metadata["resolved_eta"] = FormatReal(result.eta);
  doc.metadata["resolved_theta"] = FormatReal(result.theta);
  doc.metadata["resolved_p"] = FormatReal(result.p);
  doc.metadata["p_star"] = FormatReal(result.p_star);
  doc.records = result.records;
  doc.summary = result.summary;
  return doc;
}

}  // namespace ecvr
