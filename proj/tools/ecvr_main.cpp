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


// Command-line front end:
//
//   ecvr run --synth 200,50,0.2 --algo ec_lsvrg --compressor top_k:1 --n 4
//            --eta grid --epochs 500 --seed 1 --out trace.csv
//   ecvr verify compressors|eso|invariants
//   ecvr reference --synth 200,50,0.2 --tol 1e-12
//   ecvr synth --synth 200,50,0.2 --out fixture.libsvm
//
// ECVR_SEED, when set, replaces --seed.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ecvr/compressors.hpp"
#include "ecvr/eso.hpp"
#include "ecvr/experiment.hpp"
#include "ecvr/reference.hpp"
#include "ecvr/rng.hpp"
#include "ecvr/trace.hpp"

namespace {

using namespace ecvr;

struct DataOptions {
  std::string data;
  std::string synth;
  bool normalize = false;
  std::size_t nodes = 4;
  double lambda1 = 1e-3;
  double lambda2 = 1e-3;
  std::string mode = "composite";
};

void AddDataOptions(CLI::App* app, DataOptions& o) {
  auto* data = app->add_option("--data", o.data, "LIBSVM file");
  auto* synth = app->add_option("--synth", o.synth, "synthetic data N,d,s[,seed]");
  data->excludes(synth);
  app->add_flag("--normalize", o.normalize, "scale every example to unit norm");
  app->add_option("--n,--nodes", o.nodes, "number of nodes")->check(CLI::PositiveNumber);
  app->add_option("--lambda1", o.lambda1, "l1 weight");
  app->add_option("--lambda2", o.lambda2, "l2 weight");
  app->add_option("--mode", o.mode, "composite or smooth")
      ->check(CLI::IsMember({"composite", "smooth"}));
}

void ApplyDataOptions(const DataOptions& o, RunConfig& c) {
  if (o.data.empty() && o.synth.empty()) throw std::invalid_argument("give --data or --synth");
  c.data_path = o.data;
  if (!o.synth.empty()) c.synth = ParseSynthSpec(o.synth);
  c.normalize = o.normalize;
  c.nodes = o.nodes;
  c.lambda1 = o.lambda1;
  c.lambda2 = o.lambda2;
  c.mode = ParseObjectiveMode(o.mode);
}

std::uint64_t SeedWithEnv(std::uint64_t seed) {
  if (const char* env = std::getenv("ECVR_SEED"); env && *env) return std::stoull(env);
  return seed;
}

int VerifyCompressors(std::size_t d, std::size_t trials, std::uint64_t seed) {
  const CompressorSpec contraction[] = {
      CompressorSpec::TopK(1),  CompressorSpec::TopK(5),
      CompressorSpec::RandK(1), CompressorSpec::RandK(5),
      CompressorSpec::ScaledUnbiased(CompressorSpec::RandomDithering()),
      CompressorSpec::ScaledUnbiased(CompressorSpec::NaturalCompression()),
      CompressorSpec::NTopK(5), CompressorSpec::RTopK(5)};
  bool ok = true;
  RngStream rng = RngStream::Split(seed, 0, StreamPurpose::kVerify);
  for (const CompressorSpec& spec : contraction) {
    const ContractionReport r = VerifyContraction(spec, d, trials, rng);
    ok &= r.passed;
    std::cout << (r.passed ? "PASS " : "FAIL ") << "contraction " << spec.ToString()
              << " mean=" << r.mean_ratio << " se=" << r.std_error << " max=" << r.max_ratio
              << " bound=" << r.bound << '\n';
  }
  for (const CompressorSpec& spec :
       {CompressorSpec::RandomDithering(), CompressorSpec::NaturalCompression()}) {
    Vec x(d);
    for (double& v : x) v = rng.Normal();
    const MomentReport r = VerifyUnbiased(spec, x, trials, rng);
    const bool pass = r.mean_ok && r.second_moment_ok;
    ok &= pass;
    std::cout << (pass ? "PASS " : "FAIL ") << "unbiased " << spec.ToString()
              << " max_z=" << r.max_z << " second_moment=" << r.second_moment
              << " bound=" << r.second_moment_bound << '\n';
  }
  const MomentReport r = VerifyMeanScaling(CompressorSpec::RandK(5), d, trials, rng);
  ok &= r.mean_ok;
  std::cout << (r.mean_ok ? "PASS " : "FAIL ") << "mean-scaling rand_k:5 max_z=" << r.max_z
            << '\n';
  return ok ? 0 : 1;
}

int VerifyEso(std::size_t instances, std::size_t trials, std::uint64_t seed) {
  bool ok = true;
  RngStream rng = RngStream::Split(seed, 0, StreamPurpose::kVerify);
  Partition part{4, 5, 0};
  for (std::size_t i = 0; i < instances; ++i) {
    const CscMatrix a = RandomGaussianMatrix(10, part.retained(), rng);
    const EsoReport r = EsoCheck(a, part, trials, rng);
    ok &= r.passed;
    std::cout << (r.passed ? "PASS " : "FAIL ") << "eso instance " << i << " ratio=" << r.ratio
              << " se=" << r.ratio_se << '\n';
  }
  const CscMatrix a = RandomGaussianMatrix(10, 1, rng);
  const EsoReport r = EsoCheck(a, Partition{1, 1, 0}, 1, rng);
  ok &= r.passed;
  std::cout << (r.passed ? "PASS " : "FAIL ") << "eso n=m=1 ratio=" << r.ratio << '\n';
  return ok ? 0 : 1;
}

int VerifyInvariants(const RunConfig& base, std::size_t epochs) {
  const Problem problem = BuildProblem(base);
  bool ok = true;
  for (Algorithm algo : {Algorithm::kEcLsvrg, Algorithm::kEcQuartz, Algorithm::kEcSdca,
                         Algorithm::kEcGd}) {
    RunConfig c = base;
    c.algo = algo;
    c.epochs = epochs;
    c.check_invariants = true;
    if (algo == Algorithm::kEcLsvrg || algo == Algorithm::kEcGd)
      c.eta = c.eta.mode == StepChoice::Mode::kValue ? c.eta : StepChoice::Value(0.1);
    const RunResult r = RunOnProblem(problem, c, 0.0);
    const StepDiagnostics& w = r.invariants.worst;
    const bool pass = w.conservation == 0.0 && w.h_average <= 1e-10 &&
                      w.shadow_recursion <= 1e-10 && w.dual_aggregate <= 1e-10 &&
                      w.feasibility <= 1e-12 && r.invariants.bits_exact;
    ok &= pass;
    std::cout << (pass ? "PASS " : "FAIL ") << ToString(algo)
              << " steps=" << r.invariants.steps_checked << " conservation=" << w.conservation
              << " h_average=" << w.h_average << " shadow=" << w.shadow_recursion
              << " dual_aggregate=" << w.dual_aggregate << " feasibility=" << w.feasibility
              << " bits_exact=" << (r.invariants.bits_exact ? "yes" : "no") << '\n';
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Error-compensated variance-reduced distributed optimization"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run one optimizer and write a trace");
  DataOptions run_data;
  AddDataOptions(run, run_data);
  std::string algo = "ec_lsvrg", compressor = "top_k:1", compressor_q1, eta = "theory",
              theta = "theory", out;
  double p = 0.0, threshold = 1e-8, reference_tol = 1e-12;
  std::size_t epochs = 100, record_every = 1;
  std::uint64_t seed = 1;
  bool zero_shift = false, check = false, no_wall = false;
  run->add_option("--algo", algo, "ec_lsvrg|ec_quartz|ec_sdca|lsvrg|ec_gd|quartz|sdca");
  run->add_option("--compressor", compressor, "compressor spec, e.g. top_k:1");
  run->add_option("--compressor-q1", compressor_q1, "compressor for the shift update");
  run->add_option("--eta", eta, "step size, 'theory' or 'grid'");
  run->add_option("--theta", theta, "dual step, or 'theory'");
  run->add_option("--p", p, "reference-point refresh probability");
  run->add_option("--epochs,--max-epochs", epochs, "epoch budget");
  run->add_option("--record-every", record_every, "epochs between trace rows")
      ->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "master seed");
  run->add_option("--threshold", threshold, "gap for bits-to-threshold");
  run->add_option("--reference-tol", reference_tol, "gradient-mapping tolerance for P*");
  run->add_flag("--zero-shift-init", zero_shift, "start the learned shifts at zero");
  run->add_flag("--check-invariants", check, "check per-step identities");
  run->add_flag("--no-wall-time", no_wall, "write wall_ms as 0");
  run->add_option("--out", out, "trace CSV path; a .json twin is written next to it");

  // verify
  auto* verify = app.add_subcommand("verify", "statistical and invariant checks");
  verify->require_subcommand(1);
  std::size_t v_dim = 100, v_trials = 10000, v_instances = 20, v_epochs = 5;
  std::uint64_t v_seed = 1;
  auto* v_comp = verify->add_subcommand("compressors", "contraction and unbiasedness");
  v_comp->add_option("--d", v_dim, "vector dimension");
  v_comp->add_option("--trials", v_trials, "Monte-Carlo trials");
  v_comp->add_option("--seed", v_seed, "seed");
  auto* v_eso = verify->add_subcommand("eso", "ESO inequality on random Gaussian data");
  v_eso->add_option("--instances", v_instances, "random instances");
  v_eso->add_option("--trials", v_trials, "samples per instance");
  v_eso->add_option("--seed", v_seed, "seed");
  auto* v_inv = verify->add_subcommand("invariants", "per-step identities of every method");
  DataOptions inv_data;
  inv_data.synth = "200,50,0.2";
  AddDataOptions(v_inv, inv_data);
  std::string inv_compressor = "top_k:1";
  v_inv->add_option("--compressor", inv_compressor, "compressor spec");
  v_inv->add_option("--epochs", v_epochs, "epochs per method");
  v_inv->add_option("--seed", v_seed, "seed");

  // reference
  auto* ref = app.add_subcommand("reference", "solve for P* to a gradient-mapping tolerance");
  DataOptions ref_data;
  AddDataOptions(ref, ref_data);
  double ref_tol = 1e-12;
  std::uint64_t ref_seed = 0;
  ref->add_option("--tol", ref_tol, "gradient-mapping tolerance");
  ref->add_option("--seed", ref_seed, "sampling seed");

  // synth
  auto* syn = app.add_subcommand("synth", "write a synthetic dataset in LIBSVM format");
  std::string syn_spec = "200,50,0.2", syn_out;
  syn->add_option("--synth", syn_spec, "N,d,s[,seed]");
  syn->add_option("--out", syn_out, "output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      RunConfig c;
      ApplyDataOptions(run_data, c);
      c.algo = ParseAlgorithm(algo);
      c.compressor = CompressorSpec::Parse(compressor);
      if (!compressor_q1.empty()) c.compressor_q1 = CompressorSpec::Parse(compressor_q1);
      c.eta = StepChoice::Parse(eta);
      c.theta = StepChoice::Parse(theta);
      if (run->count("--p")) c.p = p;
      c.epochs = epochs;
      c.record_every = record_every;
      c.seed = SeedWithEnv(seed);
      c.threshold = threshold;
      c.reference_tol = reference_tol;
      c.zero_shift_init = zero_shift;
      c.check_invariants = check;
      c.record_wall_time = !no_wall;

      const RunResult r = RunExperiment(c);
      if (!out.empty()) {
        std::ofstream csv(out);
        if (!csv) throw std::runtime_error("cannot write " + out);
        WriteTraceCsv(r.records, csv);
        if (!r.records.empty()) WriteSummaryLine(r.summary, csv);
        std::ofstream json(std::filesystem::path(out).replace_extension(".json"));
        WriteTraceJson(ToDocument(r, c), json);
      } else {
        WriteTraceCsv(r.records, std::cout);
      }
      if (!r.records.empty()) {
        std::cerr << r.algo_name << " eta=" << FormatReal(r.eta)
                  << " theta=" << FormatReal(r.theta) << " p=" << FormatReal(r.p) << ' ';
        WriteSummaryLine(r.summary, std::cerr);
      }
      return 0;
    }
    if (verify->parsed()) {
      if (v_comp->parsed()) return VerifyCompressors(v_dim, v_trials, SeedWithEnv(v_seed));
      if (v_eso->parsed()) return VerifyEso(v_instances, v_trials, SeedWithEnv(v_seed));
      RunConfig c;
      ApplyDataOptions(inv_data, c);
      c.compressor = CompressorSpec::Parse(inv_compressor);
      c.seed = SeedWithEnv(v_seed);
      return VerifyInvariants(c, v_epochs);
    }
    if (ref->parsed()) {
      RunConfig c;
      ApplyDataOptions(ref_data, c);
      const Problem problem = BuildProblem(c);
      ReferenceOptions o;
      o.tol = ref_tol;
      o.seed = SeedWithEnv(ref_seed);
      const ReferenceSolution s = SolveReference(problem, o);
      std::cout << "p_star=" << FormatReal(s.value) << " residual=" << s.residual
                << " epochs=" << s.epochs << '\n';
      return 0;
    }
    if (syn->parsed()) {
      std::ofstream f(syn_out);
      if (!f) throw std::runtime_error("cannot write " + syn_out);
      WriteLibsvm(SynthesizeDataset(ParseSynthSpec(syn_spec)), f);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
