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

// Distributed optimizers simulated in one process. Nodes are stepped in
// index order and every aggregate is summed in node order, so a run is a
// deterministic function of its master seed.
//
// Random streams are split per (node, purpose): sample indices, the
// reference-point coin, and each compressor draw from their own streams.
// An error-compensated method and its uncompressed counterpart constructed
// with the same seed therefore see identical sample indices.

#ifndef ECVR_ALGORITHMS_HPP_
#define ECVR_ALGORITHMS_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ecvr/compressors.hpp"
#include "ecvr/problem.hpp"
#include "ecvr/rng.hpp"
#include "ecvr/vec.hpp"

namespace ecvr {

/// Per-step identity residuals, filled only when invariant checking is on.
/// Fields that do not apply to a method stay at zero.
struct StepDiagnostics {
  // max over nodes/coords of |e' + y - (e + step)|
  double conservation = 0.0;
  // ||h - mean(h_tau)||_inf
  double h_average = 0.0;
  // EC-LSVRG shadow iterate x~ = x - mean(e_tau) recursion, relative
  double shadow_recursion = 0.0;
  // ||u + mean(e_tau) - 1/(lambda N) sum a alpha||_inf / (1 + ||alpha||_inf)
  double dual_aggregate = 0.0;
  // largest excursion of b*alpha outside [0, 1]
  double feasibility = 0.0;
};

class Optimizer {
 public:
  virtual ~Optimizer() = default;

  virtual void Step() = 0;
  virtual std::string name() const = 0;

  virtual const Vec& x() const = 0;
  std::size_t iteration() const { return iteration_; }
  double cumulative_bits() const { return bits_; }
  /// Effective passes over the data consumed by one step.
  virtual double EpochsPerStep() const = 0;
  /// Bits one step sends when the cost does not depend on the step's
  /// randomness; nullopt otherwise.
  virtual std::optional<double> ConstantBitsPerStep() const = 0;
  /// ||mean over nodes of e_tau||; zero for uncompressed methods.
  virtual double ErrorNorm() const { return 0.0; }
  /// Dual iterate for primal-dual methods.
  virtual const Vec* alpha() const { return nullptr; }

  void set_check_invariants(bool on) { check_invariants_ = on; }
  const StepDiagnostics& diagnostics() const { return diag_; }

 protected:
  std::size_t iteration_ = 0;
  double bits_ = 0.0;
  bool check_invariants_ = false;
  StepDiagnostics diag_;
};

// ---------------------------------------------------------------------------
// Loopless SVRG family.

struct LsvrgOptions {
  double eta = 0.0;
  /// Reference-point refresh probability; nullopt means p = delta(Q).
  std::optional<double> p;
  CompressorSpec q = CompressorSpec::Identity();
  CompressorSpec q1 = CompressorSpec::Identity();
  /// h_tau^0 = 0 instead of grad f^(tau)(x^0).
  bool zero_shift_init = false;
};

/// Error-compensated loopless SVRG with learned per-node gradient shifts.
class EcLsvrg final : public Optimizer {
 public:
  EcLsvrg(const Problem& problem, LsvrgOptions options, std::uint64_t seed,
          std::optional<Vec> x0 = std::nullopt);

  void Step() override;
  std::string name() const override { return "ec_lsvrg"; }
  const Vec& x() const override { return x_; }
  double EpochsPerStep() const override;
  std::optional<double> ConstantBitsPerStep() const override;
  double ErrorNorm() const override;

  const Vec& w() const { return w_; }
  const Vec& h() const { return h_; }
  const Vec& h_node(std::size_t t) const { return h_node_[t]; }
  const Vec& e_node(std::size_t t) const { return e_node_[t]; }
  double eta() const { return eta_; }
  double p() const { return p_; }
  /// Whether the most recent step refreshed the reference point.
  bool last_refresh() const { return last_refresh_; }

 private:
  void RefreshReferenceGradients();

  const Problem& problem_;
  double eta_;
  double p_;
  CompressorSpec q_, q1_;
  double bits_per_step_;

  Vec x_, w_, h_;
  std::vector<Vec> h_node_, e_node_, grad_w_;
  std::vector<RngStream> sample_rng_, q_rng_, q1_rng_;
  RngStream coin_rng_;
  bool last_refresh_ = false;
};

/// Uncompressed distributed loopless SVRG; the reference method for EC-LSVRG.
class Lsvrg final : public Optimizer {
 public:
  Lsvrg(const Problem& problem, double eta, double p, std::uint64_t seed,
        std::optional<Vec> x0 = std::nullopt);

  void Step() override;
  std::string name() const override { return "lsvrg"; }
  const Vec& x() const override { return x_; }
  double EpochsPerStep() const override;
  std::optional<double> ConstantBitsPerStep() const override { return std::nullopt; }

  const Vec& w() const { return w_; }

 private:
  const Problem& problem_;
  double eta_;
  double p_;
  Vec x_, w_;
  std::vector<Vec> grad_w_;
  std::vector<RngStream> sample_rng_;
  RngStream coin_rng_;
};

// ---------------------------------------------------------------------------
// Quartz / SDCA family.

enum class DualVariant { kQuartz, kSdca };

struct DualOptions {
  double theta = 0.0;
  DualVariant variant = DualVariant::kQuartz;
  CompressorSpec q = CompressorSpec::Identity();
};

/// Error-compensated Quartz / SDCA. Each node sends its compressed primal
/// increment (1 / (lambda m)) a_i dalpha_i plus accumulated error.
class EcDual final : public Optimizer {
 public:
  EcDual(const DualProblem& problem, DualOptions options, std::uint64_t seed);

  void Step() override;
  std::string name() const override {
    return variant_ == DualVariant::kQuartz ? "ec_quartz" : "ec_sdca";
  }
  const Vec& x() const override { return x_; }
  double EpochsPerStep() const override;
  std::optional<double> ConstantBitsPerStep() const override { return bits_per_step_; }
  double ErrorNorm() const override;
  const Vec* alpha() const override { return &alpha_; }

  const Vec& u() const { return u_; }
  const Vec& e_node(std::size_t t) const { return e_node_[t]; }
  double theta() const { return theta_; }

 private:
  const DualProblem& problem_;
  double theta_;
  DualVariant variant_;
  CompressorSpec q_;
  double bits_per_step_;

  Vec alpha_, x_, u_;
  std::vector<Vec> e_node_;
  std::vector<RngStream> sample_rng_, q_rng_;
};

/// Uncompressed distributed Quartz / SDCA keeping u = 1/(lambda N) sum a alpha.
class Dual final : public Optimizer {
 public:
  Dual(const DualProblem& problem, double theta, DualVariant variant, std::uint64_t seed);

  void Step() override;
  std::string name() const override {
    return variant_ == DualVariant::kQuartz ? "quartz" : "sdca";
  }
  const Vec& x() const override { return x_; }
  double EpochsPerStep() const override;
  std::optional<double> ConstantBitsPerStep() const override { return bits_per_step_; }
  const Vec* alpha() const override { return &alpha_; }

  const Vec& u() const { return u_; }

 private:
  const DualProblem& problem_;
  double theta_;
  DualVariant variant_;
  double bits_per_step_;
  Vec alpha_, x_, u_;
  std::vector<RngStream> sample_rng_;
};

// ---------------------------------------------------------------------------

/// Error-feedback proximal gradient descent with full node gradients.
class EcGd final : public Optimizer {
 public:
  EcGd(const Problem& problem, double eta, CompressorSpec q, std::uint64_t seed,
       std::optional<Vec> x0 = std::nullopt);

  void Step() override;
  std::string name() const override { return "ec_gd"; }
  const Vec& x() const override { return x_; }
  /// Every step evaluates all node gradients.
  double EpochsPerStep() const override { return 1.0; }
  std::optional<double> ConstantBitsPerStep() const override { return bits_per_step_; }
  double ErrorNorm() const override;

  const Vec& e_node(std::size_t t) const { return e_node_[t]; }

 private:
  const Problem& problem_;
  double eta_;
  CompressorSpec q_;
  double bits_per_step_;
  Vec x_;
  std::vector<Vec> e_node_;
  std::vector<RngStream> q_rng_;
};

/// Running weighted average with weights w_i = (1 - rate)^{-i}, i = 0, 1, ...
/// Kept in normalized form so large i never overflows.
class WeightedAverager {
 public:
  explicit WeightedAverager(double rate);

  void Add(std::span<const double> x);
  const Vec& value() const { return avg_; }
  std::size_t count() const { return count_; }

 private:
  double decay_;
  double norm_ = 0.0;  // W_k / w_k
  std::size_t count_ = 0;
  Vec avg_;
};

/// Averages a whole history at once.
Vec WeightedAverage(const std::vector<Vec>& history, double rate);

}  // namespace ecvr

#endif  // ECVR_ALGORITHMS_HPP_
