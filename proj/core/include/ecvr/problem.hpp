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

// L1-L2 regularized logistic regression over examples split across nodes.
//
//   P(x) = 1/N sum_j log(1 + exp(-b_j a_j^T x)) + lambda1 ||x||_1
//          + lambda2 / 2 ||x||^2
//
// In composite mode the regularizer psi carries both penalty terms and the
// per-example losses f_i are plain logistic losses. In smooth mode lambda1
// must be zero and the l2 term moves into every f_i, leaving psi = 0.
//
// The same objective is also written as 1/N sum phi_j(a_j^T x) + lambda g(x)
// with lambda = lambda2 and g(x) = ||x||^2 / 2 + (lambda1 / lambda2) ||x||_1,
// which is what the primal-dual methods work with.

#ifndef ECVR_PROBLEM_HPP_
#define ECVR_PROBLEM_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>

#include "ecvr/dataset.hpp"
#include "ecvr/vec.hpp"

namespace ecvr {

enum class ObjectiveMode { kComposite, kSmooth };

ObjectiveMode ParseObjectiveMode(const std::string& s);
std::string ToString(ObjectiveMode mode);

struct ProblemConstants {
  double r_max = 0.0;     // R_m = max column norm
  double r_bar_sq = 0.0;  // max over nodes of lambda_max(node Gram) / m
  double r_sq = 0.0;      // lambda_max(full Gram) / N
  double L = 0.0;         // smoothness of every f_i
  double L_bar = 0.0;     // smoothness of every node average f^(tau)
  double L_f = 0.0;       // smoothness of f
  double mu = 0.0;
};

/// log(1 + exp(t)) without overflow.
double Log1pExp(double t);
/// 1 / (1 + exp(-t)).
double Sigmoid(double t);

struct PowerIterationResult {
  double value = 0.0;
  double residual = 0.0;  // ||G v - value v|| for the final unit v
  std::size_t iterations = 0;
  bool converged = false;
};

/// Largest eigenvalue of sum_{j in [begin, end)} a_j a_j^T by power iteration
/// from a fixed-seed start vector. Stops once the Rayleigh quotient changes by
/// less than rel_tol (relative); restarts from a fresh seeded vector if the
/// iterate collapses to zero.
PowerIterationResult GramLambdaMax(const CscMatrix& a, std::size_t begin, std::size_t end,
                                   double rel_tol = 1e-8, std::size_t max_iter = 10000);

class Problem {
 public:
  Problem(std::shared_ptr<const Dataset> data, Partition partition, double lambda1,
          double lambda2, ObjectiveMode mode);

  const Dataset& data() const { return *data_; }
  const Partition& partition() const { return partition_; }
  double lambda1() const { return lambda1_; }
  double lambda2() const { return lambda2_; }
  ObjectiveMode mode() const { return mode_; }

  std::size_t dim() const { return data_->dim(); }
  std::size_t nodes() const { return partition_.nodes; }
  std::size_t per_node() const { return partition_.per_node; }
  /// Number of examples in play, n * m.
  std::size_t examples() const { return partition_.retained(); }

  SparseColumn Example(std::size_t global) const { return data_->features.Column(global); }
  double Label(std::size_t global) const { return data_->labels[global]; }

  /// d/dz of log(1 + exp(-b z)) at the example's margin z = a^T x.
  double LossDerivative(std::size_t global, double margin) const;

  /// out += scale * grad f_i^(tau)(x).
  void AddExampleGradient(std::size_t node, std::size_t local, std::span<const double> x,
                          double scale, std::span<double> out) const;
  Vec ExampleGradient(std::span<const double> x, std::size_t node, std::size_t local) const;
  Vec NodeGradient(std::span<const double> x, std::size_t node) const;
  Vec FullGradient(std::span<const double> x) const;

  double ExampleValue(std::span<const double> x, std::size_t node, std::size_t local) const;
  /// f(x): mean loss, plus the l2 term in smooth mode.
  double SmoothValue(std::span<const double> x) const;
  /// psi(x): both penalties in composite mode, zero in smooth mode.
  double RegularizerValue(std::span<const double> x) const;
  /// P(x) = f(x) + psi(x); identical in both modes.
  double PrimalValue(std::span<const double> x) const;

  /// prox_{eta psi}(v): soft-threshold by eta*lambda1 then divide by
  /// 1 + eta*lambda2. Identity in smooth mode (psi = 0).
  Vec ProxRegularizer(std::span<const double> v, double eta) const;

  /// ||x - prox_{eta psi}(x - eta grad f(x))|| / eta.
  double GradientMappingNorm(std::span<const double> x, double eta) const;

  ProblemConstants ComputeConstants() const;

 private:
  std::shared_ptr<const Dataset> data_;
  Partition partition_;
  double lambda1_;
  double lambda2_;
  ObjectiveMode mode_;
};

class InfeasibleDualError : public std::runtime_error {
 public:
  InfeasibleDualError(const std::string& what, std::size_t block)
      : std::runtime_error(what), block_(block) {}
  std::size_t block() const { return block_; }

 private:
  std::size_t block_;
};

/// Primal-dual view: P(x) = 1/N sum phi_j(a_j^T x) + lambda g(x) and its dual
///   D(alpha) = -lambda g*(1/(lambda N) sum a_j alpha_j) - 1/N sum phi_j*(-alpha_j).
/// Dual blocks are indexed by the retained global example index.
class DualProblem {
 public:
  explicit DualProblem(Problem primal);

  const Problem& primal() const { return primal_; }
  double lambda() const { return lambda_; }
  double l1_ratio() const { return l1_ratio_; }  // c = lambda1 / lambda2
  double gamma() const { return 4.0; }           // phi is 1/gamma smooth

  double Phi(std::size_t global, double z) const;
  double PhiGrad(std::size_t global, double z) const;
  /// phi*(-alpha); requires b * alpha in [0, 1].
  double PhiConjugateAtNegative(std::size_t global, double alpha) const;

  double G(std::span<const double> x) const;
  /// grad g*(u): soft-threshold at c.
  Vec GStarGrad(std::span<const double> u) const;
  /// g*(u) = ||soft(u, c)||^2 / 2.
  double GStar(std::span<const double> u) const;

  /// 1/(lambda N) sum_j a_j alpha_j.
  Vec DualAggregate(std::span<const double> alpha) const;

  /// Throws InfeasibleDualError naming the first block with
  /// b * alpha outside [-slack, 1 + slack].
  void CheckFeasible(std::span<const double> alpha, double slack = 1e-12) const;

  double DualValue(std::span<const double> alpha) const;
  double PrimalValue(std::span<const double> x) const { return primal_.PrimalValue(x); }

 private:
  Problem primal_;
  double lambda_;
  double l1_ratio_;
};

}  // namespace ecvr

#endif  // ECVR_PROBLEM_HPP_
