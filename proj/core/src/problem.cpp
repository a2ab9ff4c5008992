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

#include "ecvr/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ecvr/rng.hpp"

namespace ecvr {

ObjectiveMode ParseObjectiveMode(const std::string& s) {
  if (s == "composite") return ObjectiveMode::kComposite;
  if (s == "smooth") return ObjectiveMode::kSmooth;
  throw std::invalid_argument("mode must be composite or smooth, got '" + s + "'");
}

std::string ToString(ObjectiveMode mode) {
  return mode == ObjectiveMode::kComposite ? "composite" : "smooth";
}

double Log1pExp(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double Sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

constexpr std::uint64_t kPowerIterationSeed = 0x5eed'0f'9a'11ULL;

void GramApply(const CscMatrix& a, std::size_t begin, std::size_t end,
               std::span<const double> v, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t j = begin; j < end; ++j) {
    const SparseColumn c = a.Column(j);
    c.AddTo(c.Dot(v), out);
  }
}

double SoftThreshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

PowerIterationResult GramLambdaMax(const CscMatrix& a, std::size_t begin, std::size_t end,
                                   double rel_tol, std::size_t max_iter) {
  const std::size_t d = a.rows();
  PowerIterationResult res;
  if (d == 0 || begin >= end) {
    res.converged = true;
    return res;
  }
  Vec v(d), w(d);
  for (std::uint64_t attempt = 0; attempt < 4; ++attempt) {
    RngStream rng(kPowerIterationSeed + attempt);
    for (double& x : v) x = rng.Normal();
    const double n0 = Norm(v);
    for (double& x : v) x /= n0;
    double lambda = 0.0;
    bool collapsed = false;
    for (std::size_t it = 1; it <= max_iter; ++it) {
      GramApply(a, begin, end, v, w);
      const double next = Dot(v, w);
      const double wn = Norm(w);
      res.iterations = it;
      if (wn == 0.0) {
        collapsed = true;
        break;
      }
      const bool done = it > 1 && std::abs(next - lambda) <= rel_tol * std::abs(next);
      lambda = next;
      if (done) {
        res.converged = true;
        break;
      }
      for (std::size_t i = 0; i < d; ++i) v[i] = w[i] / wn;
    }
    if (collapsed) continue;  // start vector in the null space; reseed
    res.value = lambda;
    GramApply(a, begin, end, v, w);
    double r = 0.0;
    for (std::size_t i = 0; i < d; ++i) r += (w[i] - lambda * v[i]) * (w[i] - lambda * v[i]);
    res.residual = std::sqrt(r);
    return res;
  }
  // Every restart collapsed: the operator is zero on these columns.
  res.value = 0.0;
  res.residual = 0.0;
  res.converged = true;
  return res;
}

Problem::Problem(std::shared_ptr<const Dataset> data, Partition partition, double lambda1,
                 double lambda2, ObjectiveMode mode)
    : data_(std::move(data)),
      partition_(partition),
      lambda1_(lambda1),
      lambda2_(lambda2),
      mode_(mode) {
  if (!data_) throw std::invalid_argument("problem needs a dataset");
  if (!(lambda1 >= 0.0)) throw std::invalid_argument("lambda1 must be >= 0");
  if (!(lambda2 > 0.0)) throw std::invalid_argument("lambda2 must be > 0");
  if (mode == ObjectiveMode::kSmooth && lambda1 != 0.0)
    throw std::invalid_argument("smooth mode requires lambda1 = 0");
  if (partition_.nodes == 0 || partition_.per_node == 0 ||
      partition_.retained() > data_->size())
    throw std::invalid_argument("partition does not fit the dataset");
}

double Problem::LossDerivative(std::size_t global, double margin) const {
  const double b = Label(global);
  return -b * Sigmoid(-b * margin);
}

void Problem::AddExampleGradient(std::size_t node, std::size_t local,
                                 std::span<const double> x, double scale,
                                 std::span<double> out) const {
  const std::size_t j = partition_.Global(node, local);
  const SparseColumn a = Example(j);
  a.AddTo(scale * LossDerivative(j, a.Dot(x)), out);
  if (mode_ == ObjectiveMode::kSmooth) Axpy(scale * lambda2_, x, out);
}

Vec Problem::ExampleGradient(std::span<const double> x, std::size_t node,
                             std::size_t local) const {
  if (node >= nodes() || local >= per_node())
    throw std::out_of_range("example (" + std::to_string(node) + ", " +
                            std::to_string(local) + ") out of range");
  Vec g(dim(), 0.0);
  AddExampleGradient(node, local, x, 1.0, g);
  return g;
}

Vec Problem::NodeGradient(std::span<const double> x, std::size_t node) const {
  if (node >= nodes()) throw std::out_of_range("node out of range");
  Vec g(dim(), 0.0);
  const double inv_m = 1.0 / static_cast<double>(per_node());
  for (std::size_t i = 0; i < per_node(); ++i) {
    const std::size_t j = partition_.Global(node, i);
    const SparseColumn a = Example(j);
    a.AddTo(inv_m * LossDerivative(j, a.Dot(x)), g);
  }
  if (mode_ == ObjectiveMode::kSmooth) Axpy(lambda2_, x, g);
  return g;
}

Vec Problem::FullGradient(std::span<const double> x) const {
  Vec g(dim(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(nodes());
  for (std::size_t t = 0; t < nodes(); ++t) Axpy(inv_n, NodeGradient(x, t), g);
  return g;
}

double Problem::ExampleValue(std::span<const double> x, std::size_t node,
                             std::size_t local) const {
  const std::size_t j = partition_.Global(node, local);
  double v = Log1pExp(-Label(j) * Example(j).Dot(x));
  if (mode_ == ObjectiveMode::kSmooth) v += 0.5 * lambda2_ * SquaredNorm(x);
  return v;
}

double Problem::SmoothValue(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t j = 0; j < examples(); ++j) s += Log1pExp(-Label(j) * Example(j).Dot(x));
  s /= static_cast<double>(examples());
  if (mode_ == ObjectiveMode::kSmooth) s += 0.5 * lambda2_ * SquaredNorm(x);
  return s;
}

double Problem::RegularizerValue(std::span<const double> x) const {
  if (mode_ == ObjectiveMode::kSmooth) return 0.0;
  double l1 = 0.0;
  for (double v : x) l1 += std::abs(v);
  return lambda1_ * l1 + 0.5 * lambda2_ * SquaredNorm(x);
}

double Problem::PrimalValue(std::span<const double> x) const {
  return SmoothValue(x) + RegularizerValue(x);
}

Vec Problem::ProxRegularizer(std::span<const double> v, double eta) const {
  Vec out(v.begin(), v.end());
  if (mode_ == ObjectiveMode::kSmooth) return out;
  const double t = eta * lambda1_;
  const double shrink = 1.0 / (1.0 + eta * lambda2_);
  for (double& x : out) x = SoftThreshold(x, t) * shrink;
  return out;
}

double Problem::GradientMappingNorm(std::span<const double> x, double eta) const {
  Vec step(x.begin(), x.end());
  Axpy(-eta, FullGradient(x), step);
  const Vec next = ProxRegularizer(step, eta);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - next[i]) * (x[i] - next[i]);
  return std::sqrt(s) / eta;
}

ProblemConstants Problem::ComputeConstants() const {
  ProblemConstants c;
  const CscMatrix& a = data_->features;
  double r_max_sq = 0.0;
  for (std::size_t j = 0; j < examples(); ++j)
    r_max_sq = std::max(r_max_sq, a.Column(j).SquaredNorm());
  c.r_max = std::sqrt(r_max_sq);

  auto lambda_max = [&](std::size_t begin, std::size_t end) {
    const PowerIterationResult r = GramLambdaMax(a, begin, end);
    if (!r.converged) {
      std::ostringstream msg;
      msg << "power iteration did not converge after " << r.iterations
          << " iterations (residual " << r.residual << ")";
      throw std::runtime_error(msg.str());
    }
    return r.value;
  };
  const double m = static_cast<double>(per_node());
  for (std::size_t t = 0; t < nodes(); ++t)
    c.r_bar_sq = std::max(c.r_bar_sq, lambda_max(partition_.begin(t), partition_.end(t)) / m);
  c.r_sq = lambda_max(0, examples()) / static_cast<double>(examples());

  // Logistic loss has curvature at most 1/4.
  const double extra = mode_ == ObjectiveMode::kSmooth ? lambda2_ : 0.0;
  c.L = r_max_sq / 4.0 + extra;
  c.L_bar = c.r_bar_sq / 4.0 + extra;
  c.L_f = c.r_sq / 4.0 + extra;
  c.mu = lambda2_;
  return c;
}

DualProblem::DualProblem(Problem primal)
    : primal_(std::move(primal)),
      lambda_(primal_.lambda2()),
      l1_ratio_(primal_.lambda1() / primal_.lambda2()) {}

double DualProblem::Phi(std::size_t global, double z) const {
  return Log1pExp(-primal_.Label(global) * z);
}

double DualProblem::PhiGrad(std::size_t global, double z) const {
  return primal_.LossDerivative(global, z);
}

double DualProblem::PhiConjugateAtNegative(std::size_t global, double alpha) const {
  double s = primal_.Label(global) * alpha;
  constexpr double kSlack = 1e-12;
  if (s < -kSlack || s > 1.0 + kSlack)
    throw InfeasibleDualError("dual block " + std::to_string(global) +
                                  " infeasible: b*alpha = " + std::to_string(s),
                              global);
  s = std::clamp(s, 0.0, 1.0);
  auto xlogx = [](double v) { return v > 0.0 ? v * std::log(v) : 0.0; };
  return xlogx(s) + xlogx(1.0 - s);
}

double DualProblem::G(std::span<const double> x) const {
  double l1 = 0.0;
  for (double v : x) l1 += std::abs(v);
  return 0.5 * SquaredNorm(x) + l1_ratio_ * l1;
}

Vec DualProblem::GStarGrad(std::span<const double> u) const {
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = SoftThreshold(u[i], l1_ratio_);
  return out;
}

double DualProblem::GStar(std::span<const double> u) const {
  return 0.5 * SquaredNorm(GStarGrad(u));
}

Vec DualProblem::DualAggregate(std::span<const double> alpha) const {
  Vec u(primal_.dim(), 0.0);
  const double scale = 1.0 / (lambda_ * static_cast<double>(primal_.examples()));
  for (std::size_t j = 0; j < primal_.examples(); ++j)
    if (alpha[j] != 0.0) primal_.Example(j).AddTo(scale * alpha[j], u);
  return u;
}

void DualProblem::CheckFeasible(std::span<const double> alpha, double slack) const {
  for (std::size_t j = 0; j < primal_.examples(); ++j) {
    const double s = primal_.Label(j) * alpha[j];
    if (s < -slack || s > 1.0 + slack)
      throw InfeasibleDualError("dual block " + std::to_string(j) +
                                    " infeasible: b*alpha = " + std::to_string(s),
                                j);
  }
}

double DualProblem::DualValue(std::span<const double> alpha) const {
  if (alpha.size() != primal_.examples())
    throw std::invalid_argument("dual vector has wrong length");
  CheckFeasible(alpha);
  double conj = 0.0;
  for (std::size_t j = 0; j < primal_.examples(); ++j)
    conj += PhiConjugateAtNegative(j, alpha[j]);
  const double n = static_cast<double>(primal_.examples());
  return -lambda_ * GStar(DualAggregate(alpha)) - conj / n;
}

}  // namespace ecvr
