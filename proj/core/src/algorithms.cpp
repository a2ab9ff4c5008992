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

#include "ecvr/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecvr {

namespace {

std::vector<RngStream> NodeStreams(std::uint64_t seed, std::size_t n, StreamPurpose purpose) {
  std::vector<RngStream> out;
  out.reserve(n);
  for (std::size_t t = 0; t < n; ++t) out.push_back(RngStream::Split(seed, t, purpose));
  return out;
}

Vec InitialPoint(const Problem& problem, std::optional<Vec> x0) {
  if (!x0) return Vec(problem.dim(), 0.0);
  if (x0->size() != problem.dim()) throw std::invalid_argument("x0 has wrong dimension");
  return std::move(*x0);
}

void RequireContraction(const CompressorSpec& q, std::size_t d, const char* role) {
  if (!q.IsContraction())
    throw std::invalid_argument(std::string(role) + " must be a contraction compressor, got " +
                                q.ToString());
  q.Validate(d);
}

Vec NodeMean(const std::vector<Vec>& per_node) {
  Vec mean(per_node.front().size(), 0.0);
  for (const Vec& v : per_node) Axpy(1.0, v, mean);
  const double inv = 1.0 / static_cast<double>(per_node.size());
  for (double& v : mean) v *= inv;
  return mean;
}

// |e_new + y - t| with t = e_old + step, coordinate max.
double ConservationResidual(std::span<const double> e_new, std::span<const double> y,
                            std::span<const double> t) {
  double r = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) r = std::max(r, std::abs(e_new[i] + y[i] - t[i]));
  return r;
}

void CheckFinite(std::span<const double> v, const char* what, std::size_t iteration) {
  if (!AllFinite(v)) throw NumericalError(std::string("non-finite value in ") + what, iteration);
}

}  // namespace

// ---------------------------------------------------------------------------

EcLsvrg::EcLsvrg(const Problem& problem, LsvrgOptions options, std::uint64_t seed,
                 std::optional<Vec> x0)
    : problem_(problem),
      eta_(options.eta),
      q_(options.q),
      q1_(options.q1),
      coin_rng_(RngStream::Split(seed, 0, StreamPurpose::kCoin)) {
  const std::size_t d = problem.dim();
  const std::size_t n = problem.nodes();
  RequireContraction(q_, d, "Q");
  RequireContraction(q1_, d, "Q1");
  if (!(eta_ >= 0.0) || !std::isfinite(eta_)) throw std::invalid_argument("eta must be >= 0");
  p_ = options.p.value_or(DeltaOf(q_, d));
  if (!(p_ > 0.0 && p_ <= 1.0)) throw std::invalid_argument("p must lie in (0, 1]");
  bits_per_step_ = static_cast<double>(n) * (BitCost(q_, d) + BitCost(q1_, d) + 1.0);

  x_ = InitialPoint(problem, std::move(x0));
  w_ = x_;
  grad_w_.resize(n);
  RefreshReferenceGradients();
  h_node_ = options.zero_shift_init ? std::vector<Vec>(n, Vec(d, 0.0)) : grad_w_;
  h_ = NodeMean(h_node_);
  e_node_.assign(n, Vec(d, 0.0));
  sample_rng_ = NodeStreams(seed, n, StreamPurpose::kSample);
  q_rng_ = NodeStreams(seed, n, StreamPurpose::kCompressQ);
  q1_rng_ = NodeStreams(seed, n, StreamPurpose::kCompressQ1);
}

void EcLsvrg::RefreshReferenceGradients() {
  for (std::size_t t = 0; t < problem_.nodes(); ++t) grad_w_[t] = problem_.NodeGradient(w_, t);
}

double EcLsvrg::EpochsPerStep() const {
  return 1.0 / static_cast<double>(problem_.per_node());
}

std::optional<double> EcLsvrg::ConstantBitsPerStep() const { return bits_per_step_; }

double EcLsvrg::ErrorNorm() const { return Norm(NodeMean(e_node_)); }

void EcLsvrg::Step() {
  const std::size_t d = problem_.dim();
  const std::size_t n = problem_.nodes();
  const std::size_t m = problem_.per_node();
  const double inv_n = 1.0 / static_cast<double>(n);

  Vec y_sum(d, 0.0), z_sum(d, 0.0), g_sum(d, 0.0);
  Vec shadow_before;
  if (check_invariants_) {
    diag_ = StepDiagnostics{};
    shadow_before = x_;
    Axpy(-1.0, NodeMean(e_node_), shadow_before);
  }

  Vec g(d), t(d), shift_gap(d);
  for (std::size_t node = 0; node < n; ++node) {
    const std::size_t i = sample_rng_[node].Index(m);
    // g = grad f_i(x) - grad f_i(w) + grad f(w) - h
    std::fill(g.begin(), g.end(), 0.0);
    problem_.AddExampleGradient(node, i, x_, 1.0, g);
    problem_.AddExampleGradient(node, i, w_, -1.0, g);
    for (std::size_t k = 0; k < d; ++k) g[k] += grad_w_[node][k] - h_node_[node][k];

    Vec& e = e_node_[node];
    for (std::size_t k = 0; k < d; ++k) t[k] = e[k] + eta_ * g[k];
    const CompressedVector y = Compress(q_, t, q_rng_[node]);
    for (std::size_t k = 0; k < d; ++k) e[k] = t[k] - y.values[k];
    if (check_invariants_) {
      diag_.conservation = std::max(diag_.conservation, ConservationResidual(e, y.values, t));
      Axpy(1.0, g, g_sum);
    }

    Vec& h_tau = h_node_[node];
    for (std::size_t k = 0; k < d; ++k) shift_gap[k] = grad_w_[node][k] - h_tau[k];
    const CompressedVector z = Compress(q1_, shift_gap, q1_rng_[node]);
    Axpy(1.0, z.values, h_tau);

    Axpy(1.0, y.values, y_sum);
    Axpy(1.0, z.values, z_sum);
  }
  // Only node 1 flips the refresh coin; the others send u = 0.
  last_refresh_ = coin_rng_.Bernoulli(p_);

  Vec x_half(d);
  for (std::size_t k = 0; k < d; ++k) x_half[k] = x_[k] - (y_sum[k] * inv_n + eta_ * h_[k]);
  Vec x_next = problem_.ProxRegularizer(x_half, eta_);

  if (check_invariants_) {
    Vec shadow_after = x_next;
    Axpy(-1.0, NodeMean(e_node_), shadow_after);
    double worst = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double subgrad = eta_ > 0.0 ? (x_half[k] - x_next[k]) / eta_ : 0.0;
      const double expected = shadow_before[k] - eta_ * (g_sum[k] * inv_n + h_[k] + subgrad);
      worst = std::max(worst, std::abs(shadow_after[k] - expected));
    }
    diag_.shadow_recursion = worst / std::max(1.0, MaxAbs(shadow_before));
  }

  if (last_refresh_) {
    w_ = x_;
    RefreshReferenceGradients();
  }
  for (std::size_t k = 0; k < d; ++k) h_[k] += z_sum[k] * inv_n;
  x_ = std::move(x_next);

  ++iteration_;
  bits_ += bits_per_step_;
  if (check_invariants_) diag_.h_average = MaxAbsDiff(h_, NodeMean(h_node_));
  CheckFinite(x_, "x", iteration_);
  CheckFinite(h_, "h", iteration_);
  for (const Vec& e : e_node_) CheckFinite(e, "e", iteration_);
}

// ---------------------------------------------------------------------------

Lsvrg::Lsvrg(const Problem& problem, double eta, double p, std::uint64_t seed,
             std::optional<Vec> x0)
    : problem_(problem),
      eta_(eta),
      p_(p),
      coin_rng_(RngStream::Split(seed, 0, StreamPurpose::kCoin)) {
  if (!(eta_ >= 0.0) || !std::isfinite(eta_)) throw std::invalid_argument("eta must be >= 0");
  if (!(p_ > 0.0 && p_ <= 1.0)) throw std::invalid_argument("p must lie in (0, 1]");
  x_ = InitialPoint(problem, std::move(x0));
  w_ = x_;
  grad_w_.resize(problem.nodes());
  for (std::size_t t = 0; t < problem.nodes(); ++t) grad_w_[t] = problem.NodeGradient(w_, t);
  sample_rng_ = NodeStreams(seed, problem.nodes(), StreamPurpose::kSample);
}

double Lsvrg::EpochsPerStep() const { return 1.0 / static_cast<double>(problem_.per_node()); }

void Lsvrg::Step() {
  const std::size_t d = problem_.dim();
  const std::size_t n = problem_.nodes();
  const std::size_t m = problem_.per_node();
  Vec dir(d, 0.0);
  for (std::size_t node = 0; node < n; ++node) {
    const std::size_t i = sample_rng_[node].Index(m);
    problem_.AddExampleGradient(node, i, x_, 1.0, dir);
    problem_.AddExampleGradient(node, i, w_, -1.0, dir);
    Axpy(1.0, grad_w_[node], dir);
  }
  const bool refresh = coin_rng_.Bernoulli(p_);
  const double scale = eta_ / static_cast<double>(n);
  Vec x_half = x_;
  Axpy(-scale, dir, x_half);
  Vec x_next = problem_.ProxRegularizer(x_half, eta_);
  // Dense direction plus flag from every node; a refresh also exchanges the
  // new node gradients.
  const double dense = 64.0 * static_cast<double>(d);
  bits_ += static_cast<double>(n) * (dense + 1.0 + (refresh ? dense : 0.0));
  if (refresh) {
    w_ = x_;
    for (std::size_t t = 0; t < n; ++t) grad_w_[t] = problem_.NodeGradient(w_, t);
  }
  x_ = std::move(x_next);
  ++iteration_;
  CheckFinite(x_, "x", iteration_);
}

// ---------------------------------------------------------------------------

namespace {

void CheckTheta(double theta, std::size_t m) {
  const double limit = 1.0 / static_cast<double>(m);
  if (!(theta > 0.0) || theta > limit * (1.0 + 1e-12))
    throw std::invalid_argument("theta must lie in (0, 1/m]");
}

Vec NextPrimal(const DualProblem& problem, DualVariant variant, double theta,
               std::span<const double> x, std::span<const double> u) {
  Vec grad = problem.GStarGrad(u);
  if (variant == DualVariant::kSdca) return grad;
  Vec out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = (1.0 - theta) * x[k] + theta * grad[k];
  return out;
}

double FeasibilityExcursion(double b_alpha) {
  return std::max({0.0, -b_alpha, b_alpha - 1.0});
}

}  // namespace

EcDual::EcDual(const DualProblem& problem, DualOptions options, std::uint64_t seed)
    : problem_(problem), theta_(options.theta), variant_(options.variant), q_(options.q) {
  const Problem& primal = problem.primal();
  const std::size_t d = primal.dim();
  const std::size_t n = primal.nodes();
  CheckTheta(theta_, primal.per_node());
  RequireContraction(q_, d, "Q");
  bits_per_step_ = static_cast<double>(n) * BitCost(q_, d);
  alpha_.assign(primal.examples(), 0.0);
  x_.assign(d, 0.0);
  u_.assign(d, 0.0);  // 1/(lambda N) sum a alpha^0 with alpha^0 = 0
  e_node_.assign(n, Vec(d, 0.0));
  sample_rng_ = NodeStreams(seed, n, StreamPurpose::kSample);
  q_rng_ = NodeStreams(seed, n, StreamPurpose::kCompressQ);
}

double EcDual::EpochsPerStep() const {
  return 1.0 / static_cast<double>(problem_.primal().per_node());
}

double EcDual::ErrorNorm() const { return Norm(NodeMean(e_node_)); }

void EcDual::Step() {
  const Problem& primal = problem_.primal();
  const std::size_t d = primal.dim();
  const std::size_t n = primal.nodes();
  const std::size_t m = primal.per_node();
  const double md = static_cast<double>(m);
  const double inc_scale = 1.0 / (problem_.lambda() * md);
  if (check_invariants_) diag_ = StepDiagnostics{};

  Vec x_next = NextPrimal(problem_, variant_, theta_, x_, u_);
  Vec y_sum(d, 0.0), t(d);
  for (std::size_t node = 0; node < n; ++node) {
    const std::size_t i = sample_rng_[node].Index(m);
    const std::size_t j = primal.partition().Global(node, i);
    const SparseColumn a = primal.Example(j);
    const double delta_alpha =
        -theta_ * md * (alpha_[j] + problem_.PhiGrad(j, a.Dot(x_next)));
    alpha_[j] += delta_alpha;

    const double b_alpha = primal.Label(j) * alpha_[j];
    const double excursion = FeasibilityExcursion(b_alpha);
    if (excursion > 1e-12)
      throw InfeasibleDualError("dual block " + std::to_string(j) +
                                    " left the feasible interval at iteration " +
                                    std::to_string(iteration_ + 1),
                                j);
    if (check_invariants_) diag_.feasibility = std::max(diag_.feasibility, excursion);

    Vec& e = e_node_[node];
    t = e;
    a.AddTo(inc_scale * delta_alpha, t);
    const CompressedVector y = Compress(q_, t, q_rng_[node]);
    for (std::size_t k = 0; k < d; ++k) e[k] = t[k] - y.values[k];
    if (check_invariants_)
      diag_.conservation = std::max(diag_.conservation, ConservationResidual(e, y.values, t));
    Axpy(1.0, y.values, y_sum);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < d; ++k) u_[k] += y_sum[k] * inv_n;
  x_ = std::move(x_next);

  ++iteration_;
  bits_ += bits_per_step_;
  if (check_invariants_) {
    Vec lhs = u_;
    Axpy(1.0, NodeMean(e_node_), lhs);
    diag_.dual_aggregate =
        MaxAbsDiff(lhs, problem_.DualAggregate(alpha_)) / (1.0 + MaxAbs(alpha_));
  }
  CheckFinite(x_, "x", iteration_);
  CheckFinite(u_, "u", iteration_);
  CheckFinite(alpha_, "alpha", iteration_);
}

Dual::Dual(const DualProblem& problem, double theta, DualVariant variant, std::uint64_t seed)
    : problem_(problem), theta_(theta), variant_(variant) {
  const Problem& primal = problem.primal();
  CheckTheta(theta_, primal.per_node());
  bits_per_step_ = static_cast<double>(primal.nodes()) * 64.0 * static_cast<double>(primal.dim());
  alpha_.assign(primal.examples(), 0.0);
  x_.assign(primal.dim(), 0.0);
  u_.assign(primal.dim(), 0.0);
  sample_rng_ = NodeStreams(seed, primal.nodes(), StreamPurpose::kSample);
}

double Dual::EpochsPerStep() const {
  return 1.0 / static_cast<double>(problem_.primal().per_node());
}

void Dual::Step() {
  const Problem& primal = problem_.primal();
  const std::size_t m = primal.per_node();
  const double md = static_cast<double>(m);
  const double u_scale = 1.0 / (problem_.lambda() * static_cast<double>(primal.examples()));

  Vec x_next = NextPrimal(problem_, variant_, theta_, x_, u_);
  for (std::size_t node = 0; node < primal.nodes(); ++node) {
    const std::size_t i = sample_rng_[node].Index(m);
    const std::size_t j = primal.partition().Global(node, i);
    const SparseColumn a = primal.Example(j);
    const double delta_alpha =
        -theta_ * md * (alpha_[j] + problem_.PhiGrad(j, a.Dot(x_next)));
    alpha_[j] += delta_alpha;
    a.AddTo(u_scale * delta_alpha, u_);
  }
  x_ = std::move(x_next);
  ++iteration_;
  bits_ += bits_per_step_;
  CheckFinite(x_, "x", iteration_);
}

// ---------------------------------------------------------------------------

EcGd::EcGd(const Problem& problem, double eta, CompressorSpec q, std::uint64_t seed,
           std::optional<Vec> x0)
    : problem_(problem), eta_(eta), q_(std::move(q)) {
  const std::size_t d = problem.dim();
  RequireContraction(q_, d, "Q");
  if (!(eta_ >= 0.0) || !std::isfinite(eta_)) throw std::invalid_argument("eta must be >= 0");
  bits_per_step_ = static_cast<double>(problem.nodes()) * BitCost(q_, d);
  x_ = InitialPoint(problem, std::move(x0));
  e_node_.assign(problem.nodes(), Vec(d, 0.0));
  q_rng_ = NodeStreams(seed, problem.nodes(), StreamPurpose::kCompressQ);
}

double EcGd::ErrorNorm() const { return Norm(NodeMean(e_node_)); }

void EcGd::Step() {
  const std::size_t d = problem_.dim();
  const std::size_t n = problem_.nodes();
  if (check_invariants_) diag_ = StepDiagnostics{};
  Vec y_sum(d, 0.0), t(d);
  for (std::size_t node = 0; node < n; ++node) {
    const Vec g = problem_.NodeGradient(x_, node);
    Vec& e = e_node_[node];
    for (std::size_t k = 0; k < d; ++k) t[k] = e[k] + eta_ * g[k];
    const CompressedVector y = Compress(q_, t, q_rng_[node]);
    for (std::size_t k = 0; k < d; ++k) e[k] = t[k] - y.values[k];
    if (check_invariants_)
      diag_.conservation = std::max(diag_.conservation, ConservationResidual(e, y.values, t));
    Axpy(1.0, y.values, y_sum);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  Vec x_half(d);
  for (std::size_t k = 0; k < d; ++k) x_half[k] = x_[k] - y_sum[k] * inv_n;
  x_ = problem_.ProxRegularizer(x_half, eta_);
  ++iteration_;
  bits_ += bits_per_step_;
  CheckFinite(x_, "x", iteration_);
}

// ---------------------------------------------------------------------------

WeightedAverager::WeightedAverager(double rate) : decay_(1.0 - rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("rate must lie in [0, 1)");
}

void WeightedAverager::Add(std::span<const double> x) {
  if (count_ == 0) {
    avg_.assign(x.begin(), x.end());
    norm_ = 1.0;
  } else {
    if (x.size() != avg_.size()) throw std::invalid_argument("iterate dimension changed");
    // W_k / w_k = 1 + (1 - rate) W_{k-1} / w_{k-1}
    norm_ = 1.0 + decay_ * norm_;
    const double step = 1.0 / norm_;
    for (std::size_t i = 0; i < x.size(); ++i) avg_[i] += step * (x[i] - avg_[i]);
  }
  ++count_;
}

Vec WeightedAverage(const std::vector<Vec>& history, double rate) {
  if (history.empty()) throw std::invalid_argument("history must be nonempty");
  WeightedAverager avg(rate);
  for (const Vec& x : history) avg.Add(x);
  return avg.value();
}

}  // namespace ecvr
