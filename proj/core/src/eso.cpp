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

#include "ecvr/eso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ecvr/problem.hpp"
#include "ecvr/vec.hpp"

namespace ecvr {

double EsoBound(const CscMatrix& a, const Partition& partition, std::span<const double> h) {
  const std::size_t big_n = partition.retained();
  if (h.size() != big_n) throw std::invalid_argument("h must have one entry per example");
  double r_max_sq = 0.0;
  for (std::size_t j = 0; j < big_n; ++j) r_max_sq = std::max(r_max_sq, a.Column(j).SquaredNorm());
  const PowerIterationResult top = GramLambdaMax(a, 0, big_n, 1e-14, 100000);
  const double r_sq = top.value / static_cast<double>(big_n);
  const double v = r_max_sq + static_cast<double>(partition.nodes) * r_sq;
  return v / static_cast<double>(partition.per_node) * SquaredNorm(h);
}

EsoReport EsoCheck(const CscMatrix& a, const Partition& partition, std::span<const double> h,
                   std::size_t trials, RngStream& rng) {
  if (trials == 0) throw std::invalid_argument("ESO check needs at least one trial");
  EsoReport r;
  r.trials = trials;
  r.rhs = EsoBound(a, partition, h);

  Vec ah(a.rows());
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::fill(ah.begin(), ah.end(), 0.0);
    for (std::size_t node = 0; node < partition.nodes; ++node) {
      const std::size_t i = partition.Global(node, rng.Index(partition.per_node));
      a.Column(i).AddTo(h[i], ah);
    }
    const double s = SquaredNorm(ah);
    sum += s;
    sum_sq += s * s;
  }
  const double nt = static_cast<double>(trials);
  r.lhs = sum / nt;
  const double var = trials > 1 ? std::max(0.0, (sum_sq - nt * r.lhs * r.lhs) / (nt - 1.0)) : 0.0;
  r.lhs_se = std::sqrt(var / nt);
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : (r.lhs > 0.0 ? INFINITY : 0.0);
  r.ratio_se = r.rhs > 0.0 ? r.lhs_se / r.rhs : 0.0;
  r.passed = r.ratio <= 1.0 + 3.0 * r.ratio_se;
  return r;
}

EsoReport EsoCheck(const CscMatrix& a, const Partition& partition, std::size_t trials,
                   RngStream& rng) {
  Vec h(partition.retained());
  for (double& v : h) v = rng.Normal();
  return EsoCheck(a, partition, h, trials, rng);
}

CscMatrix RandomGaussianMatrix(std::size_t d, std::size_t cols, RngStream& rng) {
  CscMatrix a(d);
  for (std::size_t j = 0; j < cols; ++j) {
    std::vector<std::pair<std::uint32_t, double>> entries;
    entries.reserve(d);
    for (std::size_t i = 0; i < d; ++i)
      entries.emplace_back(static_cast<std::uint32_t>(i), rng.Normal());
    a.AppendColumn(std::move(entries));
  }
  return a;
}

}  // namespace ecvr
