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


#include <cmath>
#include <limits>
#include <string>

#include "doctest.h"
#include "ecvr/algorithms.hpp"
#include "test_util.hpp"

using namespace ecvr;
using namespace ecvr::testing;

TEST_CASE("identity EC-LSVRG retraces vanilla L-SVRG") {
  const Problem p = SmallProblem();
  LsvrgOptions o;
  o.eta = 0.5;
  o.p = 0.2;
  EcLsvrg ec(p, o, 17);
  Lsvrg plain(p, 0.5, 0.2, 17);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    ec.Step();
    plain.Step();
    worst = std::max(worst, MaxAbsDiff(ec.x(), plain.x()));
    CHECK(ec.ErrorNorm() == 0.0);
  }
  CHECK(worst <= 1e-12);
  CHECK(MaxAbsDiff(ec.w(), plain.w()) <= 1e-12);
}

TEST_CASE("identity EC-Quartz / EC-SDCA retrace the vanilla methods") {
  const DualProblem dp(SmallProblem(1e-3, 1e-2));
  for (DualVariant v : {DualVariant::kQuartz, DualVariant::kSdca}) {
    DualOptions o;
    o.theta = 0.05;
    o.variant = v;
    EcDual ec(dp, o, 5);
    Dual plain(dp, 0.05, v, 5);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      ec.Step();
      plain.Step();
      worst = std::max({worst, MaxAbsDiff(ec.x(), plain.x()),
                        MaxAbsDiff(*ec.alpha(), *plain.alpha())});
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("eta = 0 leaves x fixed") {
  const Problem p = SmallProblem();
  LsvrgOptions o;
  o.eta = 0.0;
  o.q = o.q1 = CompressorSpec::TopK(2);
  RngStream rng(1);
  const Vec x0 = RandomVec(p.dim(), rng);
  EcLsvrg ec(p, o, 3, x0);
  for (int k = 0; k < 20; ++k) ec.Step();
  CHECK(ec.x() == x0);
}

TEST_CASE("one EC-LSVRG step by hand on a d = 2 fixture") {
  // a1 = (1, 0), a2 = (1, 1), both labels +1, one node, h^0 = 0, Top1 for Q and Q1.
  // At x = w = 0: grad f_i(0) = -a_i / 2, grad f(0) = (-1/2, -1/4), g = grad f(0).
  //   t = eta g = (-1/4, -1/8)  ->  y = (-1/4, 0),  e = (0, -1/8)
  //   z = Top1(grad f(0) - 0) = (-1/2, 0)  ->  h_1 = (-1/2, 0)
  //   x_half = 0 - (y + eta * 0) = (1/4, 0)
  //   x1 = soft(1/4, eta lambda1) / (1 + eta lambda2) = 0.2 / 1.1
  const Problem p = MakeProblem(MakeDataset(2, {{{1.0, 0.0}, 1.0}, {{1.0, 1.0}, 1.0}}), 1, 0.1,
                                0.2);
  LsvrgOptions o;
  o.eta = 0.5;
  o.p = 0.5;
  o.q = o.q1 = CompressorSpec::TopK(1);
  o.zero_shift_init = true;
  EcLsvrg ec(p, o, 9);
  ec.Step();
  CHECK(ec.x()[0] == doctest::Approx(0.2 / 1.1).epsilon(1e-15));
  CHECK(ec.x()[1] == 0.0);
  CHECK(ec.e_node(0) == Vec{0.0, -0.125});
  CHECK(ec.h_node(0) == Vec{-0.5, 0.0});
  CHECK(ec.h() == Vec{-0.5, 0.0});
  CHECK(ec.w() == Vec{0.0, 0.0});  // either coin outcome copies x^0 = 0
  CHECK(ec.cumulative_bits() == (64.0 + 1.0) * 2.0 + 1.0);
}

TEST_CASE("single-example dual step sets alpha to -phi'(a^T x)") {
  // theta = 1/m = 1 with m = 1: x^1 = grad g*(u^0) = 0, alpha^1 = -phi'(0) = b / 2.
  const DualProblem dp(MakeProblem(MakeDataset(2, {{{0.6, -0.8}, -1.0}}), 1, 0.0, 0.3));
  for (DualVariant v : {DualVariant::kQuartz, DualVariant::kSdca}) {
    DualOptions o;
    o.theta = 1.0;
    o.variant = v;
    o.q = CompressorSpec::TopK(1);
    EcDual ec(dp, o, 2);
    ec.Step();
    CHECK((*ec.alpha())[0] == -dp.PhiGrad(0, 0.0));
    CHECK((*ec.alpha())[0] == -0.5);
    // increment (1/(lambda m)) a dalpha = (-1, 4/3); Top1 keeps the second entry
    CHECK(ec.u()[0] == 0.0);
    CHECK(ec.u()[1] == doctest::Approx(-0.5 * -0.8 / 0.3));
    CHECK(ec.e_node(0)[0] == doctest::Approx(-0.5 * 0.6 / 0.3));
  }
}

TEST_CASE("the u-tilde identity holds at k = 0 and along the run") {
  const DualProblem dp(SmallProblem(1e-3, 1e-2));
  DualOptions o;
  o.theta = 0.05;
  o.q = CompressorSpec::TopK(1);
  EcDual ec(dp, o, 4);
  CHECK(MaxAbs(ec.u()) == 0.0);
  CHECK(MaxAbs(dp.DualAggregate(*ec.alpha())) == 0.0);
  ec.set_check_invariants(true);
  for (int k = 0; k < 300; ++k) {
    ec.Step();
    REQUIRE(ec.diagnostics().dual_aggregate <= 1e-10);
    REQUIRE(ec.diagnostics().feasibility <= 1e-12);
    REQUIRE(ec.diagnostics().conservation == 0.0);
  }
  CHECK(ec.cumulative_bits() == 300.0 * 4.0 * (64.0 + 3.0));
}

TEST_CASE("EC-LSVRG step identities") {
  const Problem p = SmallProblem();
  for (const std::string q : {"top_k:1", "rand_k:2", "ntop_k:2", "dither"}) {
    LsvrgOptions o;
    o.eta = 0.3;
    o.q = o.q1 = CompressorSpec::Parse(q);
    EcLsvrg ec(p, o, 8);
    ec.set_check_invariants(true);
    INFO(q);
    const double per_step = 4.0 * (2.0 * BitCost(o.q, p.dim()) + 1.0);
    CHECK(*ec.ConstantBitsPerStep() == per_step);
    for (int k = 1; k <= 300; ++k) {
      ec.Step();
      const StepDiagnostics& d = ec.diagnostics();
      REQUIRE(d.h_average <= 1e-12);
      REQUIRE(d.shadow_recursion <= 1e-10);
      REQUIRE(d.conservation <= 4.0 * std::numeric_limits<double>::epsilon());
      if (per_step == std::floor(per_step))
        REQUIRE(ec.cumulative_bits() == k * per_step);
      else
        REQUIRE(ec.cumulative_bits() == doctest::Approx(k * per_step).epsilon(1e-12));
    }
  }
}

TEST_CASE("top_k conservation is exact") {
  const Problem p = SmallProblem();
  LsvrgOptions o;
  o.eta = 0.3;
  o.q = o.q1 = CompressorSpec::TopK(1);
  EcLsvrg ec(p, o, 8);
  ec.set_check_invariants(true);
  for (int k = 0; k < 300; ++k) {
    ec.Step();
    REQUIRE(ec.diagnostics().conservation == 0.0);
  }
}

TEST_CASE("EC-GD with identity is proximal gradient descent") {
  const Problem p = SmallProblem(1e-2, 1e-2);
  EcGd gd(p, 0.7, CompressorSpec::Identity(), 1);
  Vec x(p.dim(), 0.0);
  for (int k = 0; k < 30; ++k) {
    Vec step = x;
    Axpy(-0.7, p.FullGradient(x), step);
    x = p.ProxRegularizer(step, 0.7);
    gd.Step();
    CHECK(MaxAbsDiff(gd.x(), x) <= 1e-13);
  }
  CHECK(gd.EpochsPerStep() == 1.0);
}

TEST_CASE("EC-GD stays at a point where every node gradient vanishes") {
  // each node holds (a, +1) and (-a, +1): grad f^(tau)(0) = 0
  const Problem p = MakeProblem(MakeDataset(3, {{{1.0, 2.0, 0.0}, 1.0},
                                                {{-1.0, -2.0, 0.0}, 1.0},
                                                {{0.0, 1.0, -1.0}, 1.0},
                                                {{0.0, -1.0, 1.0}, 1.0}}),
                                2, 0.0, 0.1);
  EcGd gd(p, 0.5, CompressorSpec::TopK(1), 1);
  for (int k = 0; k < 10; ++k) gd.Step();
  CHECK(MaxAbs(gd.x()) == 0.0);
  CHECK(gd.ErrorNorm() == 0.0);
}

TEST_CASE("non-finite iterates abort with the iteration number") {
  const Problem p = SmallProblem();
  Vec bad(p.dim(), 0.0);
  bad[0] = std::numeric_limits<double>::quiet_NaN();
  LsvrgOptions o;
  o.eta = 0.1;
  EcLsvrg ec(p, o, 1, bad);
  std::size_t at = 0;
  try {
    ec.Step();
  } catch (const NumericalError& e) {
    at = e.iteration();
  }
  CHECK(at == 1);
}

TEST_CASE("bad parameters are rejected") {
  const Problem p = SmallProblem();
  const DualProblem dp(p);
  LsvrgOptions o;
  o.eta = -1.0;
  CHECK_THROWS_AS(EcLsvrg(p, o, 1), std::invalid_argument);
  o.eta = 0.1;
  o.p = 0.0;
  CHECK_THROWS_AS(EcLsvrg(p, o, 1), std::invalid_argument);
  o.p = std::nullopt;
  o.q = CompressorSpec::NaturalCompression();  // unbiased, not a contraction
  CHECK_THROWS_AS(EcLsvrg(p, o, 1), std::invalid_argument);
  DualOptions d;
  d.theta = 1.0 / p.per_node() * 1.01;
  CHECK_THROWS_AS(EcDual(dp, d, 1), std::invalid_argument);
  d.theta = 0.0;
  CHECK_THROWS_AS(EcDual(dp, d, 1), std::invalid_argument);
}

TEST_CASE("default refresh probability is delta") {
  const Problem p = SmallProblem();
  LsvrgOptions o;
  o.eta = 0.1;
  o.q = CompressorSpec::TopK(2);
  EcLsvrg ec(p, o, 1);
  CHECK(ec.p() == doctest::Approx(2.0 / p.dim()));
}

TEST_CASE("same seed, same trajectory; different seed, different one") {
  const Problem p = SmallProblem();
  LsvrgOptions o;
  o.eta = 0.3;
  o.q = o.q1 = CompressorSpec::RandK(2);
  EcLsvrg a(p, o, 5), b(p, o, 5), c(p, o, 6);
  for (int k = 0; k < 50; ++k) {
    a.Step();
    b.Step();
    c.Step();
  }
  CHECK(a.x() == b.x());
  CHECK_FALSE(a.x() == c.x());
}

TEST_CASE("weighted average") {
  const Vec x0 = {1.0, 2.0}, x1 = {4.0, -1.0}, x2 = {0.0, 3.0};
  CHECK(WeightedAverage({x0}, 0.3) == x0);
  const Vec plain = WeightedAverage({x0, x1, x2}, 0.0);
  CHECK(plain[0] == doctest::Approx(5.0 / 3.0));
  CHECK(plain[1] == doctest::Approx(4.0 / 3.0));
  const Vec half = WeightedAverage({x0, x1}, 0.5);
  CHECK(half[0] == doctest::Approx((1.0 + 8.0) / 3.0));
  CHECK(half[1] == doctest::Approx((2.0 - 2.0) / 3.0));

  // direct weights (1 - rho)^{-i} over a long history
  RngStream rng(3);
  std::vector<Vec> hist;
  for (int i = 0; i < 60; ++i) hist.push_back(RandomVec(3, rng));
  const double rho = 0.1;
  Vec num(3, 0.0);
  double den = 0.0;
  for (int i = 0; i < 60; ++i) {
    const double w = std::pow(1.0 - rho, -i);
    Axpy(w, hist[i], num);
    den += w;
  }
  const Vec avg = WeightedAverage(hist, rho);
  for (int k = 0; k < 3; ++k) CHECK(avg[k] == doctest::Approx(num[k] / den).epsilon(1e-12));

  // huge histories stay finite
  WeightedAverager big(0.5);
  for (int i = 0; i < 5000; ++i) big.Add(x0);
  CHECK(big.value() == x0);
  CHECK_THROWS_AS(WeightedAverage({}, 0.1), std::invalid_argument);
}
