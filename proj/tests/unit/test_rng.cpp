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
#include <set>
#include <vector>

#include "doctest.h"
#include "ecvr/rng.hpp"

using ecvr::RngStream;
using ecvr::StreamPurpose;

TEST_CASE("same seed gives the same stream") {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
}

TEST_CASE("split streams differ by node and purpose") {
  RngStream s1 = RngStream::Split(1, 0, StreamPurpose::kSample);
  RngStream s2 = RngStream::Split(1, 1, StreamPurpose::kSample);
  RngStream s3 = RngStream::Split(1, 0, StreamPurpose::kCoin);
  RngStream s4 = RngStream::Split(2, 0, StreamPurpose::kSample);
  const auto v1 = s1(), v2 = s2(), v3 = s3(), v4 = s4();
  CHECK(std::set<std::uint64_t>{v1, v2, v3, v4}.size() == 4);
  RngStream again = RngStream::Split(1, 0, StreamPurpose::kSample);
  CHECK(again() == v1);
}

TEST_CASE("uniform lies in [0, 1) and has mean 1/2") {
  RngStream rng(3);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // SE of the mean is sqrt(1/12 / n) ~ 6.5e-4
  CHECK(std::abs(sum / n - 0.5) < 4e-3);
}

TEST_CASE("index is in range and roughly uniform") {
  RngStream rng(5);
  const std::size_t k = 7;
  std::vector<int> counts(k, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const std::size_t v = rng.Index(k);
    REQUIRE(v < k);
    ++counts[v];
  }
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
  // chi-square with 6 dof: P(> 22.5) ~ 1e-3
  CHECK(chi2 < 22.5);
  CHECK(rng.Index(1) == 0);
}

TEST_CASE("normal draws have unit variance") {
  RngStream rng(9);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.Normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("bernoulli edge probabilities") {
  RngStream rng(11);
  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.Bernoulli(1.0));
    CHECK_FALSE(rng.Bernoulli(0.0));
  }
}
