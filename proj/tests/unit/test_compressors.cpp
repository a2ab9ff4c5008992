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


#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "doctest.h"
#include "ecvr/compressors.hpp"
#include "test_util.hpp"

using namespace ecvr;
using ecvr::testing::RandomVec;

TEST_CASE("top_k keeps the largest magnitudes, ties to the lowest index") {
  RngStream rng(1);
  const Vec x = {1.0, -3.0, 3.0, 2.0, 0.5};
  const CompressedVector y1 = Compress(CompressorSpec::TopK(1), x, rng);
  CHECK(y1.values == Vec{0.0, -3.0, 0.0, 0.0, 0.0});
  CHECK(y1.support == std::vector<std::size_t>{1});
  const CompressedVector y3 = Compress(CompressorSpec::TopK(3), x, rng);
  CHECK(y3.values == Vec{0.0, -3.0, 3.0, 2.0, 0.0});
  CHECK(y3.support == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("top_k per-vector contraction bound") {
  RngStream rng(2);
  for (int t = 0; t < 200; ++t) {
    const Vec x = RandomVec(30, rng);
    for (std::size_t k : {1, 4, 30}) {
      const Vec y = Compress(CompressorSpec::TopK(k), x, rng).values;
      double err = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) err += (x[i] - y[i]) * (x[i] - y[i]);
      CHECK(err <= (1.0 - static_cast<double>(k) / 30.0) * SquaredNorm(x) + 1e-12);
    }
  }
}

TEST_CASE("rand_k picks every K-subset uniformly") {
  // d = 4, K = 2 has 6 subsets, each with probability 1/6.
  RngStream rng(3);
  const Vec x = {1.0, 2.0, 3.0, 4.0};
  std::map<std::vector<std::size_t>, int> counts;
  const int trials = 60000;
  for (int t = 0; t < trials; ++t) {
    const CompressedVector y = Compress(CompressorSpec::RandK(2), x, rng);
    REQUIRE(y.support.size() == 2);
    for (std::size_t i : y.support) REQUIRE(y.values[i] == x[i]);
    ++counts[y.support];
  }
  REQUIRE(counts.size() == 6);
  double chi2 = 0.0;
  for (const auto& [s, c] : counts) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
  CHECK(chi2 < 20.5);  // 5 dof, P ~ 1e-3
}

TEST_CASE("rand_k_unbiased rescales by d/K") {
  RngStream rng(4);
  const Vec x = {1.0, 2.0, 3.0, 4.0, 5.0};
  const CompressedVector y = Compress(CompressorSpec::RandKUnbiased(2), x, rng);
  for (std::size_t i : y.support) CHECK(y.values[i] == doctest::Approx(2.5 * x[i]));
  CHECK(OmegaOf(CompressorSpec::RandKUnbiased(2), 5) == doctest::Approx(1.5));
}

TEST_CASE("natural compression rounds to a neighbouring power of two") {
  RngStream rng(5);
  const Vec x = {0.0, 1.0, -0.75, 3.0, 1e-3, -1024.0, 6.5};
  for (int t = 0; t < 50; ++t) {
    const Vec y = Compress(CompressorSpec::NaturalCompression(), x, rng).values;
    CHECK(y[0] == 0.0);
    CHECK(y[1] == 1.0);
    CHECK(y[5] == -1024.0);
    CHECK((y[2] == -0.5 || y[2] == -1.0));
    CHECK((y[3] == 2.0 || y[3] == 4.0));
    CHECK((y[6] == 4.0 || y[6] == 8.0));
    const double l = std::ldexp(1.0, -10), h = std::ldexp(1.0, -9);
    CHECK((y[4] == l || y[4] == h));
  }
}

TEST_CASE("dithering outputs multiples of ||x|| / s with the input's sign") {
  RngStream rng(6);
  const Vec x = RandomVec(16, rng);
  const double unit = Norm(x) / 4.0;
  for (int t = 0; t < 50; ++t) {
    const Vec y = Compress(CompressorSpec::RandomDithering(), x, rng).values;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double q = std::abs(y[i]) / unit;
      CHECK(std::abs(q - std::round(q)) < 1e-9);
      CHECK(std::abs(q - std::abs(x[i]) / unit) < 1.0 + 1e-9);
      if (y[i] != 0.0) CHECK(std::signbit(y[i]) == std::signbit(x[i]));
    }
  }
  const Vec zero(5, 0.0);
  CHECK(Compress(CompressorSpec::RandomDithering(), zero, rng).values == zero);
}

TEST_CASE("identity is exact") {
  RngStream rng(7);
  const Vec x = RandomVec(9, rng);
  const CompressedVector y = Compress(CompressorSpec::Identity(), x, rng);
  CHECK(y.values == x);
  CHECK(BitCost(CompressorSpec::Identity(), 9) == 576.0);
  CHECK(DeltaOf(CompressorSpec::Identity(), 9) == 1.0);
}

TEST_CASE("compose keeps the contraction's support") {
  RngStream rng(8);
  const Vec x = RandomVec(40, rng);
  const CompressedVector top = Compress(CompressorSpec::TopK(5), x, rng);
  for (const CompressorSpec& spec : {CompressorSpec::NTopK(5), CompressorSpec::RTopK(5)}) {
    const Vec y = Compress(spec, x, rng).values;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const bool kept = std::find(top.support.begin(), top.support.end(), i) != top.support.end();
      if (!kept) CHECK(y[i] == 0.0);
    }
  }
}

TEST_CASE("delta values") {
  CHECK(DeltaOf(CompressorSpec::TopK(1), 100) == doctest::Approx(0.01));
  CHECK(DeltaOf(CompressorSpec::RandK(5), 100) == doctest::Approx(0.05));
  CHECK(DeltaOf(CompressorSpec::ScaledUnbiased(CompressorSpec::RandomDithering()), 100) ==
        doctest::Approx(0.5));
  CHECK(DeltaOf(CompressorSpec::ScaledUnbiased(CompressorSpec::NaturalCompression()), 100) ==
        doctest::Approx(8.0 / 9.0));
  CHECK(DeltaOf(CompressorSpec::NTopK(5), 100) == doctest::Approx(8.0 * 5.0 / 900.0));
  CHECK(DeltaOf(CompressorSpec::RTopK(5), 100) == doctest::Approx(5.0 / 200.0));
  CHECK(DeltaOf(CompressorSpec::RTopK(1), 56) == doctest::Approx(1.0 / 112.0));
}

TEST_CASE("omega values") {
  CHECK(OmegaOf(CompressorSpec::RandomDithering(), 100) == doctest::Approx(1.0));
  CHECK(OmegaOf(CompressorSpec::NaturalCompression(), 100) == doctest::Approx(0.125));
  CHECK_THROWS_AS(OmegaOf(CompressorSpec::RandomDithering(3.0), 100), std::invalid_argument);
  CHECK_THROWS(OmegaOf(CompressorSpec::TopK(1), 100));
}

TEST_CASE("bit costs") {
  CHECK(BitCost(CompressorSpec::TopK(1), 100) == 71.0);
  CHECK(BitCost(CompressorSpec::RandK(3), 100) == 213.0);
  CHECK(BitCost(CompressorSpec::ScaledUnbiased(CompressorSpec::RandomDithering()), 100) ==
        doctest::Approx(344.0));
  CHECK(BitCost(CompressorSpec::ScaledUnbiased(CompressorSpec::NaturalCompression()), 100) ==
        1200.0);
  CHECK(BitCost(CompressorSpec::NTopK(5), 100) == 95.0);
  CHECK(BitCost(CompressorSpec::RTopK(5), 100) == doctest::Approx(113.0));
  CHECK(CeilLog2(1) == 0);
  CHECK(CeilLog2(2) == 1);
  CHECK(CeilLog2(100) == 7);
  CHECK(CeilLog2(128) == 7);
  CHECK(CeilLog2(129) == 8);
}

TEST_CASE("parse and print round-trip") {
  for (const char* s : {"identity", "top_k:3", "rand_k:2", "rand_k_unbiased:4", "dither",
                        "natural", "ntop_k:5", "rtop_k:2", "unbiased_dither",
                        "unbiased_dither:3", "unbiased_natural", "scaled(rand_k_unbiased:2)",
                        "compose(unbiased_natural,rand_k:3)"}) {
    const CompressorSpec spec = CompressorSpec::Parse(s);
    CHECK(spec.ToString() == s);
    CHECK(CompressorSpec::Parse(spec.ToString()) == spec);
  }
  CHECK(CompressorSpec::Parse("none") == CompressorSpec::Identity());
  CHECK(CompressorSpec::Parse("ntop_k:5") == CompressorSpec::NTopK(5));
  CHECK_THROWS_AS(CompressorSpec::Parse("top_k"), std::invalid_argument);
  CHECK_THROWS_AS(CompressorSpec::Parse("bogus:1"), std::invalid_argument);
  CHECK_THROWS_AS(CompressorSpec::Parse("compose(top_k:1,top_k:2)"), std::invalid_argument);
}

TEST_CASE("classification flags") {
  CHECK(CompressorSpec::TopK(1).IsContraction());
  CHECK(CompressorSpec::TopK(1).IsDeterministic());
  CHECK_FALSE(CompressorSpec::TopK(1).HasMeanScaling());
  CHECK(CompressorSpec::RandK(1).HasMeanScaling());
  CHECK(CompressorSpec::NaturalCompression().IsUnbiased());
  CHECK_FALSE(CompressorSpec::NaturalCompression().IsContraction());
  CHECK(CompressorSpec::ScaledUnbiased(CompressorSpec::NaturalCompression()).HasMeanScaling());
  CHECK_FALSE(CompressorSpec::NTopK(2).HasMeanScaling());
}

TEST_CASE("validation rejects impossible sizes") {
  CHECK_THROWS_AS(CompressorSpec::TopK(0).Validate(10), std::invalid_argument);
  CHECK_THROWS_AS(CompressorSpec::TopK(11).Validate(10), std::invalid_argument);
  CHECK_NOTHROW(CompressorSpec::TopK(10).Validate(10));
  RngStream rng(1);
  const Vec x(3, 1.0);
  CHECK_THROWS_AS(Compress(CompressorSpec::RandK(4), x, rng), std::invalid_argument);
}

TEST_CASE("contraction verifier on every experiment compressor") {
  RngStream rng(10);
  for (const char* s : {"top_k:2", "rand_k:2", "dither", "natural", "ntop_k:2", "rtop_k:2"}) {
    const ContractionReport r = VerifyContraction(CompressorSpec::Parse(s), 20, 4000, rng);
    INFO(s);
    CHECK(r.passed);
    CHECK(r.mean_ratio <= 1.0);
  }
}

TEST_CASE("rand_k mean is delta times x; scaled unbiased means too") {
  RngStream rng(11);
  const Vec x = RandomVec(6, rng);
  const MomentReport r = VerifyMeanScaling(CompressorSpec::RandK(2), x, 40000, rng);
  CHECK(r.mean_ok);
  // oracle: each coordinate is kept with probability K/d
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(std::abs(r.mean[i] - x[i] / 3.0) <= 4.0 * r.std_error[i] + 1e-12);
  const MomentReport s = VerifyMeanScaling(
      CompressorSpec::ScaledUnbiased(CompressorSpec::NaturalCompression()), x, 40000, rng);
  CHECK(s.mean_ok);
}

TEST_CASE("unbiased compressors: mean and second moment") {
  RngStream rng(12);
  const Vec x = RandomVec(9, rng);
  for (const CompressorSpec& spec :
       {CompressorSpec::RandomDithering(), CompressorSpec::NaturalCompression(),
        CompressorSpec::RandKUnbiased(3)}) {
    const MomentReport r = VerifyUnbiased(spec, x, 40000, rng);
    INFO(spec.ToString());
    CHECK(r.second_moment_ok);
    CHECK(r.second_moment_bound ==
          doctest::Approx((OmegaOf(spec, 9) + 1.0) * SquaredNorm(x)));
    CHECK(r.max_z < 4.5);
  }
}
