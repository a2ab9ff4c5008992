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
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "ecvr/dataset.hpp"
#include "test_util.hpp"

using namespace ecvr;

TEST_CASE("parses the fixture file") {
  const Dataset data = ParseLibsvm(std::filesystem::path(ECVR_TEST_DATA_DIR) / "tiny.libsvm");
  REQUIRE(data.size() == 4);
  CHECK(data.dim() == 5);
  CHECK(data.labels == Vec{1.0, -1.0, -1.0, 1.0});
  const SparseColumn c0 = data.features.Column(0);
  CHECK(std::vector<std::uint32_t>(c0.rows.begin(), c0.rows.end()) ==
        std::vector<std::uint32_t>{0, 2});
  CHECK(c0.values[1] == -1.25);
  CHECK(data.features.Column(1).values[1] == 1e-3);
  CHECK(data.features.Column(2).rows.size() == 5);
  CHECK(data.features.nnz() == 2 + 2 + 5 + 1);
}

TEST_CASE("parse errors carry line numbers") {
  auto fails_at = [](const std::string& text, std::size_t line) {
    std::istringstream in(text);
    try {
      ParseLibsvm(in);
    } catch (const ParseError& e) {
      return e.line() == line;
    }
    return false;
  };
  CHECK(fails_at("+1 1:1\n+1 0:2\n", 2));
  CHECK(fails_at("+1 1:1\n\n+1 2:x\n", 3));
  CHECK(fails_at("abc 1:1\n", 1));
  CHECK(fails_at("+1 3:1 3:2\n", 1));
  CHECK(fails_at("+1 1\n", 1));
  CHECK(fails_at("# only a comment\n\n", 0));
  CHECK(fails_at("", 0));
}

TEST_CASE("unsorted indices are accepted and sorted") {
  std::istringstream in("1 4:4 2:2\n");
  const Dataset d = ParseLibsvm(in);
  const SparseColumn c = d.features.Column(0);
  CHECK(c.rows[0] == 1);
  CHECK(c.rows[1] == 3);
  CHECK(c.values[0] == 2.0);
}

TEST_CASE("write then parse reproduces the dataset") {
  SynthSpec s;
  s.examples = 30;
  s.features = 6;
  s.density = 1.0;  // every index present so d survives the round trip
  const Dataset data = SynthesizeDataset(s);
  std::ostringstream out;
  WriteLibsvm(data, out);
  std::istringstream in(out.str());
  CHECK(ParseLibsvm(in) == data);
}

TEST_CASE("partition is contiguous and drops the remainder") {
  Dataset big;
  big.features = CscMatrix(1);
  for (int j = 0; j < 8124; ++j) {
    big.features.AppendColumn({{0, 1.0}});
    big.labels.push_back(1.0);
  }
  const Partition p = MakePartition(big, 4);
  CHECK(p.per_node == 2031);
  CHECK(p.dropped == 0);
  CHECK(p.Global(2, 5) == 2 * 2031 + 5);
  CHECK(p.begin(3) == 6093);
  CHECK(p.end(3) == 8124);

  Dataset ten = testing::MakeDataset(1, std::vector<std::pair<std::vector<double>, double>>(
                                            10, {{1.0}, 1.0}));
  const Partition q = MakePartition(ten, 3);
  CHECK(q.per_node == 3);
  CHECK(q.dropped == 1);
  CHECK(q.retained() == 9);
  CHECK_THROWS_AS(MakePartition(ten, 0), std::invalid_argument);
  CHECK_THROWS_AS(MakePartition(ten, 11), std::invalid_argument);
}

TEST_CASE("normalize gives unit columns and leaves empty columns alone") {
  Dataset d = testing::MakeDataset(3, {{{3.0, 4.0, 0.0}, 1.0}, {{0.0, 0.0, 0.0}, -1.0}});
  NormalizeColumns(d);
  CHECK(d.features.Column(0).SquaredNorm() == doctest::Approx(1.0));
  CHECK(d.features.Column(0).values[0] == doctest::Approx(0.6));
  CHECK(d.features.Column(1).rows.empty());
}

TEST_CASE("shuffle is a seeded permutation") {
  SynthSpec s;
  s.examples = 50;
  s.features = 5;
  const Dataset data = SynthesizeDataset(s);
  const Dataset a = ShuffleExamples(data, 3), b = ShuffleExamples(data, 3),
                c = ShuffleExamples(data, 4);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  auto sums = [](const Dataset& d) {
    std::vector<double> v;
    for (std::size_t j = 0; j < d.size(); ++j)
      v.push_back(d.features.Column(j).SquaredNorm() * d.labels[j]);
    std::sort(v.begin(), v.end());
    return v;
  };
  CHECK(sums(a) == sums(data));
}

TEST_CASE("sparse column algebra") {
  const Dataset d = testing::MakeDataset(4, {{{1.0, 0.0, -2.0, 0.5}, 1.0}});
  const SparseColumn c = d.features.Column(0);
  const Vec x = {2.0, 100.0, 1.0, 4.0};
  CHECK(c.Dot(x) == 2.0);
  Vec y(4, 1.0);
  c.AddTo(2.0, y);
  CHECK(y == Vec{3.0, 1.0, -3.0, 2.0});
  CHECK(c.SquaredNorm() == 5.25);
}
