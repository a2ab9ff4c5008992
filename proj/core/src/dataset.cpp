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

#include "ecvr/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ecvr/rng.hpp"

namespace ecvr {

void CscMatrix::AppendColumn(std::vector<std::pair<std::uint32_t, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (k > 0 && entries[k].first == entries[k - 1].first)
      throw std::invalid_argument("duplicate feature index " +
                                  std::to_string(entries[k].first + 1) + " in one example");
    if (entries[k].first >= rows_) rows_ = entries[k].first + 1;
    row_idx_.push_back(entries[k].first);
    values_.push_back(entries[k].second);
  }
  col_ptr_.push_back(values_.size());
}

void CscMatrix::SetRows(std::size_t rows) {
  if (!row_idx_.empty() &&
      *std::max_element(row_idx_.begin(), row_idx_.end()) >= rows)
    throw std::invalid_argument("SetRows would truncate existing entries");
  rows_ = rows;
}

CscMatrix CscMatrix::SelectColumns(std::span<const std::size_t> order) const {
  CscMatrix out(rows_);
  for (std::size_t j : order) {
    const SparseColumn c = Column(j);
    out.row_idx_.insert(out.row_idx_.end(), c.rows.begin(), c.rows.end());
    out.values_.insert(out.values_.end(), c.values.begin(), c.values.end());
    out.col_ptr_.push_back(out.values_.size());
  }
  return out;
}

void CscMatrix::ScaleColumn(std::size_t j, double factor) {
  for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) values_[k] *= factor;
}

namespace {

template <typename T>
bool ParseNumber(std::string_view tok, T& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

}  // namespace

Dataset ParseLibsvm(std::istream& in) {
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;  // blank line

    double label = 0.0;
    if (!ParseNumber(tok, label) || !std::isfinite(label))
      throw ParseError("bad label '" + tok + "'", line_no);

    std::vector<std::pair<std::uint32_t, double>> entries;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw ParseError("expected idx:val, got '" + tok + "'", line_no);
      std::uint64_t index = 0;
      double value = 0.0;
      if (!ParseNumber(std::string_view(tok).substr(0, colon), index) || index == 0 ||
          index > 0xffffffffULL)
        throw ParseError("bad feature index in '" + tok + "'", line_no);
      if (!ParseNumber(std::string_view(tok).substr(colon + 1), value) || !std::isfinite(value))
        throw ParseError("bad feature value in '" + tok + "'", line_no);
      entries.emplace_back(static_cast<std::uint32_t>(index - 1), value);
    }
    try {
      data.features.AppendColumn(std::move(entries));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
    data.labels.push_back(label <= 0.0 ? -1.0 : 1.0);
  }
  if (data.labels.empty()) throw ParseError("no examples in input", 0);
  return data;
}

Dataset ParseLibsvm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return ParseLibsvm(in);
}

void WriteLibsvm(const Dataset& data, std::ostream& out) {
  char buf[64];
  for (std::size_t j = 0; j < data.size(); ++j) {
    out << (data.labels[j] > 0 ? "+1" : "-1");
    const SparseColumn c = data.features.Column(j);
    for (std::size_t k = 0; k < c.rows.size(); ++k) {
      auto res = std::to_chars(buf, buf + sizeof(buf), c.values[k]);
      out << ' ' << (c.rows[k] + 1) << ':' << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

void NormalizeColumns(Dataset& data) {
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double norm = std::sqrt(data.features.Column(j).SquaredNorm());
    if (norm > 0.0) data.features.ScaleColumn(j, 1.0 / norm);
  }
}

Dataset ShuffleExamples(const Dataset& data, std::uint64_t seed) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  RngStream rng = RngStream::Split(seed, 0, StreamPurpose::kShuffle);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.Index(i)]);
  Dataset out;
  out.features = data.features.SelectColumns(order);
  out.labels.reserve(order.size());
  for (std::size_t j : order) out.labels.push_back(data.labels[j]);
  return out;
}

Partition MakePartition(const Dataset& data, std::size_t nodes) {
  if (nodes == 0) throw std::invalid_argument("node count must be >= 1");
  if (nodes > data.size())
    throw std::invalid_argument("node count " + std::to_string(nodes) +
                                " exceeds example count " + std::to_string(data.size()));
  Partition p;
  p.nodes = nodes;
  p.per_node = data.size() / nodes;
  p.dropped = data.size() - nodes * p.per_node;
  return p;
}

}  // namespace ecvr
