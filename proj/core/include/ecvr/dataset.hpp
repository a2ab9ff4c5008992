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

#ifndef ECVR_DATASET_HPP_
#define ECVR_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ecvr/vec.hpp"

namespace ecvr {

/// One sparse column: parallel row-index / value arrays, rows ascending.
struct SparseColumn {
  std::span<const std::uint32_t> rows;
  std::span<const double> values;

  double Dot(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) s += values[k] * x[rows[k]];
    return s;
  }
  // y += alpha * column
  void AddTo(double alpha, std::span<double> y) const {
    for (std::size_t k = 0; k < rows.size(); ++k) y[rows[k]] += alpha * values[k];
  }
  double SquaredNorm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return s;
  }
};

/// Compressed-sparse-column matrix, rows = features, columns = examples.
class CscMatrix {
 public:
  CscMatrix() : col_ptr_{0} {}
  explicit CscMatrix(std::size_t rows) : rows_(rows), col_ptr_{0} {}

  /// Appends a column; entries are sorted by row and must not repeat.
  void AppendColumn(std::vector<std::pair<std::uint32_t, double>> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return col_ptr_.size() - 1; }
  std::size_t nnz() const { return values_.size(); }

  SparseColumn Column(std::size_t j) const {
    const std::size_t b = col_ptr_[j], e = col_ptr_[j + 1];
    return {std::span<const std::uint32_t>(row_idx_).subspan(b, e - b),
            std::span<const double>(values_).subspan(b, e - b)};
  }

  /// Grows the row count (e.g. to match a training file's dimension).
  void SetRows(std::size_t rows);

  /// New matrix with columns taken in the given order.
  CscMatrix SelectColumns(std::span<const std::size_t> order) const;

  /// Scales column j in place.
  void ScaleColumn(std::size_t j, double factor);

  friend bool operator==(const CscMatrix&, const CscMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::vector<std::size_t> col_ptr_;
  std::vector<std::uint32_t> row_idx_;
  std::vector<double> values_;
};

/// Labelled examples; column j of `features` is example j.
struct Dataset {
  CscMatrix features;
  Vec labels;  // entries in {-1, +1}

  std::size_t dim() const { return features.rows(); }
  std::size_t size() const { return features.cols(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// LIBSVM text: `label idx:val ...` with 1-based indices. Labels <= 0 map
/// to -1, everything else to +1. d is the largest index seen.
Dataset ParseLibsvm(std::istream& in);
Dataset ParseLibsvm(const std::filesystem::path& path);
void WriteLibsvm(const Dataset& data, std::ostream& out);

/// Rescales every nonzero column to unit l2 norm.
void NormalizeColumns(Dataset& data);

/// Reorders examples with a seeded permutation.
Dataset ShuffleExamples(const Dataset& data, std::uint64_t seed);

/// Contiguous assignment of m examples to each of n nodes; the trailing
/// N - n*m examples are not used.
struct Partition {
  std::size_t nodes = 0;
  std::size_t per_node = 0;
  std::size_t dropped = 0;

  std::size_t retained() const { return nodes * per_node; }
  std::size_t Global(std::size_t node, std::size_t local) const {
    return node * per_node + local;
  }
  std::size_t begin(std::size_t node) const { return node * per_node; }
  std::size_t end(std::size_t node) const { return (node + 1) * per_node; }
};

Partition MakePartition(const Dataset& data, std::size_t nodes);

}  // namespace ecvr

#endif  // ECVR_DATASET_HPP_
