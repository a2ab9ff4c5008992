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

#ifndef ECVR_TRACE_HPP_
#define ECVR_TRACE_HPP_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ecvr {

/// One row of a run trace. dual_gap is NaN for primal-only methods.
struct TrialRecord {
  std::size_t k = 0;
  double epoch = 0.0;
  double bits = 0.0;
  double primal_gap = 0.0;
  double dual_gap = 0.0;
  double err_norm = 0.0;
  double wall_ms = 0.0;
};

/// Field-wise equality where NaN equals NaN.
bool SameRecord(const TrialRecord& a, const TrialRecord& b);
bool SameRecords(const std::vector<TrialRecord>& a, const std::vector<TrialRecord>& b);

struct TraceSummary {
  double best_gap = 0.0;
  double threshold = 0.0;
  std::optional<double> bits_to_threshold;
};

struct TraceDocument {
  std::map<std::string, std::string> metadata;
  std::vector<TrialRecord> records;
  std::optional<TraceSummary> summary;
};

/// Columns k,epoch,bits,primal_gap,dual_gap,err_norm,wall_ms. Reals are
/// written in shortest round-trip form; NaN as "nan".
void WriteTraceCsv(const std::vector<TrialRecord>& records, std::ostream& out);
std::vector<TrialRecord> ReadTraceCsv(std::istream& in);
/// "# best_gap=... bits_to_threshold=..." trailer line; ReadTraceCsv skips it.
void WriteSummaryLine(const TraceSummary& summary, std::ostream& out);

/// JSON object {"metadata": {...}, "records": [...], "summary": {...}}.
/// NaN is stored as null.
void WriteTraceJson(const TraceDocument& doc, std::ostream& out);
TraceDocument ReadTraceJson(std::istream& in);

/// Shortest decimal that parses back to the same double.
std::string FormatReal(double v);
double ParseReal(const std::string& s);

}  // namespace ecvr

#endif  // ECVR_TRACE_HPP_
