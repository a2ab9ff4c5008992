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

#include "ecvr/trace.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ecvr {

namespace {

constexpr const char* kHeader = "k,epoch,bits,primal_gap,dual_gap,err_norm,wall_ms";

bool SameReal(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return a == b;
}

nlohmann::json RealToJson(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double RealFromJson(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

}  // namespace

std::string FormatReal(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double ParseReal(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad real '" + s + "'");
  return v;
}

bool SameRecord(const TrialRecord& a, const TrialRecord& b) {
  return a.k == b.k && SameReal(a.epoch, b.epoch) && SameReal(a.bits, b.bits) &&
         SameReal(a.primal_gap, b.primal_gap) && SameReal(a.dual_gap, b.dual_gap) &&
         SameReal(a.err_norm, b.err_norm) && SameReal(a.wall_ms, b.wall_ms);
}

bool SameRecords(const std::vector<TrialRecord>& a, const std::vector<TrialRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!SameRecord(a[i], b[i])) return false;
  return true;
}

void WriteTraceCsv(const std::vector<TrialRecord>& records, std::ostream& out) {
  out << kHeader << '\n';
  for (const TrialRecord& r : records) {
    out << r.k << ',' << FormatReal(r.epoch) << ',' << FormatReal(r.bits) << ','
        << FormatReal(r.primal_gap) << ',' << FormatReal(r.dual_gap) << ','
        << FormatReal(r.err_norm) << ',' << FormatReal(r.wall_ms) << '\n';
  }
}

void WriteSummaryLine(const TraceSummary& summary, std::ostream& out) {
  out << "# best_gap=" << FormatReal(summary.best_gap)
      << " threshold=" << FormatReal(summary.threshold) << " bits_to_threshold="
      << (summary.bits_to_threshold ? FormatReal(*summary.bits_to_threshold) : "none") << '\n';
}

std::vector<TrialRecord> ReadTraceCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw std::invalid_argument("trace CSV must start with '" + std::string(kHeader) + "'");
  std::vector<TrialRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 7)
      throw std::invalid_argument("trace line " + std::to_string(line_no) + ": expected 7 fields");
    TrialRecord r;
    r.k = std::stoull(f[0]);
    r.epoch = ParseReal(f[1]);
    r.bits = ParseReal(f[2]);
    r.primal_gap = ParseReal(f[3]);
    r.dual_gap = ParseReal(f[4]);
    r.err_norm = ParseReal(f[5]);
    r.wall_ms = ParseReal(f[6]);
    records.push_back(r);
  }
  return records;
}

void WriteTraceJson(const TraceDocument& doc, std::ostream& out) {
  nlohmann::ordered_json j;
  j["metadata"] = doc.metadata;
  auto& rows = j["records"] = nlohmann::ordered_json::array();
  for (const TrialRecord& r : doc.records) {
    rows.push_back({{"k", r.k},
                    {"epoch", RealToJson(r.epoch)},
                    {"bits", RealToJson(r.bits)},
                    {"primal_gap", RealToJson(r.primal_gap)},
                    {"dual_gap", RealToJson(r.dual_gap)},
                    {"err_norm", RealToJson(r.err_norm)},
                    {"wall_ms", RealToJson(r.wall_ms)}});
  }
  if (doc.summary) {
    j["summary"] = {{"best_gap", RealToJson(doc.summary->best_gap)},
                    {"threshold", RealToJson(doc.summary->threshold)},
                    {"bits_to_threshold", doc.summary->bits_to_threshold
                                              ? nlohmann::json(*doc.summary->bits_to_threshold)
                                              : nlohmann::json(nullptr)}};
  }
  out << j.dump(1) << '\n';
}

TraceDocument ReadTraceJson(std::istream& in) {
  const nlohmann::json j = nlohmann::json::parse(in);
  TraceDocument doc;
  if (j.contains("metadata")) doc.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
  for (const auto& row : j.at("records")) {
    TrialRecord r;
    r.k = row.at("k").get<std::size_t>();
    r.epoch = RealFromJson(row.at("epoch"));
    r.bits = RealFromJson(row.at("bits"));
    r.primal_gap = RealFromJson(row.at("primal_gap"));
    r.dual_gap = RealFromJson(row.at("dual_gap"));
    r.err_norm = RealFromJson(row.at("err_norm"));
    r.wall_ms = RealFromJson(row.at("wall_ms"));
    doc.records.push_back(r);
  }
  if (j.contains("summary")) {
    const auto& s = j.at("summary");
    TraceSummary summary;
    summary.best_gap = RealFromJson(s.at("best_gap"));
    summary.threshold = RealFromJson(s.at("threshold"));
    if (!s.at("bits_to_threshold").is_null())
      summary.bits_to_threshold = s.at("bits_to_threshold").get<double>();
    doc.summary = summary;
  }
  return doc;
}

}  // namespace ecvr
