/*
 *  Copyright 2026 The slicesim Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "slicesim/common.hpp"
#include "slicesim/event_queue.hpp"

namespace slicesim {

/// One trace line: `seq|at|kind|name|src|dst|ue|case|proc`. Empty fields are
/// written as "-".
struct TraceRecord {
  std::int64_t seq = 0;
  Tick at = 0;
  EventKind kind = EventKind::MessageDelivery;
  std::string name;
  std::string src = "-";
  std::string dst = "-";
  std::string ue = "-";
  std::string case_tag = "-";
  std::string proc = "-";
};

inline constexpr std::size_t kTraceFields = 9;
inline constexpr std::size_t kProjectionFields = 7;

inline std::string format_trace_line(const TraceRecord& r) {
  std::ostringstream os;
  os << r.seq << '|' << r.at << '|' << to_string(r.kind) << '|' << r.name << '|' << r.src << '|' << r.dst << '|'
     << r.ue << '|' << r.case_tag << '|' << r.proc;
  return os.str();
}

inline std::string format_trace(const std::vector<TraceRecord>& records) {
  std::string out;
  for (const auto& r : records) out += format_trace_line(r) + "\n";
  return out;
}

inline std::vector<std::string> split_fields(std::string_view line, char sep = '|') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (auto k : {EventKind::MessageDelivery, EventKind::TriggerFire, EventKind::TimerExpiry})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

class TraceFormatError : public std::runtime_error {
 public:
  TraceFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline std::vector<TraceRecord> parse_trace(std::string_view text) {
  std::vector<TraceRecord> out;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_fields(line);
    if (f.size() != kTraceFields)
      throw TraceFormatError(lineno, "expected " + std::to_string(kTraceFields) + " fields, got " +
                                         std::to_string(f.size()));
    TraceRecord r;
    try {
      r.seq = std::stoll(f[0]);
      r.at = std::stoll(f[1]);
    } catch (const std::exception&) {
      throw TraceFormatError(lineno, "non-numeric seq/at");
    }
    auto kind = parse_event_kind(f[2]);
    if (!kind) throw TraceFormatError(lineno, "unknown event kind '" + f[2] + "'");
    r.kind = *kind;
    r.name = f[3];
    r.src = f[4];
    r.dst = f[5];
    r.ue = f[6];
    r.case_tag = f[7];
    r.proc = f[8];
    out.push_back(std::move(r));
  }
  return out;
}

/// Timestamp-free projection used for golden comparison.
inline std::string project_line(const TraceRecord& r) {
  return std::string(to_string(r.kind)) + '|' + r.name + '|' + r.src + '|' + r.dst + '|' + r.ue + '|' + r.case_tag +
         '|' + r.proc;
}

inline std::string format_projection(const std::vector<TraceRecord>& records) {
  std::string out;
  for (const auto& r : records) out += project_line(r) + "\n";
  return out;
}

/// Reads a trace or golden file into projected lines. Full 9-field trace
/// lines are projected; 7-field lines are taken as already projected.
inline std::vector<std::string> load_projection(std::string_view text) {
  std::vector<std::string> out;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    const auto n = split_fields(line).size();
    if (n == kTraceFields) {
      auto recs = parse_trace(line);
      out.push_back(project_line(recs.front()));
    } else if (n == kProjectionFields) {
      out.push_back(line);
    } else {
      throw TraceFormatError(lineno, "expected " + std::to_string(kTraceFields) + " or " +
                                         std::to_string(kProjectionFields) + " fields, got " + std::to_string(n));
    }
  }
  return out;
}

struct GoldenDiff {
  bool equal = true;
  /// 1-based index of the first differing projected line.
  std::size_t first_divergence = 0;
  std::string expected;
  std::string actual;
};

inline GoldenDiff diff_projection(const std::vector<std::string>& actual, const std::vector<std::string>& golden) {
  GoldenDiff d;
  const auto n = std::max(actual.size(), golden.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::string a = i < actual.size() ? actual[i] : "<end of trace>";
    const std::string g = i < golden.size() ? golden[i] : "<end of golden>";
    if (a != g) {
      d.equal = false;
      d.first_divergence = i + 1;
      d.expected = g;
      d.actual = a;
      return d;
    }
  }
  return d;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace slicesim
