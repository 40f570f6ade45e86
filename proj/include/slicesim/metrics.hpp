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

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "slicesim/procedures.hpp"
#include "slicesim/switching.hpp"
#include "slicesim/trace.hpp"

namespace slicesim {

struct SwitchMetrics {
  int switch_id = 0;
  std::string ue;
  std::string case_id;
  std::string result;
  std::string old_snssai = "-";
  std::string new_snssai = "-";
  /// Empty when the metric is undefined (aborted switches).
  std::optional<Tick> interruption;
  std::map<std::string, std::int64_t> messages;

  std::int64_t total_messages() const {
    std::int64_t n = 0;
    for (const auto& [k, v] : messages) n += v;
    return n;
  }

  bool operator==(const SwitchMetrics&) const = default;
};

struct MetricsReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<SwitchMetrics> switches;
  std::map<std::string, std::int64_t> totals;
  std::int64_t events = 0;

  std::int64_t total_messages() const {
    std::int64_t n = 0;
    for (const auto& [k, v] : totals) n += v;
    return n;
  }

  const SwitchMetrics* find_case(std::string_view case_id) const {
    for (const auto& s : switches)
      if (s.case_id == case_id) return &s;
    return nullptr;
  }

  bool operator==(const MetricsReport&) const = default;
};

inline constexpr std::string_view kMetricsHeader = "record,switch,ue,case,result,old_snssai,new_snssai,interruption,key,value";

namespace detail {
inline std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}
}  // namespace detail

inline std::string to_csv(const MetricsReport& r) {
  std::ostringstream os;
  os << kMetricsHeader << '\n';
  os << "meta,-,-,-,-,-,-,-,scenario," << detail::csv_safe(r.scenario) << '\n';
  os << "meta,-,-,-,-,-,-,-,seed," << r.seed << '\n';
  for (const auto& s : r.switches) {
    const std::string irq = s.interruption ? std::to_string(*s.interruption) : "NA";
    os << "switch," << s.switch_id << ',' << s.ue << ',' << s.case_id << ',' << s.result << ',' << s.old_snssai << ','
       << s.new_snssai << ',' << irq << ",messages," << s.total_messages() << '\n';
    for (const auto& [name, n] : s.messages)
      os << "message," << s.switch_id << ',' << s.ue << ',' << s.case_id << ",-,-,-,-," << name << ',' << n << '\n';
  }
  for (const auto& [name, n] : r.totals) os << "total,-,-,-,-,-,-,-," << name << ',' << n << '\n';
  os << "total,-,-,-,-,-,-,-,messages," << r.total_messages() << '\n';
  os << "total,-,-,-,-,-,-,-,events," << r.events << '\n';
  return os.str();
}

/// Report assembled from the simulator's own bookkeeping.
inline MetricsReport make_report(std::string scenario, std::uint64_t seed, std::vector<SwitchOutcome> outcomes,
                                 const std::map<std::string, std::int64_t>& totals, std::int64_t events) {
  MetricsReport r;
  r.scenario = std::move(scenario);
  r.seed = seed;
  r.totals = totals;
  r.events = events;
  std::sort(outcomes.begin(), outcomes.end(),
            [](const SwitchOutcome& a, const SwitchOutcome& b) { return a.switch_id < b.switch_id; });
  for (const auto& o : outcomes) {
    SwitchMetrics m;
    m.switch_id = o.switch_id;
    m.ue = o.ue.str();
    m.case_id = std::string(to_string(o.case_id));
    m.result = std::string(to_string(o.result));
    m.old_snssai = to_string(o.old_snssai);
    m.new_snssai = o.new_snssai ? to_string(*o.new_snssai) : "-";
    if (o.result != SwitchResult::Aborted) m.interruption = o.interruption;
    m.messages = o.signaling_count;
    r.switches.push_back(std::move(m));
  }
  return r;
}

/// Rebuilds the report from trace lines alone. Agreement with make_report is
/// the trace/metrics consistency check.
inline MetricsReport recompute_report(const std::vector<TraceRecord>& trace, std::string scenario, std::uint64_t seed) {
  struct ProcSeen {
    std::string kind;
    Tick last = 0;
    bool router_advert_to_ue = false;
  };
  struct SwitchSeen {
    SwitchMetrics m;
    std::map<std::string, ProcSeen> procs;
  };
  MetricsReport r;
  r.scenario = std::move(scenario);
  r.seed = seed;
  r.events = static_cast<std::int64_t>(trace.size());
  std::map<int, SwitchSeen> seen;

  for (const auto& t : trace) {
    if (t.kind == EventKind::MessageDelivery) ++r.totals[t.name];
    if (t.case_tag == "-") continue;
    const auto hash = t.case_tag.find('#');
    if (hash == std::string::npos) throw TraceFormatError(0, "case tag without switch id: " + t.case_tag);
    const int id = std::stoi(t.case_tag.substr(hash + 1));
    auto& sw = seen[id];
    sw.m.switch_id = id;
    sw.m.case_id = t.case_tag.substr(0, hash);
    if (sw.m.ue.empty()) sw.m.ue = t.ue;
    if (t.kind == EventKind::TriggerFire) {
      sw.m.old_snssai = t.src;
      sw.m.new_snssai = t.dst;
    }
    if (t.kind != EventKind::MessageDelivery) continue;
    ++sw.m.messages[t.name];
    const auto phash = t.proc.find('#');
    auto& p = sw.procs[t.proc];
    p.kind = t.proc.substr(0, phash);
    p.last = std::max(p.last, t.at);
    if (t.name == "RouterAdvertisement" && t.dst == t.ue) p.router_advert_to_ue = true;
  }

  for (auto& [id, sw] : seen) {
    std::optional<Tick> est_done;
    std::optional<Tick> rel_done;
    for (const auto& [tag, p] : sw.procs) {
      if (p.kind == "PduSessionEstablishment" && p.router_advert_to_ue) est_done = p.last;
      if (p.kind == "PduSessionRelease") rel_done = std::max(rel_done.value_or(p.last), p.last);
    }
    const bool tentative = !sw.m.case_id.empty() && sw.m.case_id.back() == 'T';
    if (est_done) {
      sw.m.result = "Switched";
      sw.m.interruption = rel_done ? std::max<Tick>(0, *est_done - *rel_done) : 0;
    } else if (tentative && !rel_done) {
      sw.m.result = "StayedOnCurrent";
      sw.m.interruption = 0;
    } else {
      sw.m.result = "Aborted";
    }
    r.switches.push_back(std::move(sw.m));
  }
  return r;
}

}  // namespace slicesim
