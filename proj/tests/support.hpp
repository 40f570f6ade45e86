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

#include <initializer_list>
#include <string>
#include <string_view>

#include "slicesim/slicesim.hpp"

namespace slicesim::testing {

inline std::string source_path(const std::string& rel) { return std::string(SLICESIM_SOURCE_DIR) + "/" + rel; }

inline Scenario fixture(const std::string& stem) { return load_scenario(source_path("scenarios/" + stem + ".yaml")); }

/// The case fixture with its trigger removed, for driving procedures by hand.
inline Scenario quiet_fixture(const std::string& stem = "case_1b") {
  auto sc = fixture(stem);
  sc.triggers.clear();
  return sc;
}

inline SNssai sn(std::string_view text) {
  auto s = parse_snssai(text);
  if (!s) throw ContractError("bad S-NSSAI literal " + std::string(text));
  return *s;
}

inline SnssaiSet set_of(std::initializer_list<std::string_view> items) {
  SnssaiSet out;
  for (auto i : items) out.insert(sn(i));
  return out;
}

inline SubscribedSet subs_of(std::initializer_list<std::string_view> items) {
  SubscribedSet out;
  bool first = true;
  for (auto i : items) {
    out.push_back({sn(i), first});
    first = false;
  }
  return out;
}

inline std::vector<std::string> names(const std::vector<TraceRecord>& trace, std::string_view proc_prefix = {}) {
  std::vector<std::string> out;
  for (const auto& r : trace)
    if (r.kind == EventKind::MessageDelivery && r.proc.rfind(proc_prefix, 0) == 0) out.push_back(r.name);
  return out;
}

}  // namespace slicesim::testing
