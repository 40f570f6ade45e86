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

#include <optional>
#include <string>
#include <vector>

#include "slicesim/metrics.hpp"
#include "slicesim/scenario.hpp"
#include "slicesim/simulator.hpp"

namespace slicesim {

struct RunResult {
  std::vector<TraceRecord> trace;
  MetricsReport report;
  std::vector<SwitchOutcome> outcomes;
  std::int64_t rejected_triggers = 0;

  std::string trace_text() const { return format_trace(trace); }
  std::string metrics_csv() const { return to_csv(report); }
};

/// Runs a validated scenario to quiescence. Throws InvariantViolation when
/// checks are on and a model invariant breaks.
inline RunResult run_scenario(const Scenario& scenario, std::uint64_t seed,
                              std::optional<bool> check_invariants = std::nullopt) {
  Simulator sim(scenario, seed, check_invariants);
  sim.run();
  RunResult out;
  out.trace = sim.trace();
  out.outcomes = sim.outcomes();
  out.rejected_triggers = sim.rejected_triggers();
  out.report = make_report(scenario.name, seed, sim.outcomes(), sim.message_totals(), sim.events_processed());
  return out;
}

}  // namespace slicesim
