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

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slicesim/procedures.hpp"
#include "slicesim/slice_model.hpp"

namespace slicesim {

enum class CaseId : std::uint8_t { C1a, C1b, C1c, C1d, C1e, C1f, C2a, C2b, C2c, C2bT, C2cT };

inline constexpr std::array kAllCases{CaseId::C1a, CaseId::C1b, CaseId::C1c, CaseId::C1d, CaseId::C1e, CaseId::C1f,
                                      CaseId::C2a, CaseId::C2b, CaseId::C2c, CaseId::C2bT, CaseId::C2cT};

inline std::string_view to_string(CaseId c) {
  constexpr std::array<std::string_view, 11> names{"C1a", "C1b", "C1c", "C1d", "C1e", "C1f",
                                                   "C2a", "C2b", "C2c", "C2bT", "C2cT"};
  return names[static_cast<std::size_t>(c)];
}

/// Lower-case file stem used for golden fixtures: "1a" .. "2c", "2bT", "2cT".
inline std::string case_stem(CaseId c) { return std::string(to_string(c).substr(1)); }

inline std::optional<CaseId> parse_case_id(std::string_view s) {
  for (auto c : kAllCases)
    if (to_string(c) == s || case_stem(c) == s) return c;
  return std::nullopt;
}

enum class CaseInitiator : std::uint8_t { Network, UE };
enum class TriggerMechanism : std::uint8_t { UcuCommand, NetworkRelease, UeDecision };
enum class ReleaseTiming : std::uint8_t { Immediate, Deferred, NotApplicable };

inline std::string_view to_string(TriggerMechanism m) {
  switch (m) {
    case TriggerMechanism::UcuCommand: return "UcuCommand";
    case TriggerMechanism::NetworkRelease: return "NetworkRelease";
    case TriggerMechanism::UeDecision: return "UeDecision";
  }
  return "?";
}

inline std::string_view to_string(ReleaseTiming t) {
  switch (t) {
    case ReleaseTiming::Immediate: return "Immediate";
    case ReleaseTiming::Deferred: return "Deferred";
    case ReleaseTiming::NotApplicable: return "NotApplicable";
  }
  return "?";
}

inline std::optional<ReleaseTiming> parse_release_timing(std::string_view s) {
  if (s == "Immediate") return ReleaseTiming::Immediate;
  if (s == "Deferred") return ReleaseTiming::Deferred;
  return std::nullopt;
}

struct SwitchingCase {
  CaseId id = CaseId::C1a;
  CaseInitiator initiator = CaseInitiator::Network;
  TriggerMechanism trigger_mech = TriggerMechanism::UcuCommand;
  bool target_in_allowed = false;
  bool needs_registration = false;
  bool needs_relocation = false;
  bool tentative = false;
  ReleaseTiming release_timing = ReleaseTiming::NotApplicable;
};

class InvalidCombination : public ContractError {
 public:
  using ContractError::ContractError;
};

/// Maps a switching situation onto its case. Network cases ignore the
/// tentative flag only when it is false; a tentative network case is
/// rejected.
inline SwitchingCase classify_case(CaseInitiator initiator, TriggerMechanism mech, bool target_in_allowed,
                                   bool relocation_needed, bool tentative) {
  SwitchingCase c;
  c.initiator = initiator;
  c.trigger_mech = mech;
  c.target_in_allowed = target_in_allowed;
  c.tentative = tentative;
  c.needs_registration = !target_in_allowed;
  c.needs_relocation = !target_in_allowed && relocation_needed;

  if (initiator == CaseInitiator::Network) {
    if (mech == TriggerMechanism::UeDecision) throw InvalidCombination("network initiator with UE decision");
    if (tentative) throw InvalidCombination("tentative switching is UE-initiated only");
    const bool ucu = mech == TriggerMechanism::UcuCommand;
    if (target_in_allowed)
      c.id = ucu ? CaseId::C1a : CaseId::C1d;
    else if (!relocation_needed)
      c.id = ucu ? CaseId::C1b : CaseId::C1e;
    else
      c.id = ucu ? CaseId::C1c : CaseId::C1f;
    c.release_timing = ReleaseTiming::NotApplicable;
    return c;
  }

  if (mech != TriggerMechanism::UeDecision) throw InvalidCombination("UE initiator requires UE decision");
  if (tentative && target_in_allowed) throw InvalidCombination("tentative switching needs a target outside allowed");
  if (target_in_allowed)
    c.id = CaseId::C2a;
  else if (tentative)
    c.id = relocation_needed ? CaseId::C2cT : CaseId::C2bT;
  else
    c.id = relocation_needed ? CaseId::C2c : CaseId::C2b;
  c.release_timing = tentative ? ReleaseTiming::NotApplicable : ReleaseTiming::Immediate;
  return c;
}

/// Canonical attributes of a case id; the inverse of classify_case.
inline SwitchingCase case_attributes(CaseId id) {
  switch (id) {
    case CaseId::C1a: return classify_case(CaseInitiator::Network, TriggerMechanism::UcuCommand, true, false, false);
    case CaseId::C1b: return classify_case(CaseInitiator::Network, TriggerMechanism::UcuCommand, false, false, false);
    case CaseId::C1c: return classify_case(CaseInitiator::Network, TriggerMechanism::UcuCommand, false, true, false);
    case CaseId::C1d:
      return classify_case(CaseInitiator::Network, TriggerMechanism::NetworkRelease, true, false, false);
    case CaseId::C1e:
      return classify_case(CaseInitiator::Network, TriggerMechanism::NetworkRelease, false, false, false);
    case CaseId::C1f:
      return classify_case(CaseInitiator::Network, TriggerMechanism::NetworkRelease, false, true, false);
    case CaseId::C2a: return classify_case(CaseInitiator::UE, TriggerMechanism::UeDecision, true, false, false);
    case CaseId::C2b: return classify_case(CaseInitiator::UE, TriggerMechanism::UeDecision, false, false, false);
    case CaseId::C2c: return classify_case(CaseInitiator::UE, TriggerMechanism::UeDecision, false, true, false);
    case CaseId::C2bT: return classify_case(CaseInitiator::UE, TriggerMechanism::UeDecision, false, false, true);
    case CaseId::C2cT: return classify_case(CaseInitiator::UE, TriggerMechanism::UeDecision, false, true, true);
  }
  return {};
}

enum class SwitchResult : std::uint8_t { Switched, Aborted, StayedOnCurrent };

inline std::string_view to_string(SwitchResult r) {
  switch (r) {
    case SwitchResult::Switched: return "Switched";
    case SwitchResult::Aborted: return "Aborted";
    case SwitchResult::StayedOnCurrent: return "StayedOnCurrent";
  }
  return "?";
}

struct SwitchOutcome {
  int switch_id = 0;
  CaseId case_id = CaseId::C1a;
  UeId ue;
  std::vector<ProcedureRun> procedure_runs;
  SNssai old_snssai;
  std::optional<SNssai> new_snssai;
  Tick interruption = 0;
  std::map<std::string, std::int64_t> signaling_count;
  SwitchResult result = SwitchResult::Aborted;
  FailureReason reason = FailureReason::None;
  Tick started_at = 0;
  Tick finished_at = 0;
  std::optional<Tick> release_completed_at;
  std::optional<Tick> establishment_completed_at;
  /// When the tentative final decision was taken, if it was reached.
  std::optional<Tick> decision_at;

  std::int64_t total_messages() const {
    std::int64_t n = 0;
    for (const auto& [name, c] : signaling_count) n += c;
    return n;
  }

  std::vector<ProcedureKind> procedure_sequence() const {
    std::vector<ProcedureKind> out;
    for (const auto& r : procedure_runs) out.push_back(r.procedure);
    return out;
  }
};

class MetricUndefined : public ContractError {
 public:
  using ContractError::ContractError;
};

/// Time from the old slice's release completion to establishment completion
/// on the new slice. Clamped at zero when the new session came up first.
inline Tick measure_interruption(const SwitchOutcome& outcome) {
  if (outcome.result != SwitchResult::Switched)
    throw MetricUndefined("interruption is defined for switched outcomes only");
  if (!outcome.release_completed_at || !outcome.establishment_completed_at)
    throw MetricUndefined("switched outcome lacks release or establishment completion");
  return std::max<Tick>(0, *outcome.establishment_completed_at - *outcome.release_completed_at);
}

/// Procedure order each case must produce on the success path.
inline std::vector<ProcedureKind> expected_sequence(CaseId id, ReleaseTiming timing = ReleaseTiming::Immediate) {
  using P = ProcedureKind;
  switch (id) {
    case CaseId::C1a:
      return {P::UeConfigurationUpdate, P::PduSessionRelease, P::PduSessionEstablishment};
    case CaseId::C1b:
    case CaseId::C1c:
      return {P::UeConfigurationUpdate, P::PduSessionRelease, P::Registration, P::PduSessionEstablishment};
    case CaseId::C1d:
      return {P::PduSessionRelease, P::PduSessionEstablishment};
    case CaseId::C1e:
    case CaseId::C1f:
      return {P::PduSessionRelease, P::Registration, P::PduSessionEstablishment};
    case CaseId::C2a:
      if (timing == ReleaseTiming::Deferred) return {P::PduSessionEstablishment, P::PduSessionRelease};
      return {P::PduSessionRelease, P::PduSessionEstablishment};
    case CaseId::C2b:
    case CaseId::C2c:
      if (timing == ReleaseTiming::Deferred)
        return {P::Registration, P::PduSessionRelease, P::PduSessionEstablishment};
      return {P::PduSessionRelease, P::Registration, P::PduSessionEstablishment};
    case CaseId::C2bT:
    case CaseId::C2cT:
      return {P::Registration, P::PduSessionRelease, P::PduSessionEstablishment};
  }
  return {};
}

}  // namespace slicesim
