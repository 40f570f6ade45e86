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
#include <string_view>
#include <vector>

#include "slicesim/messages.hpp"
#include "slicesim/slice_model.hpp"

namespace slicesim {

enum class ProcedureKind : std::uint8_t { UeConfigurationUpdate, Registration, PduSessionRelease, PduSessionEstablishment };

inline std::string_view to_string(ProcedureKind k) {
  switch (k) {
    case ProcedureKind::UeConfigurationUpdate: return "UeConfigurationUpdate";
    case ProcedureKind::Registration: return "Registration";
    case ProcedureKind::PduSessionRelease: return "PduSessionRelease";
    case ProcedureKind::PduSessionEstablishment: return "PduSessionEstablishment";
  }
  return "?";
}

inline std::optional<ProcedureKind> parse_procedure_kind(std::string_view s) {
  for (auto k : {ProcedureKind::UeConfigurationUpdate, ProcedureKind::Registration, ProcedureKind::PduSessionRelease,
                 ProcedureKind::PduSessionEstablishment})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

enum class Initiator : std::uint8_t { UE, AMF, SMF, PCF };

inline std::string_view to_string(Initiator i) {
  switch (i) {
    case Initiator::UE: return "UE";
    case Initiator::AMF: return "AMF";
    case Initiator::SMF: return "SMF";
    case Initiator::PCF: return "PCF";
  }
  return "?";
}

inline std::optional<Initiator> parse_initiator(std::string_view s) {
  for (auto i : {Initiator::UE, Initiator::AMF, Initiator::SMF, Initiator::PCF})
    if (to_string(i) == s) return i;
  return std::nullopt;
}

enum class ProcedureStatus : std::uint8_t { Running, Success, Failure };

/// Sub-steps of the SMF side of session establishment, in mandated order.
enum class EstablishmentStep : std::uint8_t {
  DnAuthorization,     // (a)
  PolicyRetrieval,     // (b)
  UpfSelectionAndN4,   // (c)
  IpAllocation,        // (d)
  SmParameterDelivery  // (e)
};

struct ProcedureRun {
  ProcId id = kNoProc;
  ProcedureKind procedure = ProcedureKind::Registration;
  Initiator initiator = Initiator::UE;
  UeId ue_id;
  std::optional<SNssai> target_snssai;
  SessionId session;
  bool with_amf_relocation = false;
  Tick started_at = 0;
  Tick finished_at = 0;
  ProcedureStatus status = ProcedureStatus::Running;
  FailureReason failure = FailureReason::None;
  std::int64_t messages = 0;
  ProcId parent = kNoProc;
  /// Release-during-registration spawned by this run, if any.
  bool release_during_registration = false;
  std::vector<EstablishmentStep> steps;

  bool finished() const noexcept { return status != ProcedureStatus::Running; }
  bool succeeded() const noexcept { return status == ProcedureStatus::Success; }
};

/// Upper bound on messages per choreography (single UPF per slice). A run that
/// exceeds it is treated as livelock by the invariant checker.
inline constexpr int max_messages(ProcedureKind k) {
  switch (k) {
    case ProcedureKind::UeConfigurationUpdate: return 2;
    case ProcedureKind::Registration: return 9;
    case ProcedureKind::PduSessionRelease: return 9;
    case ProcedureKind::PduSessionEstablishment: return 19;
  }
  return 0;
}

}  // namespace slicesim
