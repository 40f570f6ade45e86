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
#include <optional>
#include <string>
#include <string_view>

#include <memory>

#include "slicesim/common.hpp"
#include "slicesim/nf.hpp"
#include "slicesim/slice_model.hpp"

namespace slicesim {

#define SLICESIM_MESSAGES(X)          \
  X(RegistrationRequest)              \
  X(SubscriptionDataRequest)          \
  X(SubscriptionDataResponse)         \
  X(NssaiSelectionRequest)            \
  X(NssaiSelectionResponse)           \
  X(AmfSelectionRequest)              \
  X(AmfSelectionResponse)             \
  X(AmfContextTransfer)               \
  X(RegistrationAccept)               \
  X(RegistrationReject)               \
  X(UeConfigurationUpdateCommand)     \
  X(UeConfigurationUpdateComplete)    \
  X(PduSessionReleaseRequest)         \
  X(SmPolicyTerminationNotify)        \
  X(SmContextReleaseRequest)          \
  X(N4SessionReleaseRequest)          \
  X(N4SessionReleaseResponse)         \
  X(N1N2MessageTransfer)              \
  X(PduSessionResourceReleaseCommand) \
  X(PduSessionReleaseCommand)         \
  X(PduSessionReleaseComplete)        \
  X(SmContextReleaseComplete)         \
  X(PduSessionEstablishmentRequest)   \
  X(CreateSmContextRequest)           \
  X(SmSubscriptionDataRequest)        \
  X(SmSubscriptionDataResponse)       \
  X(CreateSmContextResponse)          \
  X(DnAuthenticationRequest)          \
  X(DnAuthenticationResponse)         \
  X(PolicyRetrievalRequest)           \
  X(PolicyRetrievalResponse)          \
  X(N4SessionEstablishmentRequest)    \
  X(N4SessionEstablishmentResponse)   \
  X(PduSessionResourceSetupRequest)   \
  X(PduSessionEstablishmentAccept)    \
  X(SmConfigurationComplete)          \
  X(PduSessionResourceSetupResponse)  \
  X(UpdateSmContextRequest)           \
  X(RouterAdvertisement)              \
  X(AnalyticsRequest)                 \
  X(AnalyticsResponse)                \
  X(ProcedureFailure)

enum class MessageName : std::uint8_t {
#define X(n) n,
  SLICESIM_MESSAGES(X)
#undef X
};

inline constexpr std::array kMessageNames{
#define X(n) std::string_view(#n),
    SLICESIM_MESSAGES(X)
#undef X
};

#undef SLICESIM_MESSAGES

inline std::string_view to_string(MessageName n) { return kMessageNames[static_cast<std::size_t>(n)]; }

inline std::optional<MessageName> parse_message_name(std::string_view s) {
  for (std::size_t i = 0; i < kMessageNames.size(); ++i)
    if (kMessageNames[i] == s) return static_cast<MessageName>(i);
  return std::nullopt;
}

enum class FailureReason : std::uint8_t {
  None,
  NoAcceptableSnssai,
  AllowedNssaiOverflow,
  NoServingAmf,
  InvalidSessionState,
  DnAuthRejected,
  NoPolicy,
  SliceNotAllowed,
  NoSmSubscription,
  UnknownUe,
  UnknownMessage,
  NoServingSmf,
  NoCandidateSlice,
  NoServingUpf,
};

inline std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::None: return "None";
    case FailureReason::NoAcceptableSnssai: return "NoAcceptableSnssai";
    case FailureReason::AllowedNssaiOverflow: return "AllowedNssaiOverflow";
    case FailureReason::NoServingAmf: return "NoServingAmf";
    case FailureReason::InvalidSessionState: return "InvalidSessionState";
    case FailureReason::DnAuthRejected: return "DnAuthRejected";
    case FailureReason::NoPolicy: return "NoPolicy";
    case FailureReason::SliceNotAllowed: return "SliceNotAllowed";
    case FailureReason::NoSmSubscription: return "NoSmSubscription";
    case FailureReason::UnknownUe: return "UnknownUe";
    case FailureReason::UnknownMessage: return "UnknownMessage";
    case FailureReason::NoServingSmf: return "NoServingSmf";
    case FailureReason::NoCandidateSlice: return "NoCandidateSlice";
    case FailureReason::NoServingUpf: return "NoServingUpf";
  }
  return "?";
}

using ProcId = std::int64_t;
inline constexpr ProcId kNoProc = -1;

/// One NF-to-NF control-plane message. The payload fields are a union of what
/// the choreographies carry; unused fields stay empty.
struct SignalingMessage {
  std::int64_t msg_id = 0;
  MessageName name = MessageName::ProcedureFailure;
  NfId src;
  NfId dst;
  Tick sent_at = 0;
  Tick delivered_at = 0;
  ProcId correlates = kNoProc;

  UeId ue;
  SessionId session;
  std::optional<SNssai> snssai;
  SnssaiSet nssai;
  bool ok = true;
  FailureReason reason = FailureReason::None;
  NfId ref_nf;
  std::string dn;
  /// N1N2MessageTransfer carries either session setup or release content.
  bool release = false;
  SessionType session_type = SessionType::IP;
  std::optional<SessionId> related_session;
  std::shared_ptr<const AmfTransfer> transfer;
};

}  // namespace slicesim
