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

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "slicesim/common.hpp"
#include "slicesim/slice_model.hpp"

namespace slicesim {

enum class NfKind : std::uint8_t { AMF, SMF, NSSF, UDM, UDR, PCF, UPF, NWDAF, RAN, DN, UE };

inline constexpr std::array<std::pair<NfKind, std::string_view>, 11> kNfKindNames{{
    {NfKind::AMF, "AMF"},
    {NfKind::SMF, "SMF"},
    {NfKind::NSSF, "NSSF"},
    {NfKind::UDM, "UDM"},
    {NfKind::UDR, "UDR"},
    {NfKind::PCF, "PCF"},
    {NfKind::UPF, "UPF"},
    {NfKind::NWDAF, "NWDAF"},
    {NfKind::RAN, "RAN"},
    {NfKind::DN, "DN"},
    {NfKind::UE, "UE"},
}};

inline std::string_view to_string(NfKind k) {
  for (const auto& [v, name] : kNfKindNames)
    if (v == k) return name;
  return "?";
}

inline std::optional<NfKind> parse_nf_kind(std::string_view s) {
  for (const auto& [v, name] : kNfKindNames)
    if (name == s) return v;
  return std::nullopt;
}

// --- records held by the data-plane and data-management functions ---------

struct SmSubscription {
  std::set<SessionType> allowed_types{SessionType::IP, SessionType::Ethernet, SessionType::Unstructured};
  bool dn_authorized = true;
};

struct SubscriptionRecord {
  UeId ue_id;
  SubscribedSet subscribed;
  /// Keyed by (snssai, dn). A missing entry means the DN is not subscribed
  /// for that slice.
  std::map<std::pair<SNssai, std::string>, SmSubscription> sm_data;
};

struct PolicyRecord {
  std::string qos_profile;
  std::string charging_profile;
};

struct N4Rules {
  std::string detection;
  std::string enforcement;
  std::string reporting;
};

struct N4Session {
  SessionId session_id;
  NfId smf;
  NfId upf;
  N4Rules rules;
};

// --- per-kind state stores --------------------------------------------------

struct AmfSessionRef {
  SNssai snssai;
  NfId smf;
};

/// What the AMF knows about a UE it serves.
struct AmfUeContext {
  SnssaiSet allowed;
  std::map<SessionId, AmfSessionRef> sessions;
};

using ProcRef = std::int64_t;

/// Registration progress held by the AMF between messages.
struct PendingRegistration {
  ProcRef proc = -1;
  UeId ue;
  SnssaiSet requested;
  bool remove_current = true;
  std::optional<SNssai> current_active;
  SnssaiSet subscribed;
  SnssaiSet new_allowed;
  std::set<ProcRef> waiting_releases;
  std::vector<SessionId> releases_after_accept;
  bool relocated = false;
};

struct PendingEstablishment {
  ProcRef proc = -1;
  UeId ue;
  SessionId session;
  /// Session to release once the SMF accepts the new one.
  std::optional<SessionId> release_on_accept;
};

struct AmfState {
  std::map<UeId, AmfUeContext> ues;
  std::map<ProcRef, PendingRegistration> registrations;
  std::map<ProcRef, PendingEstablishment> establishments;
};

/// Payload of the context hand-over between AMFs on relocation.
struct AmfTransfer {
  AmfUeContext context;
  PendingRegistration registration;
};

enum class SmContextState : std::uint8_t { Creating, Active, Releasing };

struct SmContext {
  SessionId session_id;
  UeId ue;
  SNssai snssai;
  std::string dn_name;
  SessionType session_type = SessionType::IP;
  SmContextState state = SmContextState::Creating;
  std::vector<NfId> upfs;
  std::set<NfId> pending_n4;
  std::optional<std::string> ip_prefix;
  std::string policy_ref;
};

struct SmfState {
  std::map<SessionId, SmContext> contexts;
  std::set<std::string> allocated_prefixes;
};

struct UpfState {
  std::map<SessionId, N4Session> n4;
};

struct RanState {
  std::set<SessionId> resources;
};

struct UdmState {};

struct UdrState {
  std::map<UeId, SubscriptionRecord> subscriptions;
};

struct PcfState {
  std::map<std::pair<SNssai, std::string>, PolicyRecord> policies;
};

struct NssfState {
  SnssaiSet configured;
};

struct SliceAnalytics {
  double load = 0.0;
  double delay = 0.0;
};

/// Analytics stub: holds scenario-written scalars, computes nothing.
struct NwdafState {
  std::map<SNssai, SliceAnalytics> slices;

  std::optional<SliceAnalytics> query(const SNssai& s) const {
    auto it = slices.find(s);
    if (it == slices.end()) return std::nullopt;
    return it->second;
  }
};

struct DnState {
  bool authorize = true;
  std::set<UeId> deny;
};

using NfStateStore = std::variant<AmfState, SmfState, NssfState, UdmState, UdrState, PcfState, UpfState, NwdafState,
                                  RanState, DnState, UeContext>;

struct NfInstance {
  NfId nf_id;
  NfKind kind = NfKind::AMF;
  SnssaiSet serving_snssais;
  NfStateStore state_store;

  template <typename S>
  S& state() {
    return std::get<S>(state_store);
  }
  template <typename S>
  const S& state() const {
    return std::get<S>(state_store);
  }
};

inline NfStateStore make_state_store(NfKind kind) {
  switch (kind) {
    case NfKind::AMF: return AmfState{};
    case NfKind::SMF: return SmfState{};
    case NfKind::NSSF: return NssfState{};
    case NfKind::UDM: return UdmState{};
    case NfKind::UDR: return UdrState{};
    case NfKind::PCF: return PcfState{};
    case NfKind::UPF: return UpfState{};
    case NfKind::NWDAF: return NwdafState{};
    case NfKind::RAN: return RanState{};
    case NfKind::DN: return DnState{};
    case NfKind::UE: return UeContext{};
  }
  return UdmState{};
}

inline bool amf_can_serve(const NfInstance& amf, const SnssaiSet& allowed) {
  if (amf.kind != NfKind::AMF) throw ContractError("amf_can_serve: " + amf.nf_id.str() + " is not an AMF");
  return is_subset(allowed, amf.serving_snssais);
}

struct NoServingAmf {};

/// NSSF-side AMF selection: first AMF in id order able to serve `allowed`.
inline Result<NfId, NoServingAmf> select_amf(const NfInstance& nssf, const SnssaiSet& allowed,
                                             std::span<const NfInstance* const> amfs) {
  if (nssf.kind != NfKind::NSSF) throw ContractError("select_amf: " + nssf.nf_id.str() + " is not an NSSF");
  if (amfs.empty()) throw ContractError("select_amf: no AMF instances");
  const NfInstance* best = nullptr;
  for (const auto* amf : amfs) {
    if (!amf_can_serve(*amf, allowed)) continue;
    if (!best || amf->nf_id < best->nf_id) best = amf;
  }
  if (!best) return Result<NfId, NoServingAmf>::failure({});
  return best->nf_id;
}

}  // namespace slicesim
