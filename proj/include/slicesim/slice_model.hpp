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
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "slicesim/common.hpp"

namespace slicesim {

enum class ServiceType : std::uint8_t { URLLC, V2X, eMBB, MIoT };

inline constexpr std::array<std::pair<ServiceType, std::string_view>, 4> kServiceTypeNames{{
    {ServiceType::URLLC, "URLLC"},
    {ServiceType::V2X, "V2X"},
    {ServiceType::eMBB, "eMBB"},
    {ServiceType::MIoT, "MIoT"},
}};

inline std::string_view to_string(ServiceType t) {
  for (const auto& [v, name] : kServiceTypeNames)
    if (v == t) return name;
  return "?";
}

inline std::optional<ServiceType> parse_service_type(std::string_view s) {
  for (const auto& [v, name] : kServiceTypeNames)
    if (name == s) return v;
  return std::nullopt;
}

/// Slice differentiator: opaque token of at most six hex-like characters.
inline bool is_valid_sd(std::string_view sd) {
  if (sd.empty() || sd.size() > 6) return false;
  return std::all_of(sd.begin(), sd.end(), [](unsigned char c) { return std::isxdigit(c) != 0; });
}

/// Identity of one network slice. Ordered by (sst, sd) so sets iterate
/// deterministically.
struct SNssai {
  ServiceType sst = ServiceType::eMBB;
  std::string sd;

  auto operator<=>(const SNssai&) const = default;
};

/// Textual form "<sst>:<sd>", e.g. "eMBB:01".
inline std::string to_string(const SNssai& s) { return std::string(to_string(s.sst)) + ":" + s.sd; }

inline std::optional<SNssai> parse_snssai(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto sst = parse_service_type(text.substr(0, colon));
  auto sd = text.substr(colon + 1);
  if (!sst || !is_valid_sd(sd)) return std::nullopt;
  return SNssai{*sst, std::string(sd)};
}

inline std::ostream& operator<<(std::ostream& os, const SNssai& s) { return os << to_string(s); }

using SnssaiSet = std::set<SNssai>;

inline std::string to_string(const SnssaiSet& set) {
  std::string out = "{";
  for (const auto& s : set) {
    if (out.size() > 1) out += ",";
    out += to_string(s);
  }
  return out + "}";
}

inline bool is_subset(const SnssaiSet& sub, const SnssaiSet& super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

inline constexpr std::size_t kMaxAllowedSlices = 8;

struct Subscription {
  SNssai snssai;
  bool is_default = false;

  auto operator<=>(const Subscription&) const = default;
};

using SubscribedSet = std::vector<Subscription>;

inline SnssaiSet subscribed_snssais(const SubscribedSet& subscribed) {
  SnssaiSet out;
  for (const auto& s : subscribed) out.insert(s.snssai);
  return out;
}

/// The four NSSAI sets a UE holds.
struct NssaiView {
  SnssaiSet configured;
  SubscribedSet subscribed;
  SnssaiSet allowed;
  std::optional<SnssaiSet> requested;
};

/// Returns the names of every NssaiView invariant the view violates.
inline std::vector<std::string> nssai_violations(const NssaiView& view) {
  std::vector<std::string> out;
  if (!is_subset(view.allowed, view.configured)) out.emplace_back("allowed-subset-of-configured");
  if (!is_subset(view.allowed, subscribed_snssais(view.subscribed)))
    out.emplace_back("allowed-subset-of-subscribed");
  if (view.allowed.size() > kMaxAllowedSlices) out.emplace_back("allowed-at-most-8");
  if (std::none_of(view.subscribed.begin(), view.subscribed.end(),
                   [](const Subscription& s) { return s.is_default; }))
    out.emplace_back("default-subscribed-snssai");
  return out;
}

enum class SessionType : std::uint8_t { IP, Ethernet, Unstructured };

inline std::string_view to_string(SessionType t) {
  switch (t) {
    case SessionType::IP: return "IP";
    case SessionType::Ethernet: return "Ethernet";
    case SessionType::Unstructured: return "Unstructured";
  }
  return "?";
}

inline std::optional<SessionType> parse_session_type(std::string_view s) {
  if (s == "IP") return SessionType::IP;
  if (s == "Ethernet") return SessionType::Ethernet;
  if (s == "Unstructured") return SessionType::Unstructured;
  return std::nullopt;
}

enum class SessionState : std::uint8_t { Inactive, Establishing, Active, Releasing, Released };

inline std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::Inactive: return "Inactive";
    case SessionState::Establishing: return "Establishing";
    case SessionState::Active: return "Active";
    case SessionState::Releasing: return "Releasing";
    case SessionState::Released: return "Released";
  }
  return "?";
}

inline bool is_legal_transition(SessionState from, SessionState to) {
  using S = SessionState;
  switch (from) {
    case S::Inactive: return to == S::Establishing;
    case S::Establishing: return to == S::Active || to == S::Released;
    case S::Active: return to == S::Releasing;
    case S::Releasing: return to == S::Released;
    case S::Released: return false;
  }
  return false;
}

class IllegalTransition : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct PduSession {
  SessionId session_id;
  SNssai snssai;
  std::string dn_name;
  SessionType session_type = SessionType::IP;
  SessionState state = SessionState::Inactive;
  std::optional<std::string> ip_prefix;
  NfId smf;
  std::vector<NfId> upfs;
  std::string policy_ref;

  /// Moves to `next`, refusing transitions outside the session lifecycle.
  void transition(SessionState next) {
    if (!is_legal_transition(state, next))
      throw IllegalTransition("session " + session_id.str() + ": " + std::string(to_string(state)) +
                              " -> " + std::string(to_string(next)));
    state = next;
    if (next == SessionState::Released) ip_prefix.reset();
  }
};

enum class RegistrationState : std::uint8_t { Deregistered, Registered };

struct UeContext {
  UeId ue_id;
  ServiceType service_type = ServiceType::eMBB;
  NfId serving_amf;
  NssaiView nssai;
  std::map<SessionId, PduSession> sessions;
  RegistrationState registration_state = RegistrationState::Registered;
  /// Per-UE slice preference; lower index is preferred.
  std::map<SNssai, int> priorities;

  const PduSession* active_session_on(const SNssai& s) const {
    for (const auto& [id, ps] : sessions)
      if (ps.snssai == s && ps.state == SessionState::Active) return &ps;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// NSSAI algebra

enum class RejectCause : std::uint8_t { NotSubscribed, NotConfigured };

inline std::string_view to_string(RejectCause c) {
  return c == RejectCause::NotSubscribed ? "NotSubscribed" : "NotConfigured";
}

struct VerificationResult {
  SnssaiSet accepted;
  std::map<SNssai, RejectCause> rejected;
};

class InvalidRequest : public ContractError {
 public:
  using ContractError::ContractError;
};

/// accepted = requested ∩ subscribed ∩ configured. A slice that is neither
/// configured nor subscribed is reported as NotConfigured.
inline VerificationResult verify_requested_nssai(const SnssaiSet& requested, const SubscribedSet& subscribed,
                                                 const SnssaiSet& configured) {
  if (requested.empty()) throw InvalidRequest("requested NSSAI is empty");
  const auto subs = subscribed_snssais(subscribed);
  VerificationResult out;
  for (const auto& s : requested) {
    if (!configured.contains(s))
      out.rejected.emplace(s, RejectCause::NotConfigured);
    else if (!subs.contains(s))
      out.rejected.emplace(s, RejectCause::NotSubscribed);
    else
      out.accepted.insert(s);
  }
  return out;
}

struct AllowedNssaiOverflow {
  std::size_t size = 0;
};

/// New allowed set after a registration-driven update. Overflow is an error,
/// never a truncation.
inline Result<SnssaiSet, AllowedNssaiOverflow> compute_allowed_nssai(const SnssaiSet& /*current_allowed*/,
                                                                    const SnssaiSet& accepted, bool remove_current,
                                                                    const std::optional<SNssai>& current_active) {
  SnssaiSet next = accepted;
  if (!remove_current && current_active) next.insert(*current_active);
  if (next.size() > kMaxAllowedSlices) return Result<SnssaiSet, AllowedNssaiOverflow>::failure({next.size()});
  return next;
}

enum class SelectionPolicy : std::uint8_t {
  /// Lowest priority index first, ties by sd; slices missing from the
  /// priority table rank after all listed ones.
  LowestPriorityIndex,
};

inline std::optional<SNssai> select_alternate_snssai(const NssaiView& view, ServiceType service_type,
                                                     const SNssai& exclude, const std::map<SNssai, int>& priorities,
                                                     SelectionPolicy policy = SelectionPolicy::LowestPriorityIndex) {
  (void)policy;
  std::optional<SNssai> best;
  auto rank = [&](const SNssai& s) {
    auto it = priorities.find(s);
    return std::pair{it == priorities.end() ? 1 : 0, it == priorities.end() ? 0 : it->second};
  };
  for (const auto& sub : view.subscribed) {
    const auto& s = sub.snssai;
    if (s == exclude || s.sst != service_type || !view.configured.contains(s)) continue;
    if (!best || std::pair{rank(s), s.sd} < std::pair{rank(*best), best->sd}) best = s;
  }
  return best;
}

}  // namespace slicesim
