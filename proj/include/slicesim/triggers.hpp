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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "slicesim/switching.hpp"

namespace slicesim {

enum class CauseGroup : std::uint8_t {
  SliceSpecificConditions,
  ServiceAppRequirements,
  SliceOwnerPreferences,
  IntraInterTechHandovers,
  UserPreferences,
};

enum class TriggerName : std::uint8_t {
  AccessNetworkConditions,
  SliceDelay,
  SliceBandwidth,
  Reliability,
  SliceStability,
  QosRequirements,
  SliceStressLoad,
  SubscriptionPolicies,
  PricingBilling,
  HorizontalHandover,
  VerticalHandover,
  MonetaryCosts,
  SliceIsolationLevel,
  SliceSecurity,
  SlicePolicies,
};

enum class Initiation : std::uint8_t { UeInitiated, NetworkTriggered, Either };

inline std::string_view to_string(Initiation i) {
  switch (i) {
    case Initiation::UeInitiated: return "UeInitiated";
    case Initiation::NetworkTriggered: return "NetworkTriggered";
    case Initiation::Either: return "Either";
  }
  return "?";
}

inline std::optional<Initiation> parse_initiation(std::string_view s) {
  for (auto i : {Initiation::UeInitiated, Initiation::NetworkTriggered, Initiation::Either})
    if (to_string(i) == s) return i;
  return std::nullopt;
}

struct CauseRow {
  TriggerName name;
  std::string_view label;
  CauseGroup group;
  Initiation initiation;
};

/// Handover cause taxonomy: each trigger, its cause group and the point
/// from which the switch is typically initiated.
inline constexpr std::array<CauseRow, 15> kCauseTable{{
    {TriggerName::AccessNetworkConditions, "AccessNetworkConditions", CauseGroup::SliceSpecificConditions,
     Initiation::UeInitiated},
    {TriggerName::SliceDelay, "SliceDelay", CauseGroup::SliceSpecificConditions, Initiation::UeInitiated},
    {TriggerName::SliceBandwidth, "SliceBandwidth", CauseGroup::SliceSpecificConditions,
     Initiation::NetworkTriggered},
    {TriggerName::Reliability, "Reliability", CauseGroup::SliceSpecificConditions, Initiation::UeInitiated},
    {TriggerName::SliceStability, "SliceStability", CauseGroup::SliceSpecificConditions, Initiation::Either},
    {TriggerName::QosRequirements, "QosRequirements", CauseGroup::ServiceAppRequirements, Initiation::UeInitiated},
    {TriggerName::SliceStressLoad, "SliceStressLoad", CauseGroup::SliceOwnerPreferences,
     Initiation::NetworkTriggered},
    {TriggerName::SubscriptionPolicies, "SubscriptionPolicies", CauseGroup::SliceOwnerPreferences,
     Initiation::NetworkTriggered},
    {TriggerName::PricingBilling, "PricingBilling", CauseGroup::SliceOwnerPreferences, Initiation::NetworkTriggered},
    {TriggerName::HorizontalHandover, "HorizontalHandover", CauseGroup::IntraInterTechHandovers,
     Initiation::UeInitiated},
    {TriggerName::VerticalHandover, "VerticalHandover", CauseGroup::IntraInterTechHandovers,
     Initiation::UeInitiated},
    {TriggerName::MonetaryCosts, "MonetaryCosts", CauseGroup::UserPreferences, Initiation::UeInitiated},
    {TriggerName::SliceIsolationLevel, "SliceIsolationLevel", CauseGroup::UserPreferences, Initiation::UeInitiated},
    {TriggerName::SliceSecurity, "SliceSecurity", CauseGroup::UserPreferences, Initiation::UeInitiated},
    {TriggerName::SlicePolicies, "SlicePolicies", CauseGroup::UserPreferences, Initiation::UeInitiated},
}};

inline const CauseRow& cause_row(TriggerName n) { return kCauseTable[static_cast<std::size_t>(n)]; }

inline std::string_view to_string(TriggerName n) { return cause_row(n).label; }

inline std::optional<TriggerName> parse_trigger_name(std::string_view s) {
  for (const auto& row : kCauseTable)
    if (row.label == s) return row.name;
  return std::nullopt;
}

/// True iff `initiation` is a legal initiation point for the trigger. Either
/// rows accept both concrete points.
inline bool validate_initiation(TriggerName name, Initiation initiation) {
  const auto typical = cause_row(name).initiation;
  if (typical == Initiation::Either) return true;
  return typical == initiation;
}

struct TriggerSpec {
  TriggerName trigger_name = TriggerName::SliceStressLoad;
  CauseGroup cause_group = CauseGroup::SliceOwnerPreferences;
  Initiation initiation = Initiation::NetworkTriggered;
  /// Scenario override resolving an Either row.
  std::optional<Initiation> override_initiation;
  Tick fire_at = 0;
  UeId ue_id;
  SNssai snssai;

  // Scenario knobs.
  TriggerMechanism network_mechanism = TriggerMechanism::UcuCommand;
  Initiator release_initiator = Initiator::SMF;
  std::optional<SNssai> target;
  bool tentative = false;
  std::optional<ReleaseTiming> release_timing;
  std::optional<bool> final_decision;
  int line = 0;

  Initiation effective_initiation() const { return override_initiation.value_or(initiation); }
};

struct FiredTrigger {
  const TriggerSpec* spec = nullptr;
  Initiation initiation = Initiation::UeInitiated;
  TriggerMechanism mechanism = TriggerMechanism::UeDecision;
};

/// Every trigger scheduled for exactly `now`, in script order, with the
/// switching mechanism it drives.
inline std::vector<FiredTrigger> evaluate_triggers(std::span<const TriggerSpec> script, Tick now) {
  std::vector<FiredTrigger> out;
  for (const auto& spec : script) {
    if (spec.fire_at != now) continue;
    const auto init = spec.effective_initiation();
    if (init == Initiation::Either)
      throw ContractError("trigger " + std::string(to_string(spec.trigger_name)) + " has unresolved initiation");
    FiredTrigger f{&spec, init, TriggerMechanism::UeDecision};
    if (init == Initiation::NetworkTriggered) f.mechanism = spec.network_mechanism;
    out.push_back(f);
  }
  return out;
}

}  // namespace slicesim
