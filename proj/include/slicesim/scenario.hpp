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

#include <yaml-cpp/yaml.h>

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "slicesim/nf.hpp"
#include "slicesim/procedures.hpp"
#include "slicesim/slice_model.hpp"
#include "slicesim/trace.hpp"
#include "slicesim/triggers.hpp"

namespace slicesim {

struct NfDecl {
  NfId id;
  NfKind kind = NfKind::AMF;
  SnssaiSet serving;
  // DN
  bool authorize = true;
  std::set<UeId> deny;
  // NWDAF
  std::map<SNssai, SliceAnalytics> analytics;
  int line = 0;
};

struct LinkLatency {
  NfId a;
  NfId b;
  Tick ticks = 1;
};

struct SessionDecl {
  SessionId id;
  SNssai snssai;
  std::string dn;
  SessionType type = SessionType::IP;
  int line = 0;
};

struct SubscriptionDecl {
  SNssai snssai;
  bool is_default = false;
  /// Data networks the subscriber may reach on this slice; empty = all.
  std::vector<std::string> dns;
  bool dn_authorized = true;
};

struct UeDecl {
  UeId id;
  ServiceType service_type = ServiceType::eMBB;
  NfId serving_amf;
  std::vector<SubscriptionDecl> subscriptions;
  SnssaiSet allowed;
  std::vector<SessionDecl> sessions;
  std::map<SNssai, int> priorities;
  int line = 0;
};

struct PolicyDecl {
  SNssai snssai;
  std::string dn;
  PolicyRecord record;
  int line = 0;
};

enum class TentativeDecision : std::uint8_t { AlwaysSwitch, NeverSwitch, NwdafLowerLoad };

inline std::string_view to_string(TentativeDecision d) {
  switch (d) {
    case TentativeDecision::AlwaysSwitch: return "always_switch";
    case TentativeDecision::NeverSwitch: return "never_switch";
    case TentativeDecision::NwdafLowerLoad: return "nwdaf_lower_load";
  }
  return "?";
}

struct ScenarioOptions {
  bool nssf_assist = false;
  ReleaseTiming release_timing = ReleaseTiming::Immediate;
  TentativeDecision tentative_decision = TentativeDecision::AlwaysSwitch;
  bool invariant_checks = false;
  /// Release-during-registration completes before Registration Accept when
  /// true; otherwise it starts right after Accept is sent.
  bool release_before_accept = true;
  /// UE processing time between consecutive procedures of a switch.
  Tick ue_step_delay = 1;
  Tick default_latency = 1;
  /// Upper bound of a uniform per-message latency addition, drawn from the
  /// run seed. Zero keeps the run seed-independent.
  Tick jitter = 0;
};

struct Scenario {
  std::string name = "scenario";
  SnssaiSet configured;
  std::vector<NfDecl> nfs;
  std::vector<LinkLatency> links;
  std::vector<UeDecl> ues;
  std::vector<PolicyDecl> policies;
  std::vector<TriggerSpec> triggers;
  ScenarioOptions options;

  const NfDecl* find_nf(const NfId& id) const {
    for (const auto& nf : nfs)
      if (nf.id == id) return &nf;
    return nullptr;
  }
  const UeDecl* find_ue(const UeId& id) const {
    for (const auto& ue : ues)
      if (ue.id == id) return &ue;
    return nullptr;
  }
};

struct Diagnostic {
  int line = 0;  // 1-based, 0 when unknown
  std::string message;
};

inline std::string format_diagnostic(const Diagnostic& d) {
  return d.line > 0 ? "line " + std::to_string(d.line) + ": " + d.message : d.message;
}

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<Diagnostic> diags)
      : std::runtime_error(join(diags)), diagnostics_(std::move(diags)) {}
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  static std::string join(const std::vector<Diagnostic>& diags) {
    std::string out;
    for (const auto& d : diags) out += (out.empty() ? "" : "\n") + format_diagnostic(d);
    return out.empty() ? "invalid scenario" : out;
  }
  std::vector<Diagnostic> diagnostics_;
};

namespace detail {

/// Converts YAML nodes into scenario fields, collecting diagnostics instead
/// of stopping at the first problem.
class ScenarioReader {
 public:
  std::vector<Diagnostic> diags;

  static int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

  void error(const YAML::Node& n, std::string msg) { diags.push_back({line_of(n), std::move(msg)}); }

  void check_keys(const YAML::Node& map, std::initializer_list<std::string_view> known, std::string_view where) {
    if (!map.IsMap()) return;
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (auto k : known) ok = ok || k == key;
      if (!ok) error(kv.first, "unknown field '" + key + "' in " + std::string(where));
    }
  }

  std::optional<std::string> str(const YAML::Node& n, std::string_view what) {
    if (!n || !n.IsScalar()) {
      error(n, std::string(what) + ": expected a scalar");
      return std::nullopt;
    }
    return n.as<std::string>();
  }

  template <typename T>
  std::optional<T> num(const YAML::Node& n, std::string_view what) {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      error(n, std::string(what) + ": expected a number");
      return std::nullopt;
    }
  }

  std::optional<bool> boolean(const YAML::Node& n, std::string_view what) {
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      error(n, std::string(what) + ": expected true/false");
      return std::nullopt;
    }
  }

  std::optional<SNssai> snssai(const YAML::Node& n) {
    auto s = str(n, "S-NSSAI");
    if (!s) return std::nullopt;
    auto v = parse_snssai(*s);
    if (!v) error(n, "malformed S-NSSAI '" + *s + "' (expected <URLLC|V2X|eMBB|MIoT>:<1-6 hex chars>)");
    return v;
  }

  /// Reads a list of S-NSSAIs; duplicates are reported.
  SnssaiSet snssai_list(const YAML::Node& n, std::string_view what) {
    SnssaiSet out;
    if (!n) return out;
    if (!n.IsSequence()) {
      error(n, std::string(what) + ": expected a list");
      return out;
    }
    for (const auto& item : n) {
      auto s = snssai(item);
      if (s && !out.insert(*s).second) error(item, std::string(what) + ": duplicate " + to_string(*s));
    }
    return out;
  }

  template <typename Fn>
  void each(const YAML::Node& n, std::string_view what, Fn&& fn) {
    if (!n) return;
    if (!n.IsSequence()) {
      error(n, std::string(what) + ": expected a list");
      return;
    }
    for (const auto& item : n) {
      if (!item.IsMap()) {
        error(item, std::string(what) + ": expected a mapping");
        continue;
      }
      fn(item);
    }
  }

  void read_options(const YAML::Node& n, ScenarioOptions& o) {
    if (!n) return;
    check_keys(n,
               {"nssf_assist", "release_timing", "tentative_decision", "invariant_checks",
                "registration_release_order", "ue_step_delay"},
               "options");
    if (n["nssf_assist"]) o.nssf_assist = boolean(n["nssf_assist"], "nssf_assist").value_or(false);
    if (n["invariant_checks"]) o.invariant_checks = boolean(n["invariant_checks"], "invariant_checks").value_or(false);
    if (auto v = n["release_timing"]) {
      if (auto s = str(v, "release_timing")) {
        if (auto t = parse_release_timing(*s))
          o.release_timing = *t;
        else
          error(v, "release_timing must be Immediate or Deferred");
      }
    }
    if (auto v = n["tentative_decision"]) {
      if (auto s = str(v, "tentative_decision")) {
        bool found = false;
        for (auto d : {TentativeDecision::AlwaysSwitch, TentativeDecision::NeverSwitch,
                       TentativeDecision::NwdafLowerLoad}) {
          if (to_string(d) == *s) {
            o.tentative_decision = d;
            found = true;
          }
        }
        if (!found) error(v, "unknown tentative_decision '" + *s + "'");
      }
    }
    if (auto v = n["registration_release_order"]) {
      if (auto s = str(v, "registration_release_order")) {
        if (*s == "BeforeAccept")
          o.release_before_accept = true;
        else if (*s == "AfterAccept")
          o.release_before_accept = false;
        else
          error(v, "registration_release_order must be BeforeAccept or AfterAccept");
      }
    }
    if (auto v = n["ue_step_delay"]) {
      if (auto d = num<Tick>(v, "ue_step_delay")) {
        if (*d < 0) error(v, "ue_step_delay must be >= 0");
        o.ue_step_delay = *d;
      }
    }
  }

  void read_latency(const YAML::Node& n, Scenario& sc) {
    if (!n) return;
    check_keys(n, {"default", "jitter", "links"}, "latency");
    if (auto v = n["default"]) {
      if (auto d = num<Tick>(v, "latency.default")) {
        if (*d < 0) error(v, "latency.default must be >= 0");
        sc.options.default_latency = *d;
      }
    }
    if (auto v = n["jitter"]) {
      if (auto d = num<Tick>(v, "latency.jitter")) {
        if (*d < 0) error(v, "latency.jitter must be >= 0");
        sc.options.jitter = *d;
      }
    }
    each(n["links"], "latency.links", [&](const YAML::Node& l) {
      check_keys(l, {"a", "b", "ticks"}, "latency link");
      LinkLatency link;
      if (auto a = str(l["a"], "link.a")) link.a = NfId(*a);
      if (auto b = str(l["b"], "link.b")) link.b = NfId(*b);
      if (auto t = num<Tick>(l["ticks"], "link.ticks")) {
        if (*t < 0) error(l["ticks"], "link ticks must be >= 0");
        link.ticks = *t;
      }
      sc.links.push_back(link);
    });
  }

  void read_nfs(const YAML::Node& n, Scenario& sc) {
    each(n, "nfs", [&](const YAML::Node& item) {
      check_keys(item, {"id", "kind", "serving", "authorize", "deny", "analytics"}, "nf");
      NfDecl nf;
      nf.line = line_of(item);
      if (auto id = str(item["id"], "nf.id")) nf.id = NfId(*id);
      if (auto k = str(item["kind"], "nf.kind")) {
        if (auto kind = parse_nf_kind(*k); kind && *kind != NfKind::UE)
          nf.kind = *kind;
        else
          error(item["kind"], "unknown NF kind '" + *k + "'");
      }
      nf.serving = snssai_list(item["serving"], "nf.serving");
      if (item["authorize"]) nf.authorize = boolean(item["authorize"], "authorize").value_or(true);
      if (auto d = item["deny"]; d && d.IsSequence())
        for (const auto& u : d)
          if (auto s = str(u, "deny")) nf.deny.insert(UeId(*s));
      each(item["analytics"], "analytics", [&](const YAML::Node& a) {
        check_keys(a, {"snssai", "load", "delay"}, "analytics");
        auto s = snssai(a["snssai"]);
        SliceAnalytics v;
        if (a["load"]) v.load = num<double>(a["load"], "load").value_or(0.0);
        if (a["delay"]) v.delay = num<double>(a["delay"], "delay").value_or(0.0);
        if (s) nf.analytics[*s] = v;
      });
      sc.nfs.push_back(std::move(nf));
    });
  }

  void read_ues(const YAML::Node& n, Scenario& sc) {
    each(n, "ues", [&](const YAML::Node& item) {
      check_keys(item, {"id", "service_type", "serving_amf", "subscriptions", "allowed", "sessions", "priorities"},
                 "ue");
      UeDecl ue;
      ue.line = line_of(item);
      if (auto id = str(item["id"], "ue.id")) ue.id = UeId(*id);
      if (auto st = str(item["service_type"], "ue.service_type")) {
        if (auto t = parse_service_type(*st))
          ue.service_type = *t;
        else
          error(item["service_type"], "unknown service type '" + *st + "'");
      }
      if (auto amf = str(item["serving_amf"], "ue.serving_amf")) ue.serving_amf = NfId(*amf);
      each(item["subscriptions"], "subscriptions", [&](const YAML::Node& s) {
        check_keys(s, {"snssai", "default", "dns", "dn_authorized"}, "subscription");
        SubscriptionDecl sub;
        if (auto v = snssai(s["snssai"])) sub.snssai = *v;
        if (s["default"]) sub.is_default = boolean(s["default"], "default").value_or(false);
        if (s["dn_authorized"]) sub.dn_authorized = boolean(s["dn_authorized"], "dn_authorized").value_or(true);
        if (auto d = s["dns"]; d && d.IsSequence())
          for (const auto& dn : d)
            if (auto v = str(dn, "dns")) sub.dns.push_back(*v);
        ue.subscriptions.push_back(std::move(sub));
      });
      if (item["allowed"]) {
        // Duplicates are legal YAML but count towards nothing; keep the set.
        ue.allowed = snssai_list(item["allowed"], "allowed");
      }
      each(item["sessions"], "sessions", [&](const YAML::Node& s) {
        check_keys(s, {"id", "snssai", "dn", "type"}, "session");
        SessionDecl sd;
        sd.line = line_of(s);
        if (auto v = str(s["id"], "session.id")) sd.id = SessionId(*v);
        if (auto v = snssai(s["snssai"])) sd.snssai = *v;
        if (auto v = str(s["dn"], "session.dn")) sd.dn = *v;
        if (auto t = s["type"]) {
          if (auto v = str(t, "session.type")) {
            if (auto pt = parse_session_type(*v))
              sd.type = *pt;
            else
              error(t, "unknown session type '" + *v + "'");
          }
        }
        ue.sessions.push_back(std::move(sd));
      });
      each(item["priorities"], "priorities", [&](const YAML::Node& p) {
        check_keys(p, {"snssai", "index"}, "priority");
        auto s = snssai(p["snssai"]);
        auto idx = num<int>(p["index"], "priority.index");
        if (s && idx) ue.priorities[*s] = *idx;
      });
      sc.ues.push_back(std::move(ue));
    });
  }

  void read_policies(const YAML::Node& n, Scenario& sc) {
    each(n, "policies", [&](const YAML::Node& item) {
      check_keys(item, {"snssai", "dn", "qos", "charging"}, "policy");
      PolicyDecl p;
      p.line = line_of(item);
      if (auto s = snssai(item["snssai"])) p.snssai = *s;
      if (auto d = str(item["dn"], "policy.dn")) p.dn = *d;
      p.record.qos_profile = item["qos"] ? item["qos"].as<std::string>() : "qos-default";
      p.record.charging_profile = item["charging"] ? item["charging"].as<std::string>() : "chg-default";
      sc.policies.push_back(std::move(p));
    });
  }

  void read_triggers(const YAML::Node& n, Scenario& sc) {
    each(n, "triggers", [&](const YAML::Node& item) {
      check_keys(item,
                 {"at", "ue", "snssai", "trigger", "initiation", "mechanism", "release_initiator", "target", "mode",
                  "release_timing", "decision"},
                 "trigger");
      TriggerSpec t;
      t.line = line_of(item);
      if (auto at = num<Tick>(item["at"], "trigger.at")) t.fire_at = *at;
      if (auto ue = str(item["ue"], "trigger.ue")) t.ue_id = UeId(*ue);
      if (auto s = snssai(item["snssai"])) t.snssai = *s;
      if (auto name = str(item["trigger"], "trigger.trigger")) {
        if (auto tn = parse_trigger_name(*name)) {
          t.trigger_name = *tn;
          t.cause_group = cause_row(*tn).group;
          t.initiation = cause_row(*tn).initiation;
        } else {
          error(item["trigger"], "unknown trigger '" + *name + "'");
        }
      }
      if (auto v = item["initiation"]) {
        if (auto s = str(v, "trigger.initiation")) {
          if (auto i = parse_initiation(*s))
            t.override_initiation = *i;
          else
            error(v, "unknown initiation '" + *s + "'");
        }
      }
      if (auto v = item["mechanism"]) {
        if (auto s = str(v, "trigger.mechanism")) {
          if (*s == "UcuCommand")
            t.network_mechanism = TriggerMechanism::UcuCommand;
          else if (*s == "NetworkRelease")
            t.network_mechanism = TriggerMechanism::NetworkRelease;
          else
            error(v, "mechanism must be UcuCommand or NetworkRelease");
        }
      }
      if (auto v = item["release_initiator"]) {
        if (auto s = str(v, "trigger.release_initiator")) {
          auto i = parse_initiator(*s);
          if (i && *i != Initiator::UE)
            t.release_initiator = *i;
          else
            error(v, "release_initiator must be AMF, SMF or PCF");
        }
      }
      if (auto v = item["target"]) t.target = snssai(v);
      if (auto v = item["mode"]) {
        if (auto s = str(v, "trigger.mode")) {
          if (*s == "tentative")
            t.tentative = true;
          else if (*s != "definitive")
            error(v, "mode must be definitive or tentative");
        }
      }
      if (auto v = item["release_timing"]) {
        if (auto s = str(v, "trigger.release_timing")) {
          t.release_timing = parse_release_timing(*s);
          if (!t.release_timing) error(v, "release_timing must be Immediate or Deferred");
        }
      }
      if (auto v = item["decision"]) {
        if (auto s = str(v, "trigger.decision")) {
          if (*s == "switch")
            t.final_decision = true;
          else if (*s == "stay")
            t.final_decision = false;
          else
            error(v, "decision must be switch or stay");
        }
      }
      sc.triggers.push_back(std::move(t));
    });
  }
};

}  // namespace detail

/// Referential-integrity and slice-model checks over a parsed scenario.
inline std::vector<Diagnostic> validate_scenario(const Scenario& sc) {
  std::vector<Diagnostic> out;
  auto err = [&](int line, std::string msg) { out.push_back({line, std::move(msg)}); };

  std::set<NfId> nf_ids;
  std::map<NfKind, int> kind_count;
  for (const auto& nf : sc.nfs) {
    if (nf.id.empty()) err(nf.line, "NF without id");
    if (!nf_ids.insert(nf.id).second) err(nf.line, "duplicate NF id '" + nf.id.str() + "'");
    ++kind_count[nf.kind];
    for (const auto& s : nf.serving)
      if (!sc.configured.contains(s))
        err(nf.line, "NF '" + nf.id.str() + "' serves " + to_string(s) + " which is not in the configured NSSAI");
    if (nf.kind == NfKind::UPF && nf.serving.size() != 1)
      err(nf.line, "UPF '" + nf.id.str() + "' must belong to exactly one slice");
    for (const auto& u : nf.deny)
      if (!sc.find_ue(u)) err(nf.line, "DN '" + nf.id.str() + "' denies unknown UE '" + u.str() + "'");
  }
  for (auto k : {NfKind::AMF, NfKind::UDM, NfKind::NSSF, NfKind::PCF, NfKind::RAN})
    if (kind_count[k] == 0) err(0, "scenario declares no " + std::string(to_string(k)));
  for (auto k : {NfKind::UDM, NfKind::UDR, NfKind::NSSF, NfKind::PCF, NfKind::RAN, NfKind::NWDAF})
    if (kind_count[k] > 1) err(0, "at most one " + std::string(to_string(k)) + " is supported");

  auto nf_of_kind = [&](const NfId& id, NfKind k) {
    const auto* nf = sc.find_nf(id);
    return nf && nf->kind == k;
  };
  auto smf_for = [&](const SNssai& s) {
    for (const auto& nf : sc.nfs)
      if (nf.kind == NfKind::SMF && nf.serving.contains(s)) return true;
    return false;
  };
  auto upf_for = [&](const SNssai& s) {
    for (const auto& nf : sc.nfs)
      if (nf.kind == NfKind::UPF && nf.serving.contains(s)) return true;
    return false;
  };

  for (const auto& l : sc.links) {
    if (!nf_ids.contains(l.a) && !sc.find_ue(UeId(l.a.str())))
      err(0, "latency link references unknown node '" + l.a.str() + "'");
    if (!nf_ids.contains(l.b) && !sc.find_ue(UeId(l.b.str())))
      err(0, "latency link references unknown node '" + l.b.str() + "'");
  }

  std::set<UeId> ue_ids;
  std::set<SessionId> session_ids;
  for (const auto& ue : sc.ues) {
    const auto who = "UE '" + ue.id.str() + "'";
    if (ue.id.empty()) err(ue.line, "UE without id");
    if (!ue_ids.insert(ue.id).second) err(ue.line, "duplicate UE id '" + ue.id.str() + "'");
    if (nf_ids.contains(NfId(ue.id.str()))) err(ue.line, who + " id collides with an NF id");
    if (!nf_of_kind(ue.serving_amf, NfKind::AMF))
      err(ue.line, who + ": serving_amf '" + ue.serving_amf.str() + "' is not a declared AMF");

    NssaiView view;
    view.configured = sc.configured;
    view.allowed = ue.allowed;
    std::set<SNssai> subs;
    for (const auto& s : ue.subscriptions) {
      view.subscribed.push_back({s.snssai, s.is_default});
      if (!subs.insert(s.snssai).second) err(ue.line, who + ": duplicate subscription " + to_string(s.snssai));
      for (const auto& dn : s.dns)
        if (!nf_of_kind(NfId(dn), NfKind::DN)) err(ue.line, who + ": subscription names unknown DN '" + dn + "'");
    }
    for (const auto& v : nssai_violations(view)) {
      if (v == "allowed-at-most-8")
        err(ue.line, who + ": allowed NSSAI has " + std::to_string(view.allowed.size()) +
                         " slices, violating the max-8 invariant (allowed-at-most-8)");
      else
        err(ue.line, who + ": initial state violates " + v);
    }
    if (const auto* amf = sc.find_nf(ue.serving_amf); amf && amf->kind == NfKind::AMF)
      if (!is_subset(ue.allowed, amf->serving))
        err(ue.line, who + ": serving AMF cannot serve the allowed NSSAI " + to_string(ue.allowed));
    for (const auto& [s, idx] : ue.priorities)
      if (!subs.contains(s)) err(ue.line, who + ": priority for unsubscribed slice " + to_string(s));

    std::set<std::pair<SNssai, std::string>> active_pairs;
    for (const auto& ps : ue.sessions) {
      if (ps.id.empty()) err(ps.line, who + ": session without id");
      if (!session_ids.insert(ps.id).second) err(ps.line, "duplicate session id '" + ps.id.str() + "'");
      if (!ue.allowed.contains(ps.snssai))
        err(ps.line, who + ": session on " + to_string(ps.snssai) + " outside the allowed NSSAI");
      if (ps.snssai.sst != ue.service_type)
        err(ps.line, who + ": session slice " + to_string(ps.snssai) + " has a different service type");
      if (!nf_of_kind(NfId(ps.dn), NfKind::DN)) err(ps.line, who + ": session references unknown DN '" + ps.dn + "'");
      if (!smf_for(ps.snssai)) err(ps.line, who + ": no SMF serves " + to_string(ps.snssai));
      if (!upf_for(ps.snssai)) err(ps.line, who + ": no UPF serves " + to_string(ps.snssai));
      if (!active_pairs.insert({ps.snssai, ps.dn}).second)
        err(ps.line, who + ": two sessions for the same slice and DN");
    }
  }

  for (const auto& p : sc.policies) {
    if (!sc.configured.contains(p.snssai)) err(p.line, "policy for unconfigured slice " + to_string(p.snssai));
    if (!nf_of_kind(NfId(p.dn), NfKind::DN)) err(p.line, "policy references unknown DN '" + p.dn + "'");
  }

  for (const auto& t : sc.triggers) {
    const auto* ue = sc.find_ue(t.ue_id);
    if (!ue) err(t.line, "trigger references unknown UE '" + t.ue_id.str() + "'");
    if (!sc.configured.contains(t.snssai))
      err(t.line, "trigger references undefined slice " + to_string(t.snssai));
    if (t.target && !sc.configured.contains(*t.target))
      err(t.line, "trigger target " + to_string(*t.target) + " is not a configured slice");
    if (t.fire_at < 0) err(t.line, "trigger fires before t=0");
    const auto init = t.effective_initiation();
    if (init == Initiation::Either)
      err(t.line, "trigger " + std::string(to_string(t.trigger_name)) +
                      " may be UE- or network-initiated; set 'initiation' to disambiguate");
    else if (!validate_initiation(t.trigger_name, init))
      err(t.line, "trigger " + std::string(to_string(t.trigger_name)) + " cannot be " +
                      std::string(to_string(init)));
    if (t.tentative && init == Initiation::NetworkTriggered)
      err(t.line, "tentative mode is only valid for UE-initiated triggers");
  }
  return out;
}

/// Parses scenario text. Returns the scenario together with every parse and
/// validation diagnostic.
inline std::pair<Scenario, std::vector<Diagnostic>> parse_scenario(const std::string& text) {
  Scenario sc;
  detail::ScenarioReader rd;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    return {sc, {{e.mark.line + 1, "YAML syntax error: " + e.msg}}};
  }
  if (!root.IsMap()) return {sc, {{1, "scenario must be a mapping"}}};
  try {
    rd.check_keys(root, {"name", "plmn", "options", "latency", "nfs", "ues", "policies", "triggers"}, "scenario");
    if (root["name"]) sc.name = root["name"].as<std::string>();
    if (auto plmn = root["plmn"]) {
      rd.check_keys(plmn, {"configured"}, "plmn");
      sc.configured = rd.snssai_list(plmn["configured"], "plmn.configured");
    } else {
      rd.diags.push_back({0, "missing 'plmn' section"});
    }
    rd.read_options(root["options"], sc.options);
    rd.read_latency(root["latency"], sc);
    rd.read_nfs(root["nfs"], sc);
    rd.read_ues(root["ues"], sc);
    rd.read_policies(root["policies"], sc);
    rd.read_triggers(root["triggers"], sc);
  } catch (const YAML::Exception& e) {
    rd.diags.push_back({e.mark.is_null() ? 0 : e.mark.line + 1, e.msg});
  }
  auto diags = std::move(rd.diags);
  if (diags.empty()) diags = validate_scenario(sc);
  return {std::move(sc), std::move(diags)};
}

/// Loads and validates; throws ScenarioError listing every problem.
inline Scenario load_scenario_text(const std::string& text) {
  auto [sc, diags] = parse_scenario(text);
  if (!diags.empty()) throw ScenarioError(std::move(diags));
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ScenarioError({{0, e.what()}});
  }
  return load_scenario_text(text);
}

}  // namespace slicesim
