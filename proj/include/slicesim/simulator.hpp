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
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "slicesim/event_queue.hpp"
#include "slicesim/messages.hpp"
#include "slicesim/nf.hpp"
#include "slicesim/procedures.hpp"
#include "slicesim/scenario.hpp"
#include "slicesim/slice_model.hpp"
#include "slicesim/switching.hpp"
#include "slicesim/trace.hpp"
#include "slicesim/triggers.hpp"

namespace slicesim {

/// A broken model invariant, tagged with the invariant's name and the
/// sequence number of the event during which it was detected.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(std::string invariant, std::int64_t seq, const std::string& detail)
      : std::runtime_error("invariant '" + invariant + "' violated at event seq " + std::to_string(seq) + ": " +
                           detail),
        invariant_(std::move(invariant)),
        seq_(seq) {}

  const std::string& invariant() const noexcept { return invariant_; }
  std::int64_t seq() const noexcept { return seq_; }

 private:
  std::string invariant_;
  std::int64_t seq_;
};

struct TriggerFireRef {
  std::size_t index = 0;
  Initiation initiation = Initiation::UeInitiated;
  TriggerMechanism mechanism = TriggerMechanism::UeDecision;
};

enum class TimerKind : std::uint8_t { UeNextStep, FinalDecision, NoCandidateSlice };

inline std::string_view to_string(TimerKind k) {
  switch (k) {
    case TimerKind::UeNextStep: return "UeNextStep";
    case TimerKind::FinalDecision: return "FinalDecision";
    case TimerKind::NoCandidateSlice: return "NoCandidateSlice";
  }
  return "?";
}

struct TimerRef {
  TimerKind kind = TimerKind::UeNextStep;
  int switch_id = -1;
};

using EventPayload = std::variant<SignalingMessage, TriggerFireRef, TimerRef>;

/// Knobs of one switching case that do not come from its classification.
struct CaseParams {
  Initiator network_release_initiator = Initiator::SMF;
  std::optional<bool> final_decision;
  /// Data network for the new session when the UE has no session to move.
  std::string dn;
};

class Simulator {
 public:
  explicit Simulator(Scenario scenario, std::uint64_t seed = 0, std::optional<bool> check_invariants = std::nullopt)
      : sc_(std::move(scenario)),
        seed_(seed),
        rng_(seed),
        check_(check_invariants.value_or(sc_.options.invariant_checks)) {
    build_network();
    schedule_triggers();
  }

  // --- event loop -----------------------------------------------------------

  Tick now() const noexcept { return queue_.now(); }
  bool idle() const noexcept { return queue_.empty(); }
  std::int64_t events_processed() const noexcept { return queue_.processed(); }

  /// Schedules an externally built event; used by tests of the queue contract.
  std::int64_t schedule(Tick at, EventKind kind, EventPayload payload) {
    return queue_.schedule(at, kind, std::move(payload));
  }

  /// Processes exactly one event. Returns false when the queue is empty.
  bool step() {
    if (queue_.empty()) return false;
    auto ev = queue_.advance();
    current_seq_ = ev.seq;
    TraceRecord rec;
    rec.seq = ev.seq;
    rec.at = ev.at;
    rec.kind = ev.kind;
    try {
      if (auto* msg = std::get_if<SignalingMessage>(&ev.payload)) {
        describe(*msg, rec);
        count_delivery(*msg);
        for (auto& out : nf_handle(*msg, now())) queue_.schedule(out.delivered_at, EventKind::MessageDelivery, out);
      } else if (auto* trig = std::get_if<TriggerFireRef>(&ev.payload)) {
        on_trigger(*trig, rec);
      } else if (auto* timer = std::get_if<TimerRef>(&ev.payload)) {
        on_timer(*timer, rec);
      }
      flush();
    } catch (const IllegalTransition& e) {
      throw InvariantViolation("session-state-transition", ev.seq, e.what());
    }
    trace_.push_back(std::move(rec));
    if (check_) check_invariants(ev.seq);
    return true;
  }

  /// Runs until the queue drains or the clock would pass `until`.
  void run(Tick until = std::numeric_limits<Tick>::max()) {
    while (!queue_.empty() && queue_.peek().at <= until) step();
  }

  // --- observation ------------------------------------------------------------

  const Scenario& scenario() const noexcept { return sc_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<TraceRecord>& trace() const noexcept { return trace_; }
  const std::vector<SwitchOutcome>& outcomes() const noexcept { return outcomes_; }
  const std::map<std::string, std::int64_t>& message_totals() const noexcept { return totals_; }
  std::int64_t rejected_triggers() const noexcept { return rejected_triggers_; }
  const ProcedureRun& procedure(ProcId id) const { return runs_.at(static_cast<std::size_t>(id)); }
  const std::vector<ProcedureRun>& procedures() const noexcept { return runs_; }

  NfInstance& nf(const NfId& id) {
    auto it = nfs_.find(id);
    if (it == nfs_.end()) throw ContractError("unknown NF '" + id.str() + "'");
    return it->second;
  }
  const NfInstance& nf(const NfId& id) const { return const_cast<Simulator*>(this)->nf(id); }

  UeContext& ue(const UeId& id) {
    auto& inst = nf(NfId(id.str()));
    if (inst.kind != NfKind::UE) throw ContractError("'" + id.str() + "' is not a UE");
    return inst.state<UeContext>();
  }
  const UeContext& ue(const UeId& id) const { return const_cast<Simulator*>(this)->ue(id); }

  std::vector<const NfInstance*> instances_of(NfKind kind) const {
    std::vector<const NfInstance*> out;
    for (const auto& [id, inst] : nfs_)
      if (inst.kind == kind) out.push_back(&inst);
    return out;
  }

  /// The AMF that currently holds the UE's context.
  std::optional<NfId> amf_holding(const UeId& ue_id) const {
    for (const auto& [id, inst] : nfs_)
      if (inst.kind == NfKind::AMF && inst.state<AmfState>().ues.contains(ue_id)) return id;
    return std::nullopt;
  }

  /// N4 sessions, allocated prefixes and RAN tokens still attributed to a
  /// session. All three are zero once it has been released.
  struct SessionResources {
    int n4 = 0;
    int prefixes = 0;
    int ran_tokens = 0;
    int total() const { return n4 + prefixes + ran_tokens; }
  };

  SessionResources resources_of(const SessionId& sid) const {
    SessionResources r;
    for (const auto& [id, inst] : nfs_) {
      if (inst.kind == NfKind::UPF) r.n4 += static_cast<int>(inst.state<UpfState>().n4.count(sid));
      if (inst.kind == NfKind::SMF) {
        const auto& smf = inst.state<SmfState>();
        if (smf.allocated_prefixes.contains(prefix_for(sid))) ++r.prefixes;
      }
      if (inst.kind == NfKind::RAN) r.ran_tokens += static_cast<int>(inst.state<RanState>().resources.count(sid));
    }
    return r;
  }

  // --- network functions ------------------------------------------------------

  /// Delivers one message to its destination NF and returns what the NF
  /// sends in response.
  std::vector<SignalingMessage> nf_handle(const SignalingMessage& msg, Tick at) {
    if (at < now()) throw SchedulingError("nf_handle in the past");
    auto it = nfs_.find(msg.dst);
    if (it == nfs_.end()) throw ContractError("message to unknown NF '" + msg.dst.str() + "'");
    auto& inst = it->second;
    handling_at_ = at;
    struct Reset {
      std::optional<Tick>& t;
      ~Reset() { t.reset(); }
    } reset{handling_at_};
    bool handled = false;
    switch (inst.kind) {
      case NfKind::AMF: handled = handle_amf(inst, msg); break;
      case NfKind::SMF: handled = handle_smf(inst, msg); break;
      case NfKind::NSSF: handled = handle_nssf(inst, msg); break;
      case NfKind::UDM: handled = handle_udm(inst, msg); break;
      case NfKind::UDR: handled = false; break;
      case NfKind::PCF: handled = handle_pcf(inst, msg); break;
      case NfKind::UPF: handled = handle_upf(inst, msg); break;
      case NfKind::NWDAF: handled = handle_nwdaf(inst, msg); break;
      case NfKind::RAN: handled = handle_ran(inst, msg); break;
      case NfKind::DN: handled = handle_dn(inst, msg); break;
      case NfKind::UE: handled = handle_ue(inst, msg); break;
    }
    if (!handled && msg.name == MessageName::ProcedureFailure) {
      finish_proc(msg.correlates, false, msg.reason);
      handled = true;
    }
    if (!handled) {
      emit(MessageName::ProcedureFailure, inst.nf_id, msg.src, msg.correlates, [&](SignalingMessage& m) {
        m.ue = msg.ue;
        m.session = msg.session;
        m.reason = FailureReason::UnknownMessage;
      });
    }
    std::vector<SignalingMessage> out;
    out.swap(out_);
    return out;
  }

  // --- procedures -------------------------------------------------------------

  ProcId start_ue_configuration_update(const UeId& ue_id, const SnssaiSet& new_allowed) {
    auto id = begin_ucu(ue_id, new_allowed, -1);
    flush();
    return id;
  }
  ProcId start_registration(const UeId& ue_id, const SnssaiSet& requested, bool remove_current,
                            std::optional<SNssai> current_active = std::nullopt) {
    auto id = begin_registration(ue_id, requested, remove_current, current_active, -1);
    flush();
    return id;
  }
  ProcId start_pdu_session_release(const UeId& ue_id, const SessionId& sid, Initiator initiator) {
    auto id = begin_release(ue_id, sid, initiator, kNoProc, -1);
    flush();
    return id;
  }
  ProcId start_pdu_session_establishment(const UeId& ue_id, const SNssai& snssai, const std::string& dn,
                                         SessionType type = SessionType::IP) {
    auto id = begin_establishment(ue_id, snssai, dn, type, std::nullopt, -1);
    flush();
    return id;
  }

  /// Runs the event loop until `id` finishes and returns its record.
  const ProcedureRun& run_until_finished(ProcId id) {
    while (!procedure(id).finished() && step()) {
    }
    return procedure(id);
  }

  ProcedureRun run_ue_configuration_update(const UeId& ue_id, const SnssaiSet& new_allowed) {
    return run_until_finished(start_ue_configuration_update(ue_id, new_allowed));
  }
  ProcedureRun run_registration(const UeId& ue_id, const SnssaiSet& requested, bool remove_current,
                                std::optional<SNssai> current_active = std::nullopt) {
    return run_until_finished(start_registration(ue_id, requested, remove_current, current_active));
  }
  ProcedureRun run_pdu_session_release(const UeId& ue_id, const SessionId& sid, Initiator initiator) {
    return run_until_finished(start_pdu_session_release(ue_id, sid, initiator));
  }
  ProcedureRun run_pdu_session_establishment(const UeId& ue_id, const SNssai& snssai, const std::string& dn) {
    return run_until_finished(start_pdu_session_establishment(ue_id, snssai, dn));
  }

  // --- switching cases -------------------------------------------------------

  int start_case(const SwitchingCase& kase, const UeId& ue_id, const SNssai& old, std::optional<SNssai> target,
                 CaseParams params = {}) {
    auto id = begin_case(kase, ue_id, old, target, std::move(params));
    flush();
    return id;
  }

  /// Runs a switching case to completion and returns its outcome.
  SwitchOutcome execute_case(const SwitchingCase& kase, const UeId& ue_id, const SNssai& old,
                             std::optional<SNssai> target, CaseParams params = {}) {
    const int id = start_case(kase, ue_id, old, target, std::move(params));
    while (!switches_.at(static_cast<std::size_t>(id)).done && step()) {
    }
    return switch_outcome(id);
  }

  const SwitchOutcome& switch_outcome(int id) const {
    for (const auto& o : outcomes_)
      if (o.switch_id == id) return o;
    throw ContractError("switch " + std::to_string(id) + " has not completed");
  }

  bool switch_done(int id) const { return switches_.at(static_cast<std::size_t>(id)).done; }

  /// Predicts the case a trigger would run as, without starting it.
  std::optional<SwitchingCase> classify_for(const UeId& ue_id, const SNssai& old, CaseInitiator initiator,
                                            TriggerMechanism mech, std::optional<SNssai> target,
                                            bool tentative) const {
    const auto& u = ue(ue_id);
    if (!target) return classify_case(initiator, mech, false, false, tentative);
    const bool in_allowed = *target != old && u.nssai.allowed.contains(*target);
    if (in_allowed && tentative) return std::nullopt;
    SnssaiSet requested = u.nssai.allowed;
    requested.erase(old);
    requested.insert(*target);
    auto predicted = verify_requested_nssai(requested, u.nssai.subscribed, u.nssai.configured).accepted;
    if (tentative) predicted.insert(old);
    bool relocation = false;
    if (auto amf = amf_holding(ue_id)) relocation = !amf_can_serve(nf(*amf), predicted);
    return classify_case(initiator, mech, in_allowed, relocation, tentative);
  }

  static std::string prefix_for(const SessionId& sid) { return "pfx-" + sid.str(); }

 private:
  enum class SwitchStep : std::uint8_t { Ucu, NetworkRelease, UeRelease, Registration, FinalDecision, Establishment };

  struct SwitchRun {
    SwitchOutcome outcome;
    SwitchingCase kase;
    CaseParams params;
    std::optional<SessionId> old_session;
    std::string dn;
    SessionType session_type = SessionType::IP;
    std::vector<SwitchStep> plan;
    std::size_t next = 0;
    std::set<ProcId> pending;
    std::vector<ProcId> procs;
    bool done = false;
    bool failed = false;
    bool stay = false;
    FailureReason failure = FailureReason::None;
  };

  // --- construction ----------------------------------------------------------

  void build_network() {
    std::optional<NfId> udr;
    for (const auto& decl : sc_.nfs) {
      NfInstance inst{decl.id, decl.kind, decl.serving, make_state_store(decl.kind)};
      if (decl.kind == NfKind::DN) inst.state<DnState>() = DnState{decl.authorize, decl.deny};
      if (decl.kind == NfKind::NWDAF) inst.state<NwdafState>().slices = decl.analytics;
      if (decl.kind == NfKind::NSSF) inst.state<NssfState>().configured = sc_.configured;
      nfs_.emplace(decl.id, std::move(inst));
      switch (decl.kind) {
        case NfKind::UDM: udm_ = decl.id; break;
        case NfKind::UDR: udr = decl.id; break;
        case NfKind::NSSF: nssf_ = decl.id; break;
        case NfKind::PCF: pcf_ = decl.id; break;
        case NfKind::RAN: ran_ = decl.id; break;
        default: break;
      }
    }
    if (!udr) {
      udr = NfId(nfs_.contains(NfId("udr")) ? "udr-implicit" : "udr");
      nfs_.emplace(*udr, NfInstance{*udr, NfKind::UDR, {}, UdrState{}});
    }
    udr_ = *udr;
    for (const auto& l : sc_.links) {
      latency_[{l.a, l.b}] = l.ticks;
      latency_[{l.b, l.a}] = l.ticks;
    }

    auto& pcf = nf(pcf_).state<PcfState>();
    for (const auto& p : sc_.policies) pcf.policies[{p.snssai, p.dn}] = p.record;

    std::vector<std::string> dns;
    for (const auto& decl : sc_.nfs)
      if (decl.kind == NfKind::DN) dns.push_back(decl.id.str());

    auto& records = nf(udr_).state<UdrState>().subscriptions;
    for (const auto& decl : sc_.ues) {
      UeContext ctx;
      ctx.ue_id = decl.id;
      ctx.service_type = decl.service_type;
      ctx.serving_amf = decl.serving_amf;
      ctx.nssai.configured = sc_.configured;
      ctx.nssai.allowed = decl.allowed;
      ctx.priorities = decl.priorities;
      SubscriptionRecord rec;
      rec.ue_id = decl.id;
      for (const auto& s : decl.subscriptions) {
        ctx.nssai.subscribed.push_back({s.snssai, s.is_default});
        rec.subscribed.push_back({s.snssai, s.is_default});
        for (const auto& dn : (s.dns.empty() ? dns : s.dns))
          rec.sm_data[{s.snssai, dn}] = SmSubscription{{SessionType::IP, SessionType::Ethernet, SessionType::Unstructured},
                                                       s.dn_authorized};
      }
      records[decl.id] = rec;

      auto& amf_ctx = nf(decl.serving_amf).state<AmfState>().ues[decl.id];
      amf_ctx.allowed = decl.allowed;

      for (const auto& sd : decl.sessions) {
        PduSession ps;
        ps.session_id = sd.id;
        ps.snssai = sd.snssai;
        ps.dn_name = sd.dn;
        ps.session_type = sd.type;
        ps.smf = *smf_for(sd.snssai);
        ps.upfs = upfs_for(sd.snssai);
        ps.policy_ref = policy_ref(sd.snssai, sd.dn);
        ps.transition(SessionState::Establishing);
        ps.transition(SessionState::Active);
        ps.ip_prefix = prefix_for(sd.id);

        SmContext sm{sd.id, decl.id, sd.snssai, sd.dn, sd.type, SmContextState::Active, ps.upfs, {}, ps.ip_prefix,
                     ps.policy_ref};
        auto& smf = nf(ps.smf).state<SmfState>();
        smf.contexts[sd.id] = sm;
        smf.allocated_prefixes.insert(*ps.ip_prefix);
        for (const auto& upf : ps.upfs) nf(upf).state<UpfState>().n4[sd.id] = make_n4(sd.id, ps.smf, upf);
        nf(ran_).state<RanState>().resources.insert(sd.id);
        amf_ctx.sessions[sd.id] = {sd.snssai, ps.smf};
        ctx.sessions[sd.id] = std::move(ps);
      }
      NfId ue_nf(decl.id.str());
      nfs_.emplace(ue_nf, NfInstance{ue_nf, NfKind::UE, {}, std::move(ctx)});
    }
  }

  void schedule_triggers() {
    std::set<Tick> times;
    for (const auto& t : sc_.triggers) times.insert(t.fire_at);
    for (Tick t : times) {
      for (const auto& fired : evaluate_triggers(sc_.triggers, t)) {
        const auto index = static_cast<std::size_t>(fired.spec - sc_.triggers.data());
        queue_.schedule(t, EventKind::TriggerFire, TriggerFireRef{index, fired.initiation, fired.mechanism});
      }
    }
  }

  // --- helpers ---------------------------------------------------------------

  static N4Session make_n4(const SessionId& sid, const NfId& smf, const NfId& upf) {
    return N4Session{sid, smf, upf, {"pdr-" + sid.str(), "far-" + sid.str(), "urr-" + sid.str()}};
  }

  static std::string policy_ref(const SNssai& s, const std::string& dn) { return "pol-" + to_string(s) + "-" + dn; }

  std::optional<NfId> smf_for(const SNssai& s) const {
    for (const auto& [id, inst] : nfs_)
      if (inst.kind == NfKind::SMF && inst.serving_snssais.contains(s)) return id;
    return std::nullopt;
  }

  std::vector<NfId> upfs_for(const SNssai& s) const {
    std::vector<NfId> out;
    for (const auto& [id, inst] : nfs_)
      if (inst.kind == NfKind::UPF && inst.serving_snssais.contains(s)) out.push_back(id);
    return out;
  }

  NfId amf_for(const UeId& ue_id) {
    if (auto a = amf_holding(ue_id)) return *a;
    return ue(ue_id).serving_amf;
  }

  static NfId ue_nf(const UeId& u) { return NfId(u.str()); }

  Tick latency(const NfId& src, const NfId& dst) {
    auto it = latency_.find({src, dst});
    Tick base = it == latency_.end() ? sc_.options.default_latency : it->second;
    if (sc_.options.jitter > 0) base += std::uniform_int_distribution<Tick>(0, sc_.options.jitter)(rng_);
    return base;
  }

  template <typename Fill>
  void emit(MessageName name, const NfId& src, const NfId& dst, ProcId proc, Fill&& fill) {
    SignalingMessage m;
    m.msg_id = next_msg_id_++;
    m.name = name;
    m.src = src;
    m.dst = dst;
    m.correlates = proc;
    m.sent_at = handling_at_.value_or(now());
    fill(m);
    m.delivered_at = m.sent_at + latency(src, dst);
    out_.push_back(std::move(m));
  }
  void emit(MessageName name, const NfId& src, const NfId& dst, ProcId proc) {
    emit(name, src, dst, proc, [](SignalingMessage&) {});
  }

  void flush() {
    for (auto& m : out_) queue_.schedule(m.delivered_at, EventKind::MessageDelivery, std::move(m));
    out_.clear();
  }

  ProcedureRun* run_of(ProcId id) {
    if (id < 0 || static_cast<std::size_t>(id) >= runs_.size()) return nullptr;
    return &runs_[static_cast<std::size_t>(id)];
  }

  int switch_of(ProcId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= run_switch_.size()) return -1;
    return run_switch_[static_cast<std::size_t>(id)];
  }

  std::string case_tag(int sw) const {
    if (sw < 0) return "-";
    return std::string(to_string(switches_[static_cast<std::size_t>(sw)].kase.id)) + "#" + std::to_string(sw);
  }

  std::string proc_tag(ProcId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= runs_.size()) return "-";
    return std::string(to_string(runs_[static_cast<std::size_t>(id)].procedure)) + "#" + std::to_string(id);
  }

  void describe(const SignalingMessage& m, TraceRecord& rec) const {
    rec.name = std::string(to_string(m.name));
    rec.src = m.src.str();
    rec.dst = m.dst.str();
    rec.ue = m.ue.empty() ? "-" : m.ue.str();
    rec.case_tag = case_tag(switch_of(m.correlates));
    rec.proc = proc_tag(m.correlates);
  }

  void count_delivery(const SignalingMessage& m) {
    const std::string name(to_string(m.name));
    ++totals_[name];
    if (auto* run = run_of(m.correlates)) ++run->messages;
    if (int sw = switch_of(m.correlates); sw >= 0) ++switches_[static_cast<std::size_t>(sw)].outcome.signaling_count[name];
  }

  ProcId new_proc(ProcedureKind kind, Initiator initiator, const UeId& ue_id, std::optional<SNssai> target,
                  const SessionId& session, ProcId parent, int sw) {
    ProcedureRun run;
    run.id = static_cast<ProcId>(runs_.size());
    run.procedure = kind;
    run.initiator = initiator;
    run.ue_id = ue_id;
    run.target_snssai = std::move(target);
    run.session = session;
    run.parent = parent;
    run.started_at = now();
    runs_.push_back(std::move(run));
    if (sw < 0) sw = switch_of(parent);
    run_switch_.push_back(sw);
    if (sw >= 0) {
      auto& s = switches_[static_cast<std::size_t>(sw)];
      s.pending.insert(runs_.back().id);
      s.procs.push_back(runs_.back().id);
    }
    return runs_.back().id;
  }

  /// A run that fails its precondition: recorded, finished, no messages.
  ProcId rejected_proc(ProcedureKind kind, Initiator initiator, const UeId& ue_id, std::optional<SNssai> target,
                       const SessionId& session, ProcId parent, int sw, FailureReason reason) {
    auto id = new_proc(kind, initiator, ue_id, std::move(target), session, parent, sw);
    finish_proc(id, false, reason);
    return id;
  }

  bool slice_busy(const UeId& ue_id, const SNssai& s) const {
    for (const auto& r : runs_)
      if (!r.finished() && r.ue_id == ue_id && r.target_snssai == s &&
          (r.procedure == ProcedureKind::PduSessionRelease || r.procedure == ProcedureKind::PduSessionEstablishment))
        return true;
    return false;
  }

  void record_step(ProcId id, EstablishmentStep step) {
    if (auto* r = run_of(id)) r->steps.push_back(step);
  }

  // --- procedure starts ------------------------------------------------------

  ProcId begin_ucu(const UeId& ue_id, const SnssaiSet& new_allowed, int sw) {
    const auto amf_id = amf_for(ue_id);
    auto& ctx = nf(amf_id).state<AmfState>().ues.at(ue_id);
    const auto id = new_proc(ProcedureKind::UeConfigurationUpdate, Initiator::AMF, ue_id, std::nullopt, {}, kNoProc, sw);
    ctx.allowed = new_allowed;
    emit(MessageName::UeConfigurationUpdateCommand, amf_id, ue_nf(ue_id), id, [&](SignalingMessage& m) {
      m.ue = ue_id;
      m.nssai = new_allowed;
    });
    // Releases start once the command is on its way.
    std::vector<SessionId> unavailable;
    for (const auto& [sid, ref] : ctx.sessions)
      if (!new_allowed.contains(ref.snssai)) unavailable.push_back(sid);
    for (const auto& sid : unavailable) {
      const auto& sessions = ue(ue_id).sessions;
      auto it = sessions.find(sid);
      if (it != sessions.end() && it->second.state == SessionState::Active)
        begin_release(ue_id, sid, Initiator::AMF, kNoProc, switch_of(id));
    }
    return id;
  }

  ProcId begin_registration(const UeId& ue_id, const SnssaiSet& requested, bool remove_current,
                            std::optional<SNssai> current_active, int sw) {
    auto& u = ue(ue_id);
    if (u.registration_state != RegistrationState::Registered)
      throw ContractError("registration for a deregistered UE is scenario setup, not a switching step");
    std::optional<SNssai> target;
    for (const auto& s : requested)
      if (!u.nssai.allowed.contains(s)) target = s;
    const auto id = new_proc(ProcedureKind::Registration, Initiator::UE, ue_id, target, {}, kNoProc, sw);
    u.nssai.requested = requested;
    emit(MessageName::RegistrationRequest, ue_nf(ue_id), u.serving_amf, id, [&](SignalingMessage& m) {
      m.ue = ue_id;
      m.nssai = requested;
      m.ok = remove_current;
      m.snssai = current_active;
    });
    return id;
  }

  ProcId begin_release(const UeId& ue_id, const SessionId& sid, Initiator initiator, ProcId parent, int sw) {
    auto& u = ue(ue_id);
    auto it = u.sessions.find(sid);
    if (it == u.sessions.end() || it->second.state != SessionState::Active)
      return rejected_proc(ProcedureKind::PduSessionRelease, initiator, ue_id,
                           it == u.sessions.end() ? std::nullopt : std::optional(it->second.snssai), sid, parent, sw,
                           FailureReason::InvalidSessionState);
    auto& ps = it->second;
    if (slice_busy(ue_id, ps.snssai))
      return rejected_proc(ProcedureKind::PduSessionRelease, initiator, ue_id, ps.snssai, sid, parent, sw,
                           FailureReason::InvalidSessionState);
    const auto id = new_proc(ProcedureKind::PduSessionRelease, initiator, ue_id, ps.snssai, sid, parent, sw);
    ps.transition(SessionState::Releasing);
    auto fill = [&](SignalingMessage& m) {
      m.ue = ue_id;
      m.session = sid;
      m.snssai = ps.snssai;
    };
    switch (initiator) {
      case Initiator::UE: emit(MessageName::PduSessionReleaseRequest, ue_nf(ue_id), amf_for(ue_id), id, fill); break;
      case Initiator::AMF: emit(MessageName::SmContextReleaseRequest, amf_for(ue_id), ps.smf, id, fill); break;
      case Initiator::PCF: emit(MessageName::SmPolicyTerminationNotify, pcf_, ps.smf, id, fill); break;
      case Initiator::SMF: smf_begin_release(nf(ps.smf), sid, id); break;
    }
    return id;
  }

  ProcId begin_establishment(const UeId& ue_id, const SNssai& snssai, const std::string& dn, SessionType type,
                             std::optional<SessionId> release_on_accept, int sw) {
    auto& u = ue(ue_id);
    for (const auto& [sid, ps] : u.sessions)
      if (ps.snssai == snssai && ps.dn_name == dn &&
          (ps.state == SessionState::Active || ps.state == SessionState::Establishing))
        return rejected_proc(ProcedureKind::PduSessionEstablishment, Initiator::UE, ue_id, snssai, {}, kNoProc, sw,
                             FailureReason::InvalidSessionState);
    if (slice_busy(ue_id, snssai))
      return rejected_proc(ProcedureKind::PduSessionEstablishment, Initiator::UE, ue_id, snssai, {}, kNoProc, sw,
                           FailureReason::InvalidSessionState);

    SessionId sid;
    do {
      sid = SessionId("s" + std::to_string(++session_counter_));
    } while (session_id_taken(sid));
    PduSession ps;
    ps.session_id = sid;
    ps.snssai = snssai;
    ps.dn_name = dn;
    ps.session_type = type;
    if (auto smf = smf_for(snssai)) ps.smf = *smf;
    ps.upfs = upfs_for(snssai);
    ps.policy_ref = policy_ref(snssai, dn);
    ps.transition(SessionState::Establishing);
    u.sessions[sid] = ps;

    const auto id = new_proc(ProcedureKind::PduSessionEstablishment, Initiator::UE, ue_id, snssai, sid, kNoProc, sw);
    if (sw >= 0) check_release_before_establish(sw);
    emit(MessageName::PduSessionEstablishmentRequest, ue_nf(ue_id), amf_for(ue_id), id, [&](SignalingMessage& m) {
      m.ue = ue_id;
      m.session = sid;
      m.snssai = snssai;
      m.dn = dn;
      m.session_type = type;
      m.related_session = release_on_accept;
    });
    return id;
  }

  bool session_id_taken(const SessionId& sid) const {
    for (const auto& [id, inst] : nfs_)
      if (inst.kind == NfKind::UE && inst.state<UeContext>().sessions.contains(sid)) return true;
    return false;
  }

  // --- procedure completion --------------------------------------------------

  void finish_proc(ProcId id, bool success, FailureReason reason = FailureReason::None) {
    auto* run = run_of(id);
    if (!run || run->finished()) return;
    run->status = success ? ProcedureStatus::Success : ProcedureStatus::Failure;
    run->failure = success ? FailureReason::None : reason;
    run->finished_at = now();

    if (run->procedure == ProcedureKind::PduSessionEstablishment && !success) cleanup_failed_establishment(*run);
    if (run->procedure == ProcedureKind::Registration) {
      ue(run->ue_id).nssai.requested.reset();
      if (check_ && success) {
        const auto& u = ue(run->ue_id);
        if (!amf_can_serve(nf(u.serving_amf), u.nssai.allowed))
          throw InvariantViolation("amf-serves-allowed", current_seq_,
                                   "AMF " + u.serving_amf.str() + " cannot serve " + to_string(u.nssai.allowed));
      }
    }
    if (run->procedure == ProcedureKind::PduSessionRelease && success && check_) {
      if (resources_of(run->session).total() != 0)
        throw InvariantViolation("release-resource-conservation", current_seq_,
                                 "session " + run->session.str() + " still holds resources");
    }

    const ProcedureRun snapshot = *run;  // runs_ may grow below
    if (snapshot.parent != kNoProc) resume_parent(snapshot);
    if (int sw = switch_of(id); sw >= 0) on_switch_proc_finished(sw, snapshot);
  }

  void cleanup_failed_establishment(const ProcedureRun& run) {
    auto& u = ue(run.ue_id);
    if (auto it = u.sessions.find(run.session); it != u.sessions.end() && it->second.state == SessionState::Establishing)
      it->second.transition(SessionState::Released);
    for (auto& [id, inst] : nfs_) {
      if (inst.kind == NfKind::AMF) {
        auto& st = inst.state<AmfState>();
        st.establishments.erase(run.id);
        if (auto c = st.ues.find(run.ue_id); c != st.ues.end()) c->second.sessions.erase(run.session);
      }
      if (inst.kind == NfKind::SMF) {
        auto& st = inst.state<SmfState>();
        if (auto c = st.contexts.find(run.session); c != st.contexts.end()) {
          if (c->second.ip_prefix) st.allocated_prefixes.erase(*c->second.ip_prefix);
          st.contexts.erase(c);
        }
      }
    }
  }

  /// A release spawned during registration finished; registration resumes
  /// once all of them are done.
  void resume_parent(const ProcedureRun& child) {
    for (auto& [id, inst] : nfs_) {
      if (inst.kind != NfKind::AMF) continue;
      auto& st = inst.state<AmfState>();
      auto it = st.registrations.find(child.parent);
      if (it == st.registrations.end()) continue;
      it->second.waiting_releases.erase(child.id);
      if (it->second.waiting_releases.empty()) amf_after_release(inst, it->second);
      return;
    }
  }

  // --- AMF -------------------------------------------------------------------

  bool handle_amf(NfInstance& amf, const SignalingMessage& m) {
    auto& st = amf.state<AmfState>();
    using N = MessageName;
    switch (m.name) {
      case N::RegistrationRequest: {
        if (!st.ues.contains(m.ue)) {
          emit(N::RegistrationReject, amf.nf_id, m.src, m.correlates, [&](SignalingMessage& r) {
            r.ue = m.ue;
            r.reason = FailureReason::UnknownUe;
          });
          return true;
        }
        PendingRegistration r;
        r.proc = m.correlates;
        r.ue = m.ue;
        r.requested = m.nssai;
        r.remove_current = m.ok;
        r.current_active = m.snssai;
        st.registrations[m.correlates] = r;
        emit(N::SubscriptionDataRequest, amf.nf_id, udm_, m.correlates, [&](SignalingMessage& o) { o.ue = m.ue; });
        return true;
      }
      case N::SubscriptionDataResponse: {
        auto it = st.registrations.find(m.correlates);
        if (it == st.registrations.end()) return false;
        it->second.subscribed = m.nssai;
        if (sc_.options.nssf_assist) {
          emit(N::NssaiSelectionRequest, amf.nf_id, nssf_, m.correlates, [&](SignalingMessage& o) {
            o.ue = m.ue;
            o.nssai = it->second.requested;
          });
        } else {
          amf_verify(amf, it->second, sc_.configured);
        }
        return true;
      }
      case N::NssaiSelectionResponse: {
        auto it = st.registrations.find(m.correlates);
        if (it == st.registrations.end()) return false;
        amf_verify(amf, it->second, m.nssai);
        return true;
      }
      case N::AmfSelectionResponse: {
        auto it = st.registrations.find(m.correlates);
        if (it == st.registrations.end()) return false;
        if (!m.ok) {
          amf_reject(amf, it->second, FailureReason::NoServingAmf);
          return true;
        }
        amf_relocate(amf, it->second, m.ref_nf);
        return true;
      }
      case N::AmfContextTransfer: {
        if (!m.transfer) return false;
        st.ues[m.ue] = m.transfer->context;
        auto& r = st.registrations[m.correlates] = m.transfer->registration;
        amf_accept(amf, r);
        return true;
      }
      case N::ProcedureFailure: {
        if (auto it = st.registrations.find(m.correlates); it != st.registrations.end()) {
          amf_reject(amf, it->second, m.reason);
          return true;
        }
        return false;
      }
      case N::UeConfigurationUpdateComplete:
        finish_proc(m.correlates, true);
        return true;
      case N::PduSessionReleaseRequest: {
        auto c = st.ues.find(m.ue);
        if (c == st.ues.end() || !c->second.sessions.contains(m.session)) return false;
        emit(N::SmContextReleaseRequest, amf.nf_id, c->second.sessions.at(m.session).smf, m.correlates,
             [&](SignalingMessage& o) {
               o.ue = m.ue;
               o.session = m.session;
               o.snssai = m.snssai;
             });
        return true;
      }
      case N::N1N2MessageTransfer: {
        const auto name = m.release ? N::PduSessionResourceReleaseCommand : N::PduSessionResourceSetupRequest;
        emit(name, amf.nf_id, ran_, m.correlates, [&](SignalingMessage& o) {
          o.ue = m.ue;
          o.session = m.session;
          o.snssai = m.snssai;
        });
        return true;
      }
      case N::PduSessionReleaseComplete: {
        auto c = st.ues.find(m.ue);
        if (c == st.ues.end()) return false;
        auto ref = c->second.sessions.find(m.session);
        if (ref == c->second.sessions.end()) return false;
        const auto smf = ref->second.smf;
        c->second.sessions.erase(ref);
        emit(N::SmContextReleaseComplete, amf.nf_id, smf, m.correlates, [&](SignalingMessage& o) {
          o.ue = m.ue;
          o.session = m.session;
        });
        return true;
      }
      case N::PduSessionEstablishmentRequest: {
        auto c = st.ues.find(m.ue);
        if (c == st.ues.end()) {
          finish_proc(m.correlates, false, FailureReason::UnknownUe);
          return true;
        }
        if (!m.snssai || !c->second.allowed.contains(*m.snssai)) {
          finish_proc(m.correlates, false, FailureReason::SliceNotAllowed);
          return true;
        }
        auto smf = smf_for(*m.snssai);
        if (!smf) {
          finish_proc(m.correlates, false, FailureReason::NoServingSmf);
          return true;
        }
        c->second.sessions[m.session] = {*m.snssai, *smf};
        st.establishments[m.correlates] = PendingEstablishment{m.correlates, m.ue, m.session, m.related_session};
        emit(N::CreateSmContextRequest, amf.nf_id, *smf, m.correlates, [&](SignalingMessage& o) {
          o.ue = m.ue;
          o.session = m.session;
          o.snssai = m.snssai;
          o.dn = m.dn;
          o.session_type = m.session_type;
        });
        return true;
      }
      case N::CreateSmContextResponse: {
        auto it = st.establishments.find(m.correlates);
        if (it == st.establishments.end()) return false;
        if (auto old = it->second.release_on_accept) {
          it->second.release_on_accept.reset();
          begin_release(it->second.ue, *old, Initiator::AMF, kNoProc, switch_of(m.correlates));
        }
        return true;
      }
      case N::PduSessionResourceSetupResponse: {
        auto c = st.ues.find(m.ue);
        if (c == st.ues.end() || !c->second.sessions.contains(m.session)) return false;
        st.establishments.erase(m.correlates);
        emit(N::UpdateSmContextRequest, amf.nf_id, c->second.sessions.at(m.session).smf, m.correlates,
             [&](SignalingMessage& o) {
               o.ue = m.ue;
               o.session = m.session;
             });
        return true;
      }
      default: return false;
    }
  }

  void amf_verify(NfInstance& amf, PendingRegistration& r, const SnssaiSet& configured) {
    if (r.requested.empty()) {
      amf_reject(amf, r, FailureReason::NoAcceptableSnssai);
      return;
    }
    SubscribedSet subscribed;
    for (const auto& s : r.subscribed) subscribed.push_back({s, false});
    const auto verdict = verify_requested_nssai(r.requested, subscribed, configured);
    if (verdict.accepted.empty()) {
      amf_reject(amf, r, FailureReason::NoAcceptableSnssai);
      return;
    }
    auto& ctx = amf.state<AmfState>().ues.at(r.ue);
    auto allowed = compute_allowed_nssai(ctx.allowed, verdict.accepted, r.remove_current, r.current_active);
    if (!allowed) {
      amf_reject(amf, r, FailureReason::AllowedNssaiOverflow);
      return;
    }
    r.new_allowed = allowed.value();

    std::vector<SessionId> leaving;
    if (r.remove_current) {
      const auto& u = ue(r.ue);
      for (const auto& [sid, ref] : ctx.sessions) {
        auto it = u.sessions.find(sid);
        if (!r.new_allowed.contains(ref.snssai) && it != u.sessions.end() && it->second.state == SessionState::Active)
          leaving.push_back(sid);
      }
    }
    if (!leaving.empty()) {
      if (auto* run = run_of(r.proc)) run->release_during_registration = true;
    }
    if (sc_.options.release_before_accept) {
      const auto proc = r.proc;
      for (const auto& sid : leaving) {
        const auto child = begin_release(r.ue, sid, Initiator::AMF, proc, switch_of(proc));
        auto& reg = amf.state<AmfState>().registrations.at(proc);
        if (!procedure(child).finished()) reg.waiting_releases.insert(child);
      }
      auto& reg = amf.state<AmfState>().registrations.at(proc);
      if (reg.waiting_releases.empty()) amf_after_release(amf, reg);
    } else {
      r.releases_after_accept = std::move(leaving);
      amf_after_release(amf, r);
    }
  }

  void amf_after_release(NfInstance& amf, PendingRegistration& r) {
    if (amf_can_serve(amf, r.new_allowed)) {
      amf_accept(amf, r);
      return;
    }
    emit(MessageName::AmfSelectionRequest, amf.nf_id, nssf_, r.proc, [&](SignalingMessage& o) {
      o.ue = r.ue;
      o.nssai = r.new_allowed;
    });
  }

  void amf_relocate(NfInstance& amf, PendingRegistration& r, const NfId& target) {
    auto& st = amf.state<AmfState>();
    r.relocated = true;
    if (auto* run = run_of(r.proc)) run->with_amf_relocation = true;
    auto transfer = std::make_shared<AmfTransfer>();
    transfer->context = st.ues.at(r.ue);
    transfer->registration = r;
    const auto ue_id = r.ue;
    const auto proc = r.proc;
    st.ues.erase(ue_id);
    st.registrations.erase(proc);
    emit(MessageName::AmfContextTransfer, amf.nf_id, target, proc, [&](SignalingMessage& o) {
      o.ue = ue_id;
      o.transfer = std::move(transfer);
    });
  }

  void amf_accept(NfInstance& amf, PendingRegistration& r) {
    auto& st = amf.state<AmfState>();
    st.ues.at(r.ue).allowed = r.new_allowed;
    emit(MessageName::RegistrationAccept, amf.nf_id, ue_nf(r.ue), r.proc, [&](SignalingMessage& o) {
      o.ue = r.ue;
      o.nssai = r.new_allowed;
      o.ref_nf = amf.nf_id;
    });
    const auto proc = r.proc;
    const auto ue_id = r.ue;
    const auto after = std::move(r.releases_after_accept);
    st.registrations.erase(proc);
    for (const auto& sid : after) begin_release(ue_id, sid, Initiator::AMF, kNoProc, switch_of(proc));
  }

  void amf_reject(NfInstance& amf, PendingRegistration& r, FailureReason reason) {
    const auto proc = r.proc;
    const auto ue_id = r.ue;
    amf.state<AmfState>().registrations.erase(proc);
    emit(MessageName::RegistrationReject, amf.nf_id, ue_nf(ue_id), proc, [&](SignalingMessage& o) {
      o.ue = ue_id;
      o.reason = reason;
    });
  }

  // --- SMF -------------------------------------------------------------------

  void smf_fail(SmfState& st, const SessionId& sid, ProcId proc, FailureReason reason) {
    if (auto c = st.contexts.find(sid); c != st.contexts.end()) {
      if (c->second.ip_prefix) st.allocated_prefixes.erase(*c->second.ip_prefix);
      st.contexts.erase(c);
    }
    finish_proc(proc, false, reason);
  }

  void smf_begin_release(NfInstance& smf, const SessionId& sid, ProcId proc) {
    auto& st = smf.state<SmfState>();
    auto& ctx = st.contexts.at(sid);
    ctx.state = SmContextState::Releasing;
    ctx.pending_n4 = {ctx.upfs.begin(), ctx.upfs.end()};
    for (const auto& upf : ctx.upfs)
      emit(MessageName::N4SessionReleaseRequest, smf.nf_id, upf, proc, [&](SignalingMessage& o) {
        o.ue = ctx.ue;
        o.session = sid;
      });
    if (ctx.upfs.empty()) smf_after_n4_release(smf, ctx, proc);
  }

  void smf_after_n4_release(NfInstance& smf, SmContext& ctx, ProcId proc) {
    emit(MessageName::N1N2MessageTransfer, smf.nf_id, amf_for(ctx.ue), proc, [&](SignalingMessage& o) {
      o.ue = ctx.ue;
      o.session = ctx.session_id;
      o.snssai = ctx.snssai;
      o.release = true;
    });
  }

  bool handle_smf(NfInstance& smf, const SignalingMessage& m) {
    auto& st = smf.state<SmfState>();
    using N = MessageName;
    auto ctx_it = st.contexts.find(m.session);
    switch (m.name) {
      case N::CreateSmContextRequest: {
        SmContext ctx;
        ctx.session_id = m.session;
        ctx.ue = m.ue;
        ctx.snssai = *m.snssai;
        ctx.dn_name = m.dn;
        ctx.session_type = m.session_type;
        st.contexts[m.session] = ctx;
        emit(N::SmSubscriptionDataRequest, smf.nf_id, udm_, m.correlates, [&](SignalingMessage& o) {
          o.ue = m.ue;
          o.session = m.session;
          o.snssai = m.snssai;
          o.dn = m.dn;
        });
        return true;
      }
      case N::SmSubscriptionDataResponse: {
        if (ctx_it == st.contexts.end()) return false;
        if (!m.ok) {
          smf_fail(st, m.session, m.correlates, FailureReason::NoSmSubscription);
          return true;
        }
        auto& ctx = ctx_it->second;
        emit(N::CreateSmContextResponse, smf.nf_id, amf_for(ctx.ue), m.correlates, [&](SignalingMessage& o) {
          o.ue = ctx.ue;
          o.session = ctx.session_id;
        });
        record_step(m.correlates, EstablishmentStep::DnAuthorization);
        emit(N::DnAuthenticationRequest, smf.nf_id, NfId(ctx.dn_name), m.correlates, [&](SignalingMessage& o) {
          o.ue = ctx.ue;
          o.session = ctx.session_id;
        });
        return true;
      }
      case N::DnAuthenticationResponse: {
        if (ctx_it == st.contexts.end()) return false;
        if (!m.ok) {
          smf_fail(st, m.session, m.correlates, FailureReason::DnAuthRejected);
          return true;
        }
        auto& ctx = ctx_it->second;
        record_step(m.correlates, EstablishmentStep::PolicyRetrieval);
        emit(N::PolicyRetrievalRequest, smf.nf_id, pcf_, m.correlates, [&](SignalingMessage& o) {
          o.ue = ctx.ue;
          o.session = ctx.session_id;
          o.snssai = ctx.snssai;
          o.dn = ctx.dn_name;
        });
        return true;
      }
      case N::PolicyRetrievalResponse: {
        if (ctx_it == st.contexts.end()) return false;
        if (!m.ok) {
          smf_fail(st, m.session, m.correlates, FailureReason::NoPolicy);
          return true;
        }
        auto& ctx = ctx_it->second;
        ctx.policy_ref = policy_ref(ctx.snssai, ctx.dn_name);
        ctx.upfs = upfs_for(ctx.snssai);
        if (ctx.upfs.empty()) {
          smf_fail(st, m.session, m.correlates, FailureReason::NoServingUpf);
          return true;
        }
        record_step(m.correlates, EstablishmentStep::UpfSelectionAndN4);
        ctx.pending_n4 = {ctx.upfs.begin(), ctx.upfs.end()};
        for (const auto& upf : ctx.upfs)
          emit(N::N4SessionEstablishmentRequest, smf.nf_id, upf, m.correlates, [&](SignalingMessage& o) {
            o.ue = ctx.ue;
            o.session = ctx.session_id;
          });
        return true;
      }
      case N::N4SessionEstablishmentResponse: {
        if (ctx_it == st.contexts.end()) return false;
        auto& ctx = ctx_it->second;
        ctx.pending_n4.erase(m.src);
        if (!ctx.pending_n4.empty()) return true;
        record_step(m.correlates, EstablishmentStep::IpAllocation);
        ctx.ip_prefix = prefix_for(ctx.session_id);
        st.allocated_prefixes.insert(*ctx.ip_prefix);
        record_step(m.correlates, EstablishmentStep::SmParameterDelivery);
        emit(N::N1N2MessageTransfer, smf.nf_id, amf_for(ctx.ue), m.correlates, [&](SignalingMessage& o) {
          o.ue = ctx.ue;
          o.session = ctx.session_id;
          o.snssai = ctx.snssai;
        });
        return true;
      }
      case N::UpdateSmContextRequest: {
        if (ctx_it == st.contexts.end()) return false;
        auto& ctx = ctx_it->second;
        ctx.state = SmContextState::Active;
        emit(N::RouterAdvertisement, smf.nf_id, ctx.upfs.front(), m.correlates, [&](SignalingMessage& o) {
          o.ue = ctx.ue;
          o.session = ctx.session_id;
        });
        return true;
      }
      case N::SmContextReleaseRequest:
      case N::SmPolicyTerminationNotify:
        if (ctx_it == st.contexts.end()) return false;
        smf_begin_release(smf, m.session, m.correlates);
        return true;
      case N::N4SessionReleaseResponse: {
        if (ctx_it == st.contexts.end()) return false;
        auto& ctx = ctx_it->second;
        ctx.pending_n4.erase(m.src);
        if (ctx.pending_n4.empty()) smf_after_n4_release(smf, ctx, m.correlates);
        return true;
      }
      case N::SmContextReleaseComplete: {
        if (ctx_it == st.contexts.end()) return false;
        if (ctx_it->second.ip_prefix) st.allocated_prefixes.erase(*ctx_it->second.ip_prefix);
        st.contexts.erase(ctx_it);
        finish_proc(m.correlates, true);
        return true;
      }
      default: return false;
    }
  }

  // --- data management, policy, selection ------------------------------------

  bool handle_udm(NfInstance& udm, const SignalingMessage& m) {
    const auto& records = nf(udr_).state<UdrState>().subscriptions;
    auto rec = records.find(m.ue);
    switch (m.name) {
      case MessageName::SubscriptionDataRequest:
        if (rec == records.end()) {
          emit(MessageName::ProcedureFailure, udm.nf_id, m.src, m.correlates, [&](SignalingMessage& o) {
            o.ue = m.ue;
            o.reason = FailureReason::UnknownUe;
          });
          return true;
        }
        emit(MessageName::SubscriptionDataResponse, udm.nf_id, m.src, m.correlates, [&](SignalingMessage& o) {
          o.ue = m.ue;
          o.nssai = subscribed_snssais(rec->second.subscribed);
        });
        return true;
      case MessageName::SmSubscriptionDataRequest: {
        bool ok = false;
        if (rec != records.end() && m.snssai) {
          auto sm = rec->second.sm_data.find({*m.snssai, m.dn});
          ok = sm != rec->second.sm_data.end() && sm->second.dn_authorized;
        }
        emit(MessageName::SmSubscriptionDataResponse, udm.nf_id, m.src, m.correlates, [&](SignalingMessage& o) {
          o.ue = m.ue;
          o.session = m.session;
          o.ok = ok;
        });
        return true;
      }
      default: return false;
    }
  }

  bool handle_nssf(NfInstance& nssf, const SignalingMessage& m) {
    switch (m.name) {
      case MessageName::NssaiSelectionRequest: {
        SnssaiSet supported;
        for (const auto& s : m.nssai)
          if (nssf.state<NssfState>().configured.contains(s)) supported.insert(s);
        emit(MessageName::NssaiSelectionResponse, nssf.nf_id, m.src, m.correlates, [&](SignalingMessage& o) {
          o.ue = m.ue;
          o.nssai = supported;
        });
        return true;
      }
      case MessageName::AmfSelectionRequest: {
        auto amfs = instances_of(NfKind::AMF);
        auto chosen = select_amf(nssf, m.nssai, amfs);
        emit(MessageName::AmfSelectionResponse, nssf.nf_id, m.src, m.correlates, [&](SignalingMessage& o) {
          o.ue = m.ue;
          o.ok = chosen.ok();
          if (chosen) o.ref_nf = chosen.value();
        });
        return true;
      }
      default: return false;
    }
  }

  bool handle_pcf(NfInstance& pcf, const SignalingMessage& m) {
    if (m.name != MessageName::PolicyRetrievalRequest) return false;
    const bool ok = m.snssai && pcf.state<PcfState>().policies.contains({*m.snssai, m.dn});
    emit(MessageName::PolicyRetrievalResponse, pcf.nf_id, m.src, m.correlates, [&](SignalingMessage& o) {
      o.ue = m.ue;
      o.session = m.session;
      o.ok = ok;
    });
    return true;
  }

  bool handle_nwdaf(NfInstance& nwdaf, const SignalingMessage& m) {
    if (m.name != MessageName::AnalyticsRequest) return false;
    const bool ok = m.snssai && nwdaf.state<NwdafState>().query(*m.snssai).has_value();
    emit(MessageName::AnalyticsResponse, nwdaf.nf_id, m.src, m.correlates, [&](SignalingMessage& o) {
      o.snssai = m.snssai;
      o.ok = ok;
    });
    return true;
  }

  // --- user plane, access, data network --------------------------------------

  bool handle_upf(NfInstance& upf, const SignalingMessage& m) {
    auto& st = upf.state<UpfState>();
    switch (m.name) {
      case MessageName::N4SessionEstablishmentRequest:
        st.n4[m.session] = make_n4(m.session, m.src, upf.nf_id);
        emit(MessageName::N4SessionEstablishmentResponse, upf.nf_id, m.src, m.correlates, [&](SignalingMessage& o) {
          o.ue = m.ue;
          o.session = m.session;
        });
        return true;
      case MessageName::N4SessionReleaseRequest:
        st.n4.erase(m.session);
        emit(MessageName::N4SessionReleaseResponse, upf.nf_id, m.src, m.correlates, [&](SignalingMessage& o) {
          o.ue = m.ue;
          o.session = m.session;
        });
        return true;
      case MessageName::RouterAdvertisement:
        emit(MessageName::RouterAdvertisement, upf.nf_id, ue_nf(m.ue), m.correlates, [&](SignalingMessage& o) {
          o.ue = m.ue;
          o.session = m.session;
        });
        return true;
      default: return false;
    }
  }

  bool handle_ran(NfInstance& ran, const SignalingMessage& m) {
    auto& st = ran.state<RanState>();
    auto fill = [&](SignalingMessage& o) {
      o.ue = m.ue;
      o.session = m.session;
    };
    switch (m.name) {
      case MessageName::PduSessionResourceSetupRequest:
        st.resources.insert(m.session);
        emit(MessageName::PduSessionEstablishmentAccept, ran.nf_id, ue_nf(m.ue), m.correlates, fill);
        return true;
      case MessageName::SmConfigurationComplete:
        emit(MessageName::PduSessionResourceSetupResponse, ran.nf_id, amf_for(m.ue), m.correlates, fill);
        return true;
      case MessageName::PduSessionResourceReleaseCommand:
        st.resources.erase(m.session);
        emit(MessageName::PduSessionReleaseCommand, ran.nf_id, ue_nf(m.ue), m.correlates, fill);
        return true;
      default: return false;
    }
  }

  bool handle_dn(NfInstance& dn, const SignalingMessage& m) {
    if (m.name != MessageName::DnAuthenticationRequest) return false;
    const auto& st = dn.state<DnState>();
    const bool ok = st.authorize && !st.deny.contains(m.ue);
    emit(MessageName::DnAuthenticationResponse, dn.nf_id, m.src, m.correlates, [&](SignalingMessage& o) {
      o.ue = m.ue;
      o.session = m.session;
      o.ok = ok;
    });
    return true;
  }

  // --- UE --------------------------------------------------------------------

  bool handle_ue(NfInstance& inst, const SignalingMessage& m) {
    auto& u = inst.state<UeContext>();
    using N = MessageName;
    switch (m.name) {
      case N::UeConfigurationUpdateCommand:
        u.nssai.allowed = m.nssai;
        emit(N::UeConfigurationUpdateComplete, inst.nf_id, m.src, m.correlates, [&](SignalingMessage& o) { o.ue = u.ue_id; });
        return true;
      case N::RegistrationAccept:
        u.nssai.allowed = m.nssai;
        u.serving_amf = m.ref_nf;
        finish_proc(m.correlates, true);
        return true;
      case N::RegistrationReject:
        finish_proc(m.correlates, false, m.reason);
        return true;
      case N::PduSessionEstablishmentAccept:
        emit(N::SmConfigurationComplete, inst.nf_id, m.src, m.correlates, [&](SignalingMessage& o) {
          o.ue = u.ue_id;
          o.session = m.session;
        });
        return true;
      case N::RouterAdvertisement: {
        auto it = u.sessions.find(m.session);
        if (it == u.sessions.end()) return false;
        it->second.transition(SessionState::Active);
        it->second.ip_prefix = prefix_for(m.session);
        finish_proc(m.correlates, true);
        return true;
      }
      case N::PduSessionReleaseCommand: {
        auto it = u.sessions.find(m.session);
        if (it == u.sessions.end()) return false;
        it->second.transition(SessionState::Released);
        emit(N::PduSessionReleaseComplete, inst.nf_id, amf_for(u.ue_id), m.correlates, [&](SignalingMessage& o) {
          o.ue = u.ue_id;
          o.session = m.session;
        });
        return true;
      }
      default: return false;
    }
  }

  // --- switching orchestration -----------------------------------------------

  static std::vector<SwitchStep> build_plan(const SwitchingCase& k) {
    using S = SwitchStep;
    const bool deferred = k.release_timing == ReleaseTiming::Deferred;
    switch (k.id) {
      case CaseId::C1a: return {S::Ucu, S::Establishment};
      case CaseId::C1b:
      case CaseId::C1c: return {S::Ucu, S::Registration, S::Establishment};
      case CaseId::C1d: return {S::NetworkRelease, S::Establishment};
      case CaseId::C1e:
      case CaseId::C1f: return {S::NetworkRelease, S::Registration, S::Establishment};
      case CaseId::C2a: return deferred ? std::vector{S::Establishment} : std::vector{S::UeRelease, S::Establishment};
      case CaseId::C2b:
      case CaseId::C2c:
        return deferred ? std::vector{S::Registration, S::Establishment}
                        : std::vector{S::UeRelease, S::Registration, S::Establishment};
      case CaseId::C2bT:
      case CaseId::C2cT: return {S::Registration, S::FinalDecision, S::UeRelease, S::Establishment};
    }
    return {};
  }

  int begin_case(const SwitchingCase& kase, const UeId& ue_id, const SNssai& old, std::optional<SNssai> target,
                 CaseParams params) {
    const int id = static_cast<int>(switches_.size());
    SwitchRun sw;
    sw.kase = kase;
    sw.params = std::move(params);
    sw.outcome.switch_id = id;
    sw.outcome.case_id = kase.id;
    sw.outcome.ue = ue_id;
    sw.outcome.old_snssai = old;
    sw.outcome.new_snssai = target;
    sw.outcome.started_at = now();
    const auto& u = ue(ue_id);
    sw.dn = sw.params.dn;
    if (const auto* ps = u.active_session_on(old)) {
      sw.old_session = ps->session_id;
      sw.dn = ps->dn_name;
      sw.session_type = ps->session_type;
    }
    if (sw.dn.empty()) {
      for (const auto& nfd : sc_.nfs)
        if (nfd.kind == NfKind::DN) {
          sw.dn = nfd.id.str();
          break;
        }
    }
    sw.plan = build_plan(kase);
    switches_.push_back(std::move(sw));
    ue_case_in_flight_[ue_id] = id;
    auto& s = switches_.back();
    if (kase.initiator == CaseInitiator::UE && !target) {
      fail_switch(s, FailureReason::NoCandidateSlice);
      return id;
    }
    advance_switch(id);
    return id;
  }

  SwitchRun& sw_at(int id) { return switches_.at(static_cast<std::size_t>(id)); }

  void advance_switch(int id) {
    auto& sw = sw_at(id);
    if (sw.done) return;
    if (sw.next >= sw.plan.size()) {
      if (sw.pending.empty()) finalize_switch(id);
      return;
    }
    const auto step = sw.plan[sw.next++];
    const auto ue_id = sw.outcome.ue;
    const auto old = sw.outcome.old_snssai;
    const auto target = sw.outcome.new_snssai;
    switch (step) {
      case SwitchStep::Ucu: {
        auto allowed = nf(amf_for(ue_id)).state<AmfState>().ues.at(ue_id).allowed;
        allowed.erase(old);
        begin_ucu(ue_id, allowed, id);
        break;
      }
      case SwitchStep::NetworkRelease:
      case SwitchStep::UeRelease: {
        const auto initiator = step == SwitchStep::UeRelease ? Initiator::UE : sw.params.network_release_initiator;
        if (!sw.old_session) {
          fail_switch(sw, FailureReason::InvalidSessionState);
          return;
        }
        begin_release(ue_id, *sw.old_session, initiator, kNoProc, id);
        break;
      }
      case SwitchStep::Registration: {
        if (!target) {
          fail_switch(sw, FailureReason::NoCandidateSlice);
          return;
        }
        SnssaiSet requested = ue(ue_id).nssai.allowed;
        requested.erase(old);
        requested.insert(*target);
        begin_registration(ue_id, requested, !sw.kase.tentative, old, id);
        break;
      }
      case SwitchStep::Establishment: {
        if (!target) {
          fail_switch(sw, FailureReason::NoCandidateSlice);
          return;
        }
        std::optional<SessionId> release_on_accept;
        if (sw.kase.id == CaseId::C2a && sw.kase.release_timing == ReleaseTiming::Deferred)
          release_on_accept = sw.old_session;
        begin_establishment(ue_id, *target, sw.dn, sw.session_type, release_on_accept, id);
        break;
      }
      case SwitchStep::FinalDecision:
        // Reached only through the FinalDecision timer.
        break;
    }
  }

  void on_switch_proc_finished(int id, const ProcedureRun& run) {
    auto& sw = sw_at(id);
    sw.pending.erase(run.id);
    if (sw.done) return;
    if (!run.succeeded() && !sw.failed) {
      sw.failed = true;
      sw.failure = run.failure;
    }
    if (!sw.pending.empty()) return;
    if (sw.failed) {
      finalize_switch(id);
      return;
    }
    if (sw.next >= sw.plan.size()) {
      finalize_switch(id);
      return;
    }
    const auto kind = sw.plan[sw.next] == SwitchStep::FinalDecision ? TimerKind::FinalDecision : TimerKind::UeNextStep;
    queue_.schedule(now() + sc_.options.ue_step_delay, EventKind::TimerExpiry, TimerRef{kind, id});
  }

  void fail_switch(SwitchRun& sw, FailureReason reason) {
    if (!sw.failed) {
      sw.failed = true;
      sw.failure = reason;
    }
    if (sw.pending.empty()) finalize_switch(sw.outcome.switch_id);
  }

  bool decide_to_switch(const SwitchRun& sw) const {
    if (sw.params.final_decision) return *sw.params.final_decision;
    switch (sc_.options.tentative_decision) {
      case TentativeDecision::AlwaysSwitch: return true;
      case TentativeDecision::NeverSwitch: return false;
      case TentativeDecision::NwdafLowerLoad: {
        auto nwdafs = instances_of(NfKind::NWDAF);
        if (nwdafs.empty() || !sw.outcome.new_snssai) return false;
        const auto& st = nwdafs.front()->state<NwdafState>();
        auto cur = st.query(sw.outcome.old_snssai);
        auto alt = st.query(*sw.outcome.new_snssai);
        return cur && alt && alt->load < cur->load;
      }
    }
    return true;
  }

  void finalize_switch(int id) {
    auto& sw = sw_at(id);
    if (sw.done) return;
    sw.done = true;
    ue_case_in_flight_.erase(sw.outcome.ue);
    auto& out = sw.outcome;
    out.finished_at = now();
    bool released = false;
    for (auto pid : sw.procs) {
      const auto& r = procedure(pid);
      out.procedure_runs.push_back(r);
      if (r.procedure == ProcedureKind::PduSessionRelease) {
        released = true;
        if (r.succeeded())
          out.release_completed_at = std::max(out.release_completed_at.value_or(r.finished_at), r.finished_at);
      }
      if (r.procedure == ProcedureKind::PduSessionEstablishment && r.succeeded())
        out.establishment_completed_at = r.finished_at;
    }
    if (out.establishment_completed_at) {
      out.result = SwitchResult::Switched;
      out.reason = FailureReason::None;
      out.interruption = out.release_completed_at ? measure_interruption(out) : 0;
    } else if (sw.kase.tentative && !released) {
      out.result = SwitchResult::StayedOnCurrent;
      out.reason = sw.failure;
      out.interruption = 0;
    } else {
      out.result = SwitchResult::Aborted;
      out.reason = sw.failure;
      out.interruption = 0;
      bool sessionless = true;
      for (const auto& [sid, ps] : ue(out.ue).sessions)
        sessionless = sessionless && ps.state != SessionState::Active;
      if (sessionless) queue_.schedule(now(), EventKind::TimerExpiry, TimerRef{TimerKind::NoCandidateSlice, id});
    }
    if (check_) {
      for (const auto& r : out.procedure_runs)
        if (r.procedure == ProcedureKind::PduSessionRelease && r.succeeded() && resources_of(r.session).total() != 0)
          throw InvariantViolation("case-resource-conservation", current_seq_,
                                   "session " + r.session.str() + " holds resources after " + case_tag(id));
    }
    outcomes_.push_back(out);
  }

  void check_release_before_establish(int id) {
    if (!check_) return;
    const auto& sw = sw_at(id);
    if (sw.kase.initiator != CaseInitiator::Network) return;
    for (auto pid : sw.procs) {
      const auto& r = procedure(pid);
      if (r.procedure != ProcedureKind::PduSessionRelease) continue;
      const bool ordered = r.finished() && (r.finished_at < now() ||
                                            (sc_.options.ue_step_delay == 0 && r.finished_at == now()));
      if (!ordered)
        throw InvariantViolation("release-before-establish", current_seq_,
                                 case_tag(id) + ": establishment starts before release " + proc_tag(pid) +
                                     " completed");
    }
  }

  // --- triggers and timers ---------------------------------------------------

  void on_trigger(const TriggerFireRef& ref, TraceRecord& rec) {
    const auto& spec = sc_.triggers.at(ref.index);
    rec.name = std::string(to_string(spec.trigger_name));
    rec.ue = spec.ue_id.str();
    rec.src = to_string(spec.snssai);
    if (ue_case_in_flight_.contains(spec.ue_id)) {
      ++rejected_triggers_;
      return;
    }
    const auto& u = ue(spec.ue_id);
    if (!u.active_session_on(spec.snssai)) {
      ++rejected_triggers_;
      return;
    }
    const bool network = ref.initiation == Initiation::NetworkTriggered;
    std::optional<SNssai> target = spec.target;
    if (!target) target = select_alternate_snssai(u.nssai, u.service_type, spec.snssai, u.priorities);
    if (target && *target == spec.snssai) target.reset();
    const auto initiator = network ? CaseInitiator::Network : CaseInitiator::UE;
    const bool tentative = !network && spec.tentative;
    auto kase = classify_for(spec.ue_id, spec.snssai, initiator, ref.mechanism, target, tentative);
    if (!kase) {
      ++rejected_triggers_;
      return;
    }
    if (!network && !tentative) kase->release_timing = spec.release_timing.value_or(sc_.options.release_timing);
    CaseParams params;
    params.network_release_initiator = spec.release_initiator;
    params.final_decision = spec.final_decision;
    const int id = begin_case(*kase, spec.ue_id, spec.snssai, target, params);
    rec.dst = target ? to_string(*target) : "-";
    rec.case_tag = case_tag(id);
  }

  void on_timer(const TimerRef& t, TraceRecord& rec) {
    rec.name = std::string(to_string(t.kind));
    rec.case_tag = case_tag(t.switch_id);
    auto& sw = sw_at(t.switch_id);
    rec.ue = sw.outcome.ue.str();
    rec.dst = sw.outcome.ue.str();
    switch (t.kind) {
      case TimerKind::UeNextStep: advance_switch(t.switch_id); break;
      case TimerKind::FinalDecision:
        if (sw.done) break;
        sw.outcome.decision_at = now();
        ++sw.next;
        if (decide_to_switch(sw)) {
          advance_switch(t.switch_id);
        } else {
          sw.stay = true;
          // Nothing was released, so the case closes as StayedOnCurrent.
          finalize_switch(t.switch_id);
        }
        break;
      case TimerKind::NoCandidateSlice: break;
    }
  }

  // --- invariants --------------------------------------------------------------

  void check_invariants(std::int64_t seq) {
    std::map<SessionId, const PduSession*> sessions;
    for (const auto& [id, inst] : nfs_) {
      if (inst.kind != NfKind::UE) continue;
      const auto& u = inst.state<UeContext>();
      for (const auto& v : nssai_violations(u.nssai))
        throw InvariantViolation(v, seq, "UE " + u.ue_id.str() + " allowed=" + to_string(u.nssai.allowed));
      int holders = 0;
      for (const auto& [aid, a] : nfs_)
        if (a.kind == NfKind::AMF && a.state<AmfState>().ues.contains(u.ue_id)) ++holders;
      if (holders > 1) throw InvariantViolation("single-serving-amf", seq, "UE " + u.ue_id.str());
      for (const auto& [sid, ps] : u.sessions) {
        sessions[sid] = &ps;
        const bool has_prefix = ps.ip_prefix && !ps.ip_prefix->empty();
        const bool live = ps.state == SessionState::Active || ps.state == SessionState::Releasing;
        if (has_prefix != live)
          throw InvariantViolation("prefix-iff-active", seq,
                                   "session " + sid.str() + " in " + std::string(to_string(ps.state)));
        if (ps.state != SessionState::Active) continue;
        if (!u.nssai.allowed.contains(ps.snssai))
          throw InvariantViolation("active-session-in-allowed", seq,
                                   "session " + sid.str() + " on " + to_string(ps.snssai));
        if (ps.snssai.sst != u.service_type)
          throw InvariantViolation("same-service-type", seq, "session " + sid.str());
        for (const auto& upf : ps.upfs)
          if (!nf(upf).state<UpfState>().n4.contains(sid))
            throw InvariantViolation("n4-exists-while-active", seq, "session " + sid.str() + " at " + upf.str());
      }
    }
    for (const auto& [id, inst] : nfs_) {
      if (inst.kind != NfKind::UPF) continue;
      for (const auto& [sid, n4] : inst.state<UpfState>().n4) {
        auto it = sessions.find(sid);
        const bool ok = it != sessions.end() && (it->second->state == SessionState::Establishing ||
                                                 it->second->state == SessionState::Active ||
                                                 it->second->state == SessionState::Releasing);
        if (!ok) throw InvariantViolation("n4-iff-live-session", seq, "N4 for " + sid.str() + " at " + id.str());
      }
    }
    for (const auto& r : runs_) {
      if (r.finished() && r.messages == 0) continue;
      int extra = 0;
      if (auto it = sessions.find(r.session); it != sessions.end())
        extra = 2 * std::max<int>(0, static_cast<int>(it->second->upfs.size()) - 1);
      if (r.messages > max_messages(r.procedure) + extra)
        throw InvariantViolation("choreography-bound", seq, proc_tag(r.id) + " exceeded its message bound");
    }
    for (const auto& sw : switches_) {
      if (sw.done || !sw.kase.tentative || sw.outcome.decision_at || !sw.old_session) continue;
      const auto& ps = ue(sw.outcome.ue).sessions.at(*sw.old_session);
      if (ps.state != SessionState::Active)
        throw InvariantViolation("tentative-safety", seq,
                                 case_tag(sw.outcome.switch_id) + ": old session left Active before final decision");
    }
  }

  // --- state -------------------------------------------------------------------

  Scenario sc_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  bool check_;

  std::map<NfId, NfInstance> nfs_;
  NfId udm_, udr_, nssf_, pcf_, ran_;
  std::map<std::pair<NfId, NfId>, Tick> latency_;

  EventQueue<EventPayload> queue_;
  std::int64_t current_seq_ = -1;
  std::optional<Tick> handling_at_;
  std::vector<TraceRecord> trace_;
  std::vector<SignalingMessage> out_;
  std::int64_t next_msg_id_ = 0;
  int session_counter_ = 0;

  std::vector<ProcedureRun> runs_;
  std::vector<int> run_switch_;
  std::vector<SwitchRun> switches_;
  std::vector<SwitchOutcome> outcomes_;
  std::map<UeId, int> ue_case_in_flight_;
  std::map<std::string, std::int64_t> totals_;
  std::int64_t rejected_triggers_ = 0;
};

}  // namespace slicesim
