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

#include <gtest/gtest.h>

#include "support.hpp"

using namespace slicesim;
using namespace slicesim::testing;

namespace {

const UeId kUe("ue1");

std::vector<std::string> proc_names(const Simulator& sim, ProcId id) {
  const std::string tag = std::string(to_string(sim.procedure(id).procedure)) + "#" + std::to_string(id);
  std::vector<std::string> out;
  for (const auto& r : sim.trace())
    if (r.kind == EventKind::MessageDelivery && r.proc == tag) out.push_back(r.name);
  return out;
}

SessionId only_session(const Simulator& sim) { return sim.ue(kUe).sessions.begin()->first; }

}  // namespace

TEST(UeConfigurationUpdate, RemovingActiveSliceTriggersRelease) {
  Simulator sim(quiet_fixture("case_1a"), 0, true);
  const auto sid = only_session(sim);
  auto ucu = sim.run_ue_configuration_update(kUe, set_of({"eMBB:02"}));
  sim.run();
  EXPECT_TRUE(ucu.succeeded());
  EXPECT_EQ(ucu.messages, 2);
  EXPECT_EQ(sim.ue(kUe).nssai.allowed, set_of({"eMBB:02"}));
  EXPECT_EQ(sim.ue(kUe).sessions.at(sid).state, SessionState::Released);
  ASSERT_EQ(sim.procedures().size(), 2u);
  EXPECT_EQ(sim.procedures()[1].procedure, ProcedureKind::PduSessionRelease);
  EXPECT_EQ(sim.procedures()[1].initiator, Initiator::AMF);
  // Command goes out before the release starts.
  EXPECT_EQ(sim.trace().front().name, "UeConfigurationUpdateCommand");
}

TEST(UeConfigurationUpdate, IdentityUpdateIsNoOp) {
  auto sc = quiet_fixture("case_1b");
  sc.ues[0].sessions.clear();
  Simulator sim(sc, 0, true);
  auto ucu = sim.run_ue_configuration_update(kUe, set_of({"eMBB:01"}));
  sim.run();
  EXPECT_TRUE(ucu.succeeded());
  EXPECT_EQ(sim.ue(kUe).nssai.allowed, set_of({"eMBB:01"}));
  EXPECT_EQ(sim.procedures().size(), 1u);
}

TEST(UeConfigurationUpdate, RetainedActiveSliceIsNotReleased) {
  Simulator sim(quiet_fixture("case_1a"), 0, true);
  const auto sid = only_session(sim);
  sim.run_ue_configuration_update(kUe, set_of({"eMBB:01"}));
  sim.run();
  EXPECT_EQ(sim.ue(kUe).sessions.at(sid).state, SessionState::Active);
  EXPECT_EQ(sim.procedures().size(), 1u);
}

TEST(Registration, RemovalReleasesActiveSessionDuringRegistration) {
  auto sc = quiet_fixture("case_2b");
  for (auto& nf : sc.nfs)
    if (nf.id == NfId("amf1")) nf.serving = set_of({"eMBB:01", "eMBB:02"});
  Simulator sim(sc, 0, true);
  const auto sid = only_session(sim);
  auto reg = sim.run_registration(kUe, set_of({"eMBB:02"}), true, sn("eMBB:01"));
  EXPECT_TRUE(reg.succeeded());
  EXPECT_FALSE(reg.with_amf_relocation);
  EXPECT_TRUE(reg.release_during_registration);
  EXPECT_EQ(sim.ue(kUe).nssai.allowed, set_of({"eMBB:02"}));
  EXPECT_EQ(sim.ue(kUe).sessions.at(sid).state, SessionState::Released);
  // Default order: the release completes before Registration Accept.
  const auto& rel = sim.procedures()[1];
  EXPECT_EQ(rel.parent, reg.id);
  EXPECT_LT(rel.finished_at, reg.finished_at);
}

TEST(Registration, ReleaseAfterAcceptOrderIsConfigurable) {
  auto sc = quiet_fixture("case_2b");
  sc.options.release_before_accept = false;
  Simulator sim(sc, 0, true);
  auto reg = sim.run_registration(kUe, set_of({"eMBB:02"}), true, sn("eMBB:01"));
  sim.run();
  ASSERT_TRUE(reg.succeeded());
  const auto& rel = sim.procedures()[1];
  EXPECT_EQ(rel.procedure, ProcedureKind::PduSessionRelease);
  EXPECT_GE(rel.started_at, reg.finished_at - 1);
  EXPECT_GT(rel.finished_at, reg.finished_at);
}

TEST(Registration, RelocationWhenCurrentAmfCannotServe) {
  Simulator sim(quiet_fixture("case_2c"), 0, true);
  auto reg = sim.run_registration(kUe, set_of({"eMBB:03"}), true, sn("eMBB:01"));
  EXPECT_TRUE(reg.succeeded());
  EXPECT_TRUE(reg.with_amf_relocation);
  EXPECT_EQ(sim.ue(kUe).serving_amf, NfId("amf2"));
  EXPECT_EQ(proc_names(sim, reg.id),
            (std::vector<std::string>{"RegistrationRequest", "SubscriptionDataRequest", "SubscriptionDataResponse",
                                      "AmfSelectionRequest", "AmfSelectionResponse", "AmfContextTransfer",
                                      "RegistrationAccept"}));
}

TEST(Registration, UnsubscribedRequestFailsAndKeepsAllowed) {
  auto sc = quiet_fixture("case_1b");
  sc.ues[0].subscriptions.pop_back();  // drop eMBB:03
  Simulator sim(sc, 0, true);
  auto reg = sim.run_registration(kUe, set_of({"eMBB:03"}), true, sn("eMBB:01"));
  EXPECT_FALSE(reg.succeeded());
  EXPECT_EQ(reg.failure, FailureReason::NoAcceptableSnssai);
  EXPECT_EQ(sim.ue(kUe).nssai.allowed, set_of({"eMBB:01"}));
  EXPECT_EQ(sim.ue(kUe).sessions.begin()->second.state, SessionState::Active);
}

TEST(Registration, NssfAssistAddsOneQueryPair) {
  auto plain = quiet_fixture("case_1b");
  auto assisted = plain;
  assisted.options.nssf_assist = true;
  Simulator a(plain, 0, true), b(assisted, 0, true);
  auto ra = a.run_registration(kUe, set_of({"eMBB:02"}), false, sn("eMBB:01"));
  auto rb = b.run_registration(kUe, set_of({"eMBB:02"}), false, sn("eMBB:01"));
  EXPECT_EQ(rb.messages, ra.messages + 2);
  auto nb = proc_names(b, rb.id);
  EXPECT_EQ(nb[3], "NssaiSelectionRequest");
  EXPECT_EQ(nb[4], "NssaiSelectionResponse");
  EXPECT_EQ(a.ue(kUe).nssai.allowed, b.ue(kUe).nssai.allowed);
}

TEST(Registration, OverflowIsRejected) {
  auto sc = quiet_fixture("case_1b");
  std::vector<std::string> extra{"eMBB:04", "eMBB:05", "eMBB:06", "eMBB:07", "eMBB:08", "eMBB:09"};
  for (const auto& e : extra) {
    sc.configured.insert(sn(e));
    sc.ues[0].subscriptions.push_back({sn(e), false, {}, true});
  }
  Simulator sim(sc, 0, true);
  SnssaiSet requested = set_of({"eMBB:02", "eMBB:03"});
  for (const auto& e : extra) requested.insert(sn(e));
  // eight accepted plus the kept active slice makes nine
  auto reg = sim.run_registration(kUe, requested, false, sn("eMBB:01"));
  EXPECT_FALSE(reg.succeeded());
  EXPECT_EQ(reg.failure, FailureReason::AllowedNssaiOverflow);
  EXPECT_EQ(sim.ue(kUe).nssai.allowed, set_of({"eMBB:01"}));
}

TEST(Release, AmfInitiatedTearsDownEverything) {
  Simulator sim(quiet_fixture(), 0, true);
  const auto sid = only_session(sim);
  ASSERT_EQ(sim.resources_of(sid).total(), 3);
  auto rel = sim.run_pdu_session_release(kUe, sid, Initiator::AMF);
  EXPECT_TRUE(rel.succeeded());
  EXPECT_EQ(rel.messages, 8);
  const auto& ps = sim.ue(kUe).sessions.at(sid);
  EXPECT_EQ(ps.state, SessionState::Released);
  EXPECT_FALSE(ps.ip_prefix);
  EXPECT_EQ(sim.nf(NfId("upf1")).state<UpfState>().n4.size(), 0u);
  EXPECT_EQ(sim.resources_of(sid).total(), 0);
  EXPECT_GE(rel.finished_at, rel.started_at);
}

TEST(Release, MessageCountPerInitiator) {
  const std::map<Initiator, int> expected{
      {Initiator::UE, 9}, {Initiator::AMF, 8}, {Initiator::SMF, 7}, {Initiator::PCF, 8}};
  for (const auto& [initiator, count] : expected) {
    Simulator sim(quiet_fixture(), 0, true);
    auto rel = sim.run_pdu_session_release(kUe, only_session(sim), initiator);
    EXPECT_TRUE(rel.succeeded()) << to_string(initiator);
    EXPECT_EQ(rel.messages, count) << to_string(initiator);
    EXPECT_LE(rel.messages, max_messages(ProcedureKind::PduSessionRelease));
    EXPECT_EQ(sim.resources_of(rel.session).total(), 0);
  }
}

TEST(Release, ReleasedSessionCannotBeReleasedAgain) {
  Simulator sim(quiet_fixture(), 0, true);
  const auto sid = only_session(sim);
  sim.run_pdu_session_release(kUe, sid, Initiator::AMF);
  const auto events = sim.events_processed();
  auto again = sim.run_pdu_session_release(kUe, sid, Initiator::UE);
  EXPECT_FALSE(again.succeeded());
  EXPECT_EQ(again.failure, FailureReason::InvalidSessionState);
  EXPECT_EQ(again.messages, 0);
  EXPECT_EQ(sim.events_processed(), events);
}

TEST(Release, SecondConcurrentProcedureOnSameSliceIsRejected) {
  Simulator sim(quiet_fixture(), 0, true);
  const auto sid = only_session(sim);
  auto first = sim.start_pdu_session_release(kUe, sid, Initiator::UE);
  auto second = sim.start_pdu_session_establishment(kUe, sn("eMBB:01"), "internet");
  EXPECT_TRUE(sim.procedure(second).finished());
  EXPECT_EQ(sim.procedure(second).failure, FailureReason::InvalidSessionState);
  sim.run();
  EXPECT_TRUE(sim.procedure(first).succeeded());
}

TEST(Establishment, SucceedsWithPrefixAndOrderedSubSteps) {
  Simulator sim(quiet_fixture("case_1a"), 0, true);
  auto est = sim.run_pdu_session_establishment(kUe, sn("eMBB:02"), "internet");
  ASSERT_TRUE(est.succeeded());
  const auto& ps = sim.ue(kUe).sessions.at(est.session);
  EXPECT_EQ(ps.state, SessionState::Active);
  ASSERT_TRUE(ps.ip_prefix);
  EXPECT_EQ(*ps.ip_prefix, "pfx-" + est.session.str());
  EXPECT_EQ(ps.smf, NfId("smf2"));
  EXPECT_EQ(est.messages, 19);
  EXPECT_EQ(est.steps,
            (std::vector<EstablishmentStep>{EstablishmentStep::DnAuthorization, EstablishmentStep::PolicyRetrieval,
                                            EstablishmentStep::UpfSelectionAndN4, EstablishmentStep::IpAllocation,
                                            EstablishmentStep::SmParameterDelivery}));
  const auto names = proc_names(sim, est.id);
  EXPECT_EQ(names.back(), "RouterAdvertisement");
  EXPECT_EQ(sim.trace().back().src, "upf2");
  EXPECT_EQ(sim.trace().back().dst, "ue1");
}

TEST(Establishment, SliceNotAllowedStopsAtFirstMessage) {
  Simulator sim(quiet_fixture("case_1b"), 0, true);
  auto est = sim.run_pdu_session_establishment(kUe, sn("eMBB:02"), "internet");
  EXPECT_FALSE(est.succeeded());
  EXPECT_EQ(est.failure, FailureReason::SliceNotAllowed);
  EXPECT_EQ(est.messages, 1);
  EXPECT_EQ(sim.ue(kUe).sessions.at(est.session).state, SessionState::Released);
}

TEST(Establishment, DnDenyFailsAfterAuthExchange) {
  // Hand-traced prefix of the choreography up to the DN answer.
  const std::vector<std::string> prefix{"PduSessionEstablishmentRequest", "CreateSmContextRequest",
                                        "SmSubscriptionDataRequest",      "SmSubscriptionDataResponse",
                                        "CreateSmContextResponse",        "DnAuthenticationRequest",
                                        "DnAuthenticationResponse"};
  auto sc = quiet_fixture("case_1a");
  for (auto& nf : sc.nfs)
    if (nf.kind == NfKind::DN) nf.authorize = false;
  Simulator sim(sc, 0, true);
  auto est = sim.run_pdu_session_establishment(kUe, sn("eMBB:02"), "internet");
  sim.run();
  EXPECT_FALSE(est.succeeded());
  EXPECT_EQ(est.failure, FailureReason::DnAuthRejected);
  EXPECT_EQ(est.messages, static_cast<std::int64_t>(prefix.size()));
  EXPECT_EQ(proc_names(sim, est.id), prefix);
  EXPECT_EQ(sim.ue(kUe).sessions.at(est.session).state, SessionState::Released);
  EXPECT_EQ(sim.resources_of(est.session).total(), 0);
}

TEST(Establishment, DnDenyListIsPerUe) {
  auto sc = quiet_fixture("case_1a");
  for (auto& nf : sc.nfs)
    if (nf.kind == NfKind::DN) nf.deny.insert(kUe);
  Simulator sim(sc, 0, true);
  auto est = sim.run_pdu_session_establishment(kUe, sn("eMBB:02"), "internet");
  EXPECT_EQ(est.failure, FailureReason::DnAuthRejected);
}

TEST(Establishment, MissingPolicyFails) {
  auto sc = quiet_fixture("case_1a");
  std::erase_if(sc.policies, [](const PolicyDecl& p) { return p.snssai == sn("eMBB:02"); });
  Simulator sim(sc, 0, true);
  auto est = sim.run_pdu_session_establishment(kUe, sn("eMBB:02"), "internet");
  sim.run();
  EXPECT_FALSE(est.succeeded());
  EXPECT_EQ(est.failure, FailureReason::NoPolicy);
  EXPECT_EQ(sim.resources_of(est.session).total(), 0);
}

TEST(Establishment, TwoUpfsAddOneN4PairEach) {
  auto sc = quiet_fixture("case_1a");
  sc.nfs.push_back(NfDecl{NfId("upf2b"), NfKind::UPF, set_of({"eMBB:02"})});
  Simulator sim(sc, 0, true);
  auto est = sim.run_pdu_session_establishment(kUe, sn("eMBB:02"), "internet");
  ASSERT_TRUE(est.succeeded());
  EXPECT_EQ(est.messages, 21);
  EXPECT_EQ(sim.resources_of(est.session).n4, 2);
  auto rel = sim.run_pdu_session_release(kUe, est.session, Initiator::AMF);
  EXPECT_EQ(rel.messages, 10);
  EXPECT_EQ(sim.resources_of(est.session).total(), 0);
}

TEST(Establishment, DuplicateActiveSessionIsRejected) {
  Simulator sim(quiet_fixture(), 0, true);
  auto est = sim.run_pdu_session_establishment(kUe, sn("eMBB:01"), "internet");
  EXPECT_EQ(est.failure, FailureReason::InvalidSessionState);
  EXPECT_EQ(est.messages, 0);
}

TEST(Bounds, EveryRunStaysWithinItsBound) {
  for (const auto* stem : {"case_1a", "case_1b", "case_1c", "case_1d", "case_1e", "case_1f", "case_2a", "case_2b",
                           "case_2c", "case_2bT", "case_2cT"}) {
    Simulator sim(fixture(stem), 0, true);
    sim.run();
    for (const auto& r : sim.procedures()) {
      EXPECT_TRUE(r.finished()) << stem;
      EXPECT_LE(r.messages, max_messages(r.procedure)) << stem;
      EXPECT_GE(r.finished_at, r.started_at) << stem;
      if (r.procedure != ProcedureKind::Registration) EXPECT_FALSE(r.with_amf_relocation);
    }
  }
}
