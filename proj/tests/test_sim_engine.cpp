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

#include <random>

#include "support.hpp"

using namespace slicesim;
using namespace slicesim::testing;

namespace {

const std::vector<std::string> kFixtures{"case_1a", "case_1b", "case_1c", "case_1d", "case_1e",
                                         "case_1f", "case_2a", "case_2b", "case_2c", "case_2bT",
                                         "case_2cT", "case_2a_deferred", "case_2b_deferred",
                                         "case_2c_deferred", "case_1b_assist"};

std::vector<std::string> all_runnable() {
  auto out = kFixtures;
  out.push_back("all_cases");
  return out;
}

}  // namespace

TEST(EventQueue, ReleasesInTimeThenSeqOrder) {
  EventQueue<int> q;
  std::mt19937 rng(7);
  std::vector<std::pair<Tick, std::int64_t>> pushed;
  for (int i = 0; i < 500; ++i) {
    const Tick at = std::uniform_int_distribution<Tick>(0, 40)(rng);
    pushed.emplace_back(at, q.schedule(at, EventKind::TimerExpiry, i));
  }
  std::sort(pushed.begin(), pushed.end());
  for (const auto& [at, seq] : pushed) {
    auto e = q.advance();
    EXPECT_EQ(e.at, at);
    EXPECT_EQ(e.seq, seq);
    EXPECT_EQ(q.now(), at);
  }
  EXPECT_TRUE(q.empty());
  EXPECT_EQ(q.processed(), 500);
}

TEST(EventQueue, RejectsPastAndEmptyAdvance) {
  EventQueue<int> q;
  q.schedule(5, EventKind::TimerExpiry, 0);
  q.advance();
  EXPECT_THROW(q.schedule(4, EventKind::TimerExpiry, 1), SchedulingError);
  EXPECT_NO_THROW(q.schedule(5, EventKind::TimerExpiry, 1));
  q.advance();
  EXPECT_THROW(q.advance(), SchedulingError);
}

TEST(EventQueue, ClockNeverMovesBackward) {
  EventQueue<int> q;
  std::mt19937 rng(11);
  for (int i = 0; i < 50; ++i) q.schedule(std::uniform_int_distribution<Tick>(0, 9)(rng), EventKind::TimerExpiry, i);
  Tick last = 0;
  int budget = 2000;
  while (!q.empty() && budget-- > 0) {
    auto e = q.advance();
    EXPECT_GE(e.at, last);
    last = e.at;
    if (e.payload < 1000) q.schedule(q.now() + std::uniform_int_distribution<Tick>(0, 3)(rng), EventKind::TimerExpiry,
                                     e.payload + 50);
  }
}

TEST(Simulator, SchedulingInThePastThrows) {
  Simulator sim(fixture("case_1b"));
  sim.run();
  EXPECT_THROW(sim.schedule(sim.now() - 1, EventKind::TimerExpiry,
                            TimerRef{TimerKind::UeNextStep, 0}),
               SchedulingError);
}

TEST(Simulator, TraceIsOrderedAndCausal) {
  for (const auto& stem : all_runnable()) {
    auto sc = fixture(stem);
    sc.options.jitter = 3;
    auto r = run_scenario(sc, 99, true);
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      EXPECT_GE(r.trace[i].at, r.trace[i - 1].at) << stem;
      if (r.trace[i].at == r.trace[i - 1].at) EXPECT_GT(r.trace[i].seq, r.trace[i - 1].seq) << stem;
    }
  }
}

TEST(Simulator, ResponsesAreNeverSentBeforeDelivery) {
  Simulator sim(quiet_fixture("case_1b"), 3);
  const Tick at = 4;
  SignalingMessage m;
  m.ue = UeId("ue1");
  for (auto [name, src, dst] : std::vector<std::tuple<MessageName, const char*, const char*>>{
           {MessageName::SubscriptionDataRequest, "amf1", "udm"},
           {MessageName::RegistrationRequest, "ue1", "amf1"},
           {MessageName::RouterAdvertisement, "smf1", "pcf"}}) {
    m.name = name;
    m.src = NfId(src);
    m.dst = NfId(dst);
    m.nssai = set_of({"eMBB:02"});
    m.sent_at = 0;
    m.delivered_at = at;
    for (const auto& out : sim.nf_handle(m, at)) {
      EXPECT_GE(out.sent_at, at);
      EXPECT_GE(out.delivered_at, out.sent_at);
    }
  }
}

TEST(Determinism, SameSeedSameBytes) {
  for (const auto& stem : all_runnable()) {
    auto sc = fixture(stem);
    auto a = run_scenario(sc, 5, true);
    auto b = run_scenario(sc, 5, true);
    EXPECT_EQ(a.trace_text(), b.trace_text()) << stem;
    EXPECT_EQ(a.metrics_csv(), b.metrics_csv()) << stem;
  }
}

TEST(Determinism, SeedIrrelevantWithoutJitter) {
  auto sc = fixture("all_cases");
  ASSERT_EQ(sc.options.jitter, 0);
  const auto base = run_scenario(sc, 0, true).trace_text();
  for (std::uint64_t seed : {1u, 42u, 1234567u}) EXPECT_EQ(run_scenario(sc, seed, true).trace_text(), base);
}

TEST(Determinism, JitterIsSeededAndReproducible) {
  auto sc = fixture("all_cases");
  sc.options.jitter = 4;
  std::set<std::string> distinct;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    auto a = run_scenario(sc, seed, true);
    EXPECT_EQ(a.trace_text(), run_scenario(sc, seed, true).trace_text());
    distinct.insert(a.trace_text());
  }
  EXPECT_GT(distinct.size(), 1u);
}

TEST(Metrics, TraceOnlyRecomputationMatches) {
  for (const auto& stem : all_runnable()) {
    auto sc = fixture(stem);
    auto r = run_scenario(sc, 0, true);
    auto again = recompute_report(r.trace, sc.name, 0);
    EXPECT_EQ(again, r.report) << stem;
    EXPECT_EQ(to_csv(again), r.metrics_csv()) << stem;
  }
}

TEST(Metrics, MessageCountsMatchDeliveries) {
  for (const auto& stem : all_runnable()) {
    auto r = run_scenario(fixture(stem), 0, true);
    std::map<std::string, std::int64_t> per_case;
    std::int64_t deliveries = 0;
    for (const auto& t : r.trace) {
      if (t.kind != EventKind::MessageDelivery) continue;
      ++deliveries;
      per_case[t.case_tag]++;
    }
    std::int64_t total = 0;
    for (const auto& [name, n] : r.report.totals) total += n;
    EXPECT_EQ(total, deliveries) << stem;
    EXPECT_EQ(r.report.events, static_cast<std::int64_t>(r.trace.size())) << stem;
    for (const auto& sw : r.report.switches) {
      std::int64_t sum = 0;
      for (const auto& [name, n] : sw.messages) sum += n;
      EXPECT_EQ(sum, per_case[sw.case_id + "#" + std::to_string(sw.switch_id)]) << stem;
    }
  }
}

TEST(Metrics, CsvShape) {
  auto r = run_scenario(fixture("case_2bT"), 0, true);
  const auto csv = r.metrics_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kMetricsHeader);
  EXPECT_NE(csv.find("switch,0,ue1,C2bT,Switched,eMBB:01,eMBB:02,19,messages,32\n"), std::string::npos);
  auto stay = fixture("case_2bT");
  stay.triggers[0].final_decision = false;
  EXPECT_NE(run_scenario(stay, 0, true).metrics_csv().find(",StayedOnCurrent,eMBB:01,eMBB:02,0,messages,4\n"), std::string::npos);
}

TEST(Metrics, AllCasesScenarioCoversEveryCase) {
  auto r = run_scenario(fixture("all_cases"), 0, true);
  std::set<std::string> ids;
  for (const auto& sw : r.report.switches) {
    EXPECT_EQ(sw.result, "Switched") << sw.case_id;
    ids.insert(sw.case_id);
  }
  std::set<std::string> want;
  for (auto id : kAllCases) want.insert(std::string(to_string(id)));
  EXPECT_EQ(ids, want);
  const auto csv = r.metrics_csv();
  for (const auto& id : want) EXPECT_NE(csv.find(",ue" + id.substr(1) + "," + id + ",Switched,"), std::string::npos) << id;
}

TEST(Golden, EveryFixtureMatches) {
  for (const auto& stem : kFixtures) {
    auto r = run_scenario(fixture(stem), 0, true);
    auto golden = load_projection(read_file(source_path("golden/" + stem + ".trace")));
    auto actual = load_projection(r.trace_text());
    auto d = diff_projection(actual, golden);
    EXPECT_TRUE(d.equal) << stem << " line " << d.first_divergence << "\n  expected " << d.expected << "\n  actual   "
                         << d.actual;
  }
}

TEST(Golden, TimingDoesNotAffectProjection) {
  auto sc = fixture("case_1c");
  sc.options.default_latency = 3;
  auto golden = load_projection(read_file(source_path("golden/case_1c.trace")));
  EXPECT_TRUE(diff_projection(load_projection(run_scenario(sc, 0, true).trace_text()), golden).equal);
}

namespace {

// Delivers a rogue command straight to the UE, bypassing the AMF, and queues
// the UE's reply so the loop keeps running.
Simulator rogue_ucu(bool check) {
  Simulator sim(quiet_fixture("case_1b"), 0, check);
  SignalingMessage m;
  m.name = MessageName::UeConfigurationUpdateCommand;
  m.src = NfId("amf1");
  m.dst = NfId("ue1");
  m.ue = UeId("ue1");
  m.nssai = set_of({"eMBB:02"});
  for (auto& out : sim.nf_handle(m, sim.now())) sim.schedule(out.delivered_at, EventKind::MessageDelivery, out);
  return sim;
}

}  // namespace

TEST(Invariants, ForcedViolationIsReported) {
  auto sim = rogue_ucu(true);
  try {
    sim.run();
    FAIL() << "expected InvariantViolation";
  } catch (const InvariantViolation& v) {
    EXPECT_EQ(v.invariant(), "active-session-in-allowed");
    EXPECT_EQ(v.seq(), 0);
  }
}

TEST(Invariants, UncheckedRunToleratesViolation) {
  auto sim = rogue_ucu(false);
  EXPECT_NO_THROW(sim.run());
  EXPECT_TRUE(sim.idle());
}
