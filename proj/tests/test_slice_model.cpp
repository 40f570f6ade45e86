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

#include <algorithm>
#include <iterator>
#include <random>

#include "support.hpp"

using namespace slicesim;
using namespace slicesim::testing;

namespace {

// Five eMBB slices A..E.
std::vector<SNssai> universe() {
  return {sn("eMBB:0A"), sn("eMBB:0B"), sn("eMBB:0C"), sn("eMBB:0D"), sn("eMBB:0E")};
}

SnssaiSet subset_by_mask(const std::vector<SNssai>& u, unsigned mask) {
  SnssaiSet out;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (mask & (1u << i)) out.insert(u[i]);
  return out;
}

SnssaiSet intersect(const SnssaiSet& a, const SnssaiSet& b) {
  SnssaiSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.begin()));
  return out;
}

// Linear scan over the priority table: listed slices by index, then
// unlisted ones, ties by sd.
std::optional<SNssai> scan_priorities(const std::vector<SNssai>& candidates, const std::map<SNssai, int>& prio) {
  std::optional<SNssai> best;
  long best_key = 0;
  for (const auto& c : candidates) {
    auto it = prio.find(c);
    const long key = it == prio.end() ? 1'000'000 : it->second;
    if (!best || key < best_key || (key == best_key && c.sd < best->sd)) {
      best = c;
      best_key = key;
    }
  }
  return best;
}

}  // namespace

TEST(SNssai, ParsesAndPrints) {
  auto s = parse_snssai("URLLC:1a2b");
  ASSERT_TRUE(s);
  EXPECT_EQ(s->sst, ServiceType::URLLC);
  EXPECT_EQ(s->sd, "1a2b");
  EXPECT_EQ(to_string(*s), "URLLC:1a2b");
  EXPECT_FALSE(parse_snssai("eMBB:"));
  EXPECT_FALSE(parse_snssai("eMBB:1234567"));
  EXPECT_FALSE(parse_snssai("eMBB:zz"));
  EXPECT_FALSE(parse_snssai("LTE:01"));
  EXPECT_FALSE(parse_snssai("eMBB01"));
}

TEST(SNssai, OrderedBySstThenSd) {
  EXPECT_LT(sn("URLLC:02"), sn("eMBB:01"));
  EXPECT_LT(sn("eMBB:01"), sn("eMBB:02"));
  EXPECT_EQ(set_of({"eMBB:01", "eMBB:01"}).size(), 1u);
}

TEST(VerifyRequested, SubsetCase) {
  auto r = verify_requested_nssai(set_of({"eMBB:0A"}), subs_of({"eMBB:0A", "eMBB:0B"}),
                                  set_of({"eMBB:0A", "eMBB:0B", "eMBB:0C"}));
  EXPECT_EQ(r.accepted, set_of({"eMBB:0A"}));
  EXPECT_TRUE(r.rejected.empty());
}

TEST(VerifyRequested, UnsubscribedSlice) {
  auto r = verify_requested_nssai(set_of({"eMBB:0D"}), subs_of({"eMBB:0A", "eMBB:0B"}),
                                  set_of({"eMBB:0A", "eMBB:0B", "eMBB:0C", "eMBB:0D"}));
  EXPECT_TRUE(r.accepted.empty());
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.rejected.at(sn("eMBB:0D")), RejectCause::NotSubscribed);
}

TEST(VerifyRequested, MixedRejection) {
  auto r = verify_requested_nssai(set_of({"eMBB:0A", "eMBB:0D", "eMBB:0E"}), subs_of({"eMBB:0A", "eMBB:0D"}),
                                  set_of({"eMBB:0A", "eMBB:0B", "eMBB:0C", "eMBB:0D"}));
  EXPECT_EQ(r.accepted, set_of({"eMBB:0A", "eMBB:0D"}));
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.rejected.at(sn("eMBB:0E")), RejectCause::NotConfigured);
}

TEST(VerifyRequested, EmptyRequestIsInvalid) {
  EXPECT_THROW(verify_requested_nssai({}, subs_of({"eMBB:0A"}), set_of({"eMBB:0A"})), InvalidRequest);
}

TEST(VerifyRequested, MatchesIntersectionOracleOverAllThreeSubsets) {
  const auto u = universe();
  int checked = 0;
  for (unsigned req = 0; req < 32; ++req) {
    if (__builtin_popcount(req) != 3) continue;
    const auto requested = subset_by_mask(u, req);
    for (unsigned sub = 0; sub < 32; ++sub) {
      const auto subscribed_set = subset_by_mask(u, sub);
      SubscribedSet subscribed;
      for (const auto& s : subscribed_set) subscribed.push_back({s, false});
      for (unsigned conf = 0; conf < 32; ++conf) {
        const auto configured = subset_by_mask(u, conf);
        const auto r = verify_requested_nssai(requested, subscribed, configured);
        const auto expected = intersect(intersect(requested, subscribed_set), configured);
        ASSERT_EQ(r.accepted, expected);
        ASSERT_EQ(r.accepted.size() + r.rejected.size(), requested.size());
        for (const auto& [s, why] : r.rejected) {
          ASSERT_TRUE(requested.contains(s));
          ASSERT_EQ(why, configured.contains(s) ? RejectCause::NotSubscribed : RejectCause::NotConfigured);
        }
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 10 * 32 * 32);
}

TEST(VerifyRequested, Idempotent) {
  std::mt19937 rng(7);
  const auto u = universe();
  for (int i = 0; i < 500; ++i) {
    const auto requested = subset_by_mask(u, 1 + rng() % 31);
    const auto subscribed_set = subset_by_mask(u, rng() % 32);
    const auto configured = subset_by_mask(u, rng() % 32);
    SubscribedSet subscribed;
    for (const auto& s : subscribed_set) subscribed.push_back({s, false});
    const auto first = verify_requested_nssai(requested, subscribed, configured);
    if (first.accepted.empty()) continue;
    const auto again = verify_requested_nssai(first.accepted, subscribed, configured);
    EXPECT_EQ(again.accepted, first.accepted);
    EXPECT_TRUE(again.rejected.empty());
  }
}

TEST(ComputeAllowed, RemovesActiveSlice) {
  auto r = compute_allowed_nssai(set_of({"eMBB:0A"}), set_of({"eMBB:0B"}), true, sn("eMBB:0A"));
  ASSERT_TRUE(r);
  EXPECT_EQ(r.value(), set_of({"eMBB:0B"}));
}

TEST(ComputeAllowed, TentativeKeepsActiveSlice) {
  auto r = compute_allowed_nssai(set_of({"eMBB:0A"}), set_of({"eMBB:0B"}), false, sn("eMBB:0A"));
  ASSERT_TRUE(r);
  EXPECT_EQ(r.value(), set_of({"eMBB:0A", "eMBB:0B"}));
}

TEST(ComputeAllowed, OverflowIsRejectedNotTruncated) {
  SnssaiSet current, accepted;
  for (char c = '1'; c <= '8'; ++c) current.insert(sn(std::string("eMBB:0") + c));
  accepted = current;
  accepted.insert(sn("eMBB:09"));
  auto r = compute_allowed_nssai(current, accepted, false, sn("eMBB:01"));
  ASSERT_FALSE(r);
  EXPECT_EQ(r.error().size, 9u);
  EXPECT_GT(accepted.size(), kMaxAllowedSlices);
}

TEST(ComputeAllowed, NeverDropsActiveWhenKept) {
  std::mt19937 rng(11);
  const auto u = universe();
  for (int i = 0; i < 500; ++i) {
    const auto accepted = subset_by_mask(u, 1 + rng() % 31);
    const auto active = u[rng() % u.size()];
    auto r = compute_allowed_nssai({}, accepted, false, active);
    ASSERT_TRUE(r);
    EXPECT_TRUE(r.value().contains(active));
    EXPECT_LE(r.value().size(), kMaxAllowedSlices);
  }
}

TEST(SelectAlternate, SingleRemainingCandidate) {
  NssaiView v{set_of({"eMBB:0A", "eMBB:0B"}), subs_of({"eMBB:0A", "eMBB:0B"}), set_of({"eMBB:0A"}), {}};
  EXPECT_EQ(select_alternate_snssai(v, ServiceType::eMBB, sn("eMBB:0A"), {}), sn("eMBB:0B"));
}

TEST(SelectAlternate, NoCandidate) {
  NssaiView v{set_of({"eMBB:0A"}), subs_of({"eMBB:0A"}), set_of({"eMBB:0A"}), {}};
  EXPECT_FALSE(select_alternate_snssai(v, ServiceType::eMBB, sn("eMBB:0A"), {}));
}

TEST(SelectAlternate, LowestPriorityIndexWins) {
  NssaiView v{set_of({"eMBB:0A", "eMBB:0B", "eMBB:0C"}), subs_of({"eMBB:0A", "eMBB:0B", "eMBB:0C"}),
              set_of({"eMBB:0A"}), {}};
  std::map<SNssai, int> prio{{sn("eMBB:0B"), 2}, {sn("eMBB:0C"), 1}};
  EXPECT_EQ(select_alternate_snssai(v, ServiceType::eMBB, sn("eMBB:0A"), prio), sn("eMBB:0C"));
}

TEST(SelectAlternate, AgreesWithLinearScan) {
  std::mt19937 rng(3);
  std::vector<SNssai> pool = universe();
  pool.push_back(sn("URLLC:0A"));
  pool.push_back(sn("URLLC:0B"));
  for (int i = 0; i < 2000; ++i) {
    NssaiView v;
    for (const auto& s : pool) {
      if (rng() % 2) v.subscribed.push_back({s, v.subscribed.empty()});
      if (rng() % 4) v.configured.insert(s);
    }
    std::map<SNssai, int> prio;
    for (const auto& s : pool)
      if (rng() % 2) prio[s] = static_cast<int>(rng() % 4);
    const auto exclude = pool[rng() % pool.size()];
    const auto st = rng() % 2 ? ServiceType::eMBB : ServiceType::URLLC;
    std::vector<SNssai> candidates;
    for (const auto& s : v.subscribed)
      if (s.snssai != exclude && s.snssai.sst == st && v.configured.contains(s.snssai)) candidates.push_back(s.snssai);
    const auto got = select_alternate_snssai(v, st, exclude, prio);
    ASSERT_EQ(got, scan_priorities(candidates, prio));
    if (got) {
      EXPECT_NE(*got, exclude);
      EXPECT_EQ(got->sst, st);
    }
  }
}

TEST(NssaiView, ViolationNames) {
  NssaiView ok{set_of({"eMBB:0A", "eMBB:0B"}), subs_of({"eMBB:0A", "eMBB:0B"}), set_of({"eMBB:0A"}), {}};
  EXPECT_TRUE(nssai_violations(ok).empty());

  auto bad = ok;
  bad.allowed.insert(sn("eMBB:0C"));
  auto v = nssai_violations(bad);
  EXPECT_NE(std::find(v.begin(), v.end(), "allowed-subset-of-configured"), v.end());
  EXPECT_NE(std::find(v.begin(), v.end(), "allowed-subset-of-subscribed"), v.end());

  auto nodefault = ok;
  for (auto& s : nodefault.subscribed) s.is_default = false;
  EXPECT_EQ(nssai_violations(nodefault), std::vector<std::string>{"default-subscribed-snssai"});
}

TEST(PduSession, TransitionTableIsExhaustive) {
  using S = SessionState;
  const std::array all{S::Inactive, S::Establishing, S::Active, S::Releasing, S::Released};
  const std::set<std::pair<S, S>> legal{{S::Inactive, S::Establishing},
                                        {S::Establishing, S::Active},
                                        {S::Establishing, S::Released},
                                        {S::Active, S::Releasing},
                                        {S::Releasing, S::Released}};
  for (auto from : all)
    for (auto to : all) EXPECT_EQ(is_legal_transition(from, to), legal.contains({from, to}));
}

TEST(PduSession, ReleaseClearsPrefix) {
  PduSession ps;
  ps.session_id = SessionId("s1");
  ps.transition(SessionState::Establishing);
  ps.transition(SessionState::Active);
  ps.ip_prefix = "pfx-s1";
  ps.transition(SessionState::Releasing);
  EXPECT_TRUE(ps.ip_prefix);
  ps.transition(SessionState::Released);
  EXPECT_FALSE(ps.ip_prefix);
  EXPECT_THROW(ps.transition(SessionState::Active), IllegalTransition);
}
