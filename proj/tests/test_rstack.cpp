// Copyright 2026 The nvtrack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <thread>
#include <vector>

#include "nvtrack/harness/explorer.hpp"
#include "nvtrack/rstack/stack.hpp"
#include "support.hpp"

namespace nvtrack {
namespace {

using testing::run_for;

template <bool R>
void lifo_oracle() {
  SimEnv env(1);
  EliminationStack<SimEnv, R> s(env);
  std::vector<std::int64_t> oracle;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20000; ++i) {
    if (rng() % 2 == 0) {
      auto v = static_cast<std::int64_t>(rng() % 1000);
      ASSERT_TRUE(s.push(0, Payload::of(v)));
      oracle.push_back(v);
    } else {
      Payload r = s.pop(0);
      if (oracle.empty()) {
        ASSERT_EQ(r, Payload::empty()) << i;
      } else {
        ASSERT_EQ(r, Payload::of(oracle.back())) << i;
        oracle.pop_back();
      }
    }
  }
  auto snap = s.snapshot();
  ASSERT_EQ(snap.size(), oracle.size());
  for (std::size_t i = 0; i < snap.size(); ++i) EXPECT_EQ(snap[i].raw(), oracle[oracle.size() - 1 - i]);
}

TEST(StackOracle, RecoverableMatchesLifo) { lifo_oracle<true>(); }
TEST(StackOracle, BaseMatchesLifo) { lifo_oracle<false>(); }

TEST(EliminationPolicy, RangeAdaptsWithinBounds) {
  EliminationPolicy p(3, 5);
  EXPECT_EQ(p.range(), 1U);
  p.record_success();
  EXPECT_EQ(p.range(), 1U);
  p.record_failure();
  p.record_failure();
  p.record_failure();
  EXPECT_EQ(p.range(), 3U);
  p.record_success();
  EXPECT_EQ(p.range(), 2U);
  EXPECT_THROW(EliminationPolicy(0, 1), std::invalid_argument);
  EXPECT_THROW(EliminationPolicy(1, 0), std::invalid_argument);
}

// Values 1 collide with the pushed marker encoding; recovery must still tell
// a completed push of 1 from a pop that returned 1.
TEST(StackRecovery, EveryCrashPointOfPushAndPop) {
  for (std::int64_t value : {1, 42}) {
    for (std::uint64_t k = 0;; ++k) {
      SimEnv env(1);
      EliminationStack<SimEnv, true> s(env);
      s.push(0, Payload::of(7));
      env.begin_op(0);
      if (run_for(env, k, [&] { s.push(0, Payload::of(value)); })) break;
      env.crash();
      EXPECT_TRUE(s.push_recover(0, Payload::of(value))) << "crash at " << k;
      auto snap = s.snapshot();
      ASSERT_EQ(snap.size(), 2U) << "crash at " << k;
      EXPECT_EQ(snap[0], Payload::of(value));
    }
    for (std::uint64_t k = 0;; ++k) {
      SimEnv env(1);
      EliminationStack<SimEnv, true> s(env);
      s.push(0, Payload::of(7));
      s.push(0, Payload::of(value));
      env.begin_op(0);
      if (run_for(env, k, [&] { s.pop(0); })) break;
      env.crash();
      EXPECT_EQ(s.pop_recover(0), Payload::of(value)) << "crash at " << k;
      ASSERT_EQ(s.snapshot().size(), 1U) << "crash at " << k;
    }
  }
}

TEST(StackRecovery, PopOnEmptyEveryCrashPoint) {
  for (std::uint64_t k = 0;; ++k) {
    SimEnv env(1);
    EliminationStack<SimEnv, true> s(env);
    env.begin_op(0);
    if (run_for(env, k, [&] { s.pop(0); })) break;
    env.crash();
    EXPECT_EQ(s.pop_recover(0), Payload::empty()) << "crash at " << k;
  }
}

// Concurrent pushes and pops on one elimination slot: count pushes that
// completed through a collision (a pop hands the pusher NULL).
TEST(StackElimination, CollisionsHappenAndStayCorrect) {
  SubjectSpec spec{StructureKind::stack, {}};
  spec.options.stack.slots = 1;
  Workload w{{{OpCode::push, 9}},
             {{{OpCode::push, 1}, {OpCode::pop, 0}}, {{OpCode::pop, 0}, {OpCode::push, 2}}, {{OpCode::pop, 0}}}};
  std::uint64_t eliminated = 0;
  RunConfig cfg;
  cfg.instrument = [&](SimEnv& env, Subject&) {
    env.set_observer([&](const AccessEvent& e) {
      if (e.role == CellRole::ex_result && e.kind == AccessKind::write && e.after == static_cast<std::uint64_t>(Payload::null().raw())) {
        ++eliminated;
      }
    });
  };
  auto st = explore_random(spec, w, cfg, 3000, 17, 0.01, 1);
  EXPECT_EQ(st.violations, 0U) << (st.witnesses.empty() ? "" : st.witnesses[0]);
  EXPECT_EQ(st.inconclusive, 0U);
  EXPECT_GT(eliminated, 0U);
}

TEST(StackElimination, ExhaustivePopPopArbitration) {
  SubjectSpec spec{StructureKind::stack, {}};
  Workload w{{{OpCode::push, 5}}, {{{OpCode::pop, 0}}, {{OpCode::pop, 0}}}};
  ExploreLimits lim;
  lim.preemption_bound = 2;
  auto st = explore_exhaustive(spec, w, RunConfig{}, lim, [](const RunOutcome& out, const RunVerdict&) {
    int got = 0;
    for (const auto& o : extract_ops(out.history)) {
      if (o.response && *o.response == Payload::of(5)) ++got;
    }
    EXPECT_EQ(got, 1) << out.history.dump();
  });
  EXPECT_TRUE(st.exhausted);
  EXPECT_EQ(st.violations, 0U);
}

TEST(StackNative, ConcurrentPushPopConservesValues) {
  constexpr unsigned kThreads = 4;
  constexpr int kPerThread = 5000;
  NativeEnv env(kThreads);
  EliminationStack<NativeEnv, true> s(env, StackOptions{.slots = 2});
  std::vector<std::vector<std::int64_t>> popped(kThreads);
  std::vector<std::thread> ts;
  for (unsigned t = 0; t < kThreads; ++t) {
    ts.emplace_back([&, t] {
      for (int i = 0; i < kPerThread; ++i) {
        s.push(t, Payload::of(static_cast<std::int64_t>(t) * kPerThread + i));
        Payload r = s.pop(t);
        if (r.is_user()) popped[t].push_back(r.value());
      }
    });
  }
  for (auto& t : ts) t.join();
  std::vector<std::int64_t> all;
  for (auto& v : popped) all.insert(all.end(), v.begin(), v.end());
  for (Payload v : s.snapshot()) all.push_back(v.value());
  std::sort(all.begin(), all.end());
  ASSERT_EQ(all.size(), kThreads * kPerThread);
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], static_cast<std::int64_t>(i));
}

}  // namespace
}  // namespace nvtrack
