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

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include "nvtrack/core/env.hpp"
#include "nvtrack/core/scheduler.hpp"

namespace nvtrack {
namespace {

struct TestLine : SimLine {
  TestLine(SimEnv& env, CacheMode mode)
      : SimLine(env, mode), a(*this, CellRole::generic, 0), b(*this, CellRole::generic, 0) {}
  SimCell<std::int64_t> a;
  SimCell<std::int64_t> b;
};

TEST(Payload, SentinelsAreDistinctFromUserValues) {
  EXPECT_TRUE(Payload().is_bottom());
  EXPECT_NE(Payload::null(), Payload::empty());
  EXPECT_NE(Payload::empty(), Payload::timeout());
  EXPECT_FALSE(Payload::null().is_user());
  EXPECT_TRUE(Payload::of(0).is_user());
  EXPECT_EQ(Payload::of(-7).value(), -7);
  EXPECT_THROW(Payload::of(kMinKey), std::invalid_argument);
  EXPECT_THROW(Payload::timeout().value(), std::logic_error);
  EXPECT_EQ(Payload::empty().to_string(), "EMPTY");
}

TEST(Tagged, MarkedRefPacksMarkIntoLowBit) {
  alignas(8) int x = 0;
  MarkedRef<int> r(&x, false);
  MarkedRef<int> m = r.with_mark(true);
  EXPECT_EQ(m.get(), &x);
  EXPECT_TRUE(m.marked());
  EXPECT_FALSE(r.marked());
  EXPECT_NE(r, m);
  EXPECT_EQ(m.with_mark(false), r);
}

TEST(Tagged, UpdateWordCasChangesBothHalvesAtOnce) {
  SimEnv env(1);
  struct Rec {
    alignas(8) int dummy = 0;
  } r1, r2;
  struct Line : SimLine {
    explicit Line(SimEnv& e)
        : SimLine(e, CacheMode::durable), w(*this, CellRole::bst_update, UpdateWord<Rec>(UpdateState::clean, nullptr)) {}
    SimCell<UpdateWord<Rec>> w;
  } line(env);
  UpdateWord<Rec> clean(UpdateState::clean, &r1);
  line.w.store(clean);
  EXPECT_FALSE(line.w.cas(UpdateWord<Rec>(UpdateState::iflag, &r1), UpdateWord<Rec>(UpdateState::mark, &r2)));
  EXPECT_EQ(line.w.load(), clean);
  ASSERT_TRUE(line.w.cas(clean, UpdateWord<Rec>(UpdateState::dflag, &r2)));
  EXPECT_EQ(line.w.load().state(), UpdateState::dflag);
  EXPECT_EQ(line.w.load().info(), &r2);
}

TEST(Arena, AllocationsRespectAlignment) {
  Arena arena(128);
  struct alignas(64) Big {
    char c[100];
  };
  for (int i = 0; i < 50; ++i) {
    Big* b = arena.make<Big>();
    EXPECT_EQ(reinterpret_cast<std::uintptr_t>(b) % 64, 0U);
  }
  EXPECT_GE(arena.bytes_used(), 50 * sizeof(Big));
}

TEST(SimCell, DurableWriteSurvivesCrash) {
  SimEnv env(1);
  TestLine line(env, CacheMode::durable);
  line.a.store(5);
  EXPECT_EQ(env.dirty_cells(), 0U);
  env.crash();
  EXPECT_EQ(line.a.load(), 5);
}

TEST(SimCell, VolatileUnflushedWriteIsLost) {
  SimEnv env(1);
  TestLine line(env, CacheMode::volatile_cache);
  line.a.store(5);
  EXPECT_EQ(line.a.peek_persisted(), 0);
  EXPECT_EQ(env.dirty_cells(), 1U);
  env.crash();
  EXPECT_EQ(line.a.load(), 0);
}

TEST(SimCell, FlushPersistsTheWholeLine) {
  SimEnv env(1);
  TestLine line(env, CacheMode::volatile_cache);
  line.a.store(1);
  line.b.store(2);
  line.a.flush();
  EXPECT_EQ(env.dirty_cells(), 0U);
  line.b.store(3);
  env.crash();
  EXPECT_EQ(line.a.load(), 1);
  EXPECT_EQ(line.b.load(), 2);
}

TEST(SimCell, CrashWithoutInFlightWritesChangesNothing) {
  SimEnv env(1);
  TestLine line(env, CacheMode::volatile_cache);
  line.a.store(4);
  line.a.flush();
  env.crash();
  env.crash();
  EXPECT_EQ(line.a.load(), 4);
  EXPECT_EQ(env.crashes(), 2U);
}

TEST(SimCell, EveryAccessIsOneStep) {
  SimEnv env(1);
  TestLine line(env, CacheMode::volatile_cache);
  std::uint64_t s0 = env.total_steps();
  line.a.store(1);
  line.a.load();
  line.a.cas(1, 2);
  line.a.flush();
  EXPECT_EQ(env.total_steps() - s0, 4U);
  line.a.peek();
  line.a.peek_persisted();
  EXPECT_EQ(env.total_steps() - s0, 4U);
}

TEST(SimCell, StepLimitThrowsInDirectMode) {
  SimEnv env(1);
  TestLine line(env, CacheMode::durable);
  env.set_step_limit(env.total_steps() + 2);
  line.a.store(1);
  line.a.store(2);
  EXPECT_THROW(line.a.store(3), StepBudgetExceeded);
  EXPECT_EQ(line.a.peek(), 2);
}

TEST(CrashPolicy, DropRandomIsSeeded) {
  auto survivors = [](std::uint64_t seed) {
    SimEnv env(1);
    std::vector<std::unique_ptr<TestLine>> lines;
    for (int i = 0; i < 64; ++i) {
      lines.push_back(std::make_unique<TestLine>(env, CacheMode::volatile_cache));
      lines.back()->a.store(1);
    }
    CrashPolicy p = CrashPolicy::drop_random(0.5, seed);
    env.crash(p);
    std::string bits;
    for (auto& l : lines) bits += l->a.peek() == 1 ? '1' : '0';
    return bits;
  };
  EXPECT_EQ(survivors(3), survivors(3));
  std::string s = survivors(3);
  EXPECT_NE(s.find('0'), std::string::npos);
  EXPECT_NE(s.find('1'), std::string::npos);
}

TEST(CrashPolicy, AdversarialKeepsChosenCells) {
  SimEnv env(1);
  TestLine line(env, CacheMode::volatile_cache);
  line.a.store(1);
  line.b.store(2);
  const SimCellBase* keep = &line.b;
  CrashPolicy p = CrashPolicy::adversarial([keep](const SimCellBase& c) { return &c == keep; });
  env.crash(p);
  EXPECT_EQ(line.a.peek(), 0);
  EXPECT_EQ(line.b.peek(), 2);
  EXPECT_EQ(line.b.peek_persisted(), 2);
}

TEST(ProcessCtx, CheckpointAndRecoveryDataAreDurable) {
  SimEnv env(2);
  InfoRecordT<SimLine> rec(env, CacheMode::volatile_cache, InfoKind::list);
  env.ctx(1).cp.store(1);
  env.ctx(1).rd.store(&rec);
  env.crash();
  EXPECT_EQ(env.ctx(1).cp.load(), 1U);
  EXPECT_EQ(env.ctx(1).rd.load(), &rec);
  EXPECT_EQ(env.ctx(0).cp.load(), 0U);
}

TEST(ProcessCtx, BeginOpResetsCheckpoint) {
  SimEnv env(1);
  env.ctx(0).cp.store(1);
  env.begin_op(0);
  EXPECT_EQ(env.ctx(0).cp.peek(), 0U);
}

TEST(Scheduler, InterleavesAtEveryStep) {
  SimEnv env(2);
  TestLine line(env, CacheMode::durable);
  Scheduler sched(env);
  std::vector<Pid> order;
  env.set_observer([&](const AccessEvent& e) { order.push_back(e.pid); });
  for (Pid p = 0; p < 2; ++p) {
    sched.spawn(p, [&line] {
      for (int i = 0; i < 3; ++i) line.a.store(line.a.load() + 1);
    });
  }
  // Alternate strictly between the two processes.
  struct Alternate : Chooser {
    Decision choose(const ChoicePoint& pt) override {
      if (pt.runnable.size() == 1) return Decision::run(pt.runnable[0]);
      Pid next = pt.current && *pt.current == 0 ? 1 : 0;
      return Decision::run(next);
    }
  } alt;
  CrashPolicy policy = CrashPolicy::drop_all_unflushed();
  EXPECT_EQ(sched.run(alt, policy, {}, {}), RunStatus::completed);
  ASSERT_EQ(order.size(), 12U);
  for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(order[i], i % 2);
  EXPECT_EQ(env.steps(0), 6U);
  EXPECT_EQ(env.steps(1), 6U);
}

TEST(Scheduler, CrashDiscardsSuspendedProcessesAndRespawns) {
  SimEnv env(1);
  TestLine line(env, CacheMode::volatile_cache);
  Scheduler sched(env);
  int started = 0;
  int finished = 0;
  auto body = [&] {
    ++started;
    line.a.store(7);
    line.a.flush();
    line.b.store(9);
    ++finished;
  };
  sched.spawn(0, body);
  // Crash once, right before the flush.
  struct CrashAtThird : Chooser {
    int n = 0;
    Decision choose(const ChoicePoint& pt) override {
      if (++n == 3 && pt.crash_allowed) return Decision::crash_now();
      return Decision::run(pt.runnable[0]);
    }
  } chooser;
  bool respawned = false;
  CrashPolicy policy = CrashPolicy::drop_all_unflushed();
  auto status = sched.run(
      chooser, policy,
      [&] {
        EXPECT_EQ(line.a.peek(), 0);  // store was never flushed
        respawned = true;
        sched.spawn(0, body);
      },
      [] { return true; });
  EXPECT_EQ(status, RunStatus::completed);
  EXPECT_TRUE(respawned);
  EXPECT_EQ(started, 2);
  EXPECT_EQ(finished, 1);
  EXPECT_EQ(sched.crashes(), 1U);
  EXPECT_EQ(line.a.peek_persisted(), 7);
}

TEST(Scheduler, BudgetExhaustionIsInconclusive) {
  SimEnv env(1);
  TestLine line(env, CacheMode::durable);
  Scheduler sched(env, 50);
  sched.spawn(0, [&] {
    while (line.a.load() == 0) env.spin_hint(0);
  });
  struct First : Chooser {
    Decision choose(const ChoicePoint& pt) override { return Decision::run(pt.runnable[0]); }
  } c;
  CrashPolicy policy = CrashPolicy::drop_all_unflushed();
  EXPECT_EQ(sched.run(c, policy, {}, {}), RunStatus::inconclusive);
}

TEST(Scheduler, TaskExceptionsPropagate) {
  SimEnv env(1);
  TestLine line(env, CacheMode::durable);
  Scheduler sched(env);
  sched.spawn(0, [&] {
    line.a.load();
    throw std::runtime_error("boom");
  });
  struct First : Chooser {
    Decision choose(const ChoicePoint& pt) override { return Decision::run(pt.runnable[0]); }
  } c;
  CrashPolicy policy = CrashPolicy::drop_all_unflushed();
  EXPECT_THROW(sched.run(c, policy, {}, {}), std::runtime_error);
}

TEST(Scheduler, RejectsCrashWhenNotAllowed) {
  SimEnv env(1);
  TestLine line(env, CacheMode::durable);
  Scheduler sched(env);
  sched.spawn(0, [&] { line.a.load(); });
  struct Crasher : Chooser {
    Decision choose(const ChoicePoint&) override { return Decision::crash_now(); }
  } c;
  CrashPolicy policy = CrashPolicy::drop_all_unflushed();
  EXPECT_THROW(sched.run(c, policy, {}, [] { return false; }), std::logic_error);
}

TEST(NativeEnv, ConcurrentCasIncrements) {
  NativeEnv env(4);
  struct Line : NativeLine {
    explicit Line(NativeEnv& e) : NativeLine(e, CacheMode::durable), c(*this, CellRole::generic, 0) {}
    NativeCell<std::int64_t> c;
  } line(env);
  std::vector<std::thread> ts;
  for (int t = 0; t < 4; ++t) {
    ts.emplace_back([&] {
      for (int i = 0; i < 10000; ++i) {
        std::int64_t v = line.c.load();
        while (!line.c.cas(v, v + 1)) v = line.c.load();
      }
    });
  }
  for (auto& t : ts) t.join();
  EXPECT_EQ(line.c.load(), 40000);
  line.c.flush();
  EXPECT_NE(std::string(persist::flush_method_name(persist::flush_method())), "unknown");
}

TEST(NativeEnv, ArenaPerProcess) {
  NativeEnv env(2);
  int* a = env.make<int>(0, 1);
  int* b = env.make<int>(1, 2);
  EXPECT_EQ(*a, 1);
  EXPECT_EQ(*b, 2);
  EXPECT_THROW(NativeEnv(0), std::invalid_argument);
}

}  // namespace
}  // namespace nvtrack
