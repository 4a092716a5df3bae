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

#include "nvtrack/harness/explorer.hpp"
#include "nvtrack/rexchanger/exchanger.hpp"
#include "support.hpp"

namespace nvtrack {
namespace {

using testing::run_for;

TEST(TimedExchanger, LoneExchangeTimesOutAndResetsSlot) {
  SimEnv env(1);
  TimedExchanger<SimEnv, true> ex(env, 2);
  EXPECT_EQ(ex.exchange(0, 1, Payload::of(4), 20), Payload::timeout());
  EXPECT_TRUE(ex.quiescent());
  EXPECT_THROW(ex.exchange(0, 0, Payload::of(4), 0), std::invalid_argument);
}

TEST(TimedExchanger, RecoveryAfterEveryCrashPointOfALoneExchange) {
  for (std::uint64_t k = 0;; ++k) {
    SimEnv env(1);
    TimedExchanger<SimEnv, true> ex(env, 1);
    env.begin_op(0);
    env.ctx(0).rd.store(nullptr);
    Payload r;
    if (run_for(env, k, [&] { r = ex.exchange(0, 0, Payload::of(4), 10); })) {
      EXPECT_EQ(r, Payload::timeout());
      break;
    }
    env.crash();
    auto* rec = static_cast<ExInfo<SimEnv>*>(env.ctx(0).rd.load());
    if (rec != nullptr) {
      Payload rr = ex.exchange_recover(rec);
      // Alone there is nobody to pair with: either never collided or timed out.
      EXPECT_TRUE(rr.is_bottom() || rr == Payload::timeout()) << "crash at " << k << ": " << rr.to_string();
    }
    EXPECT_TRUE(ex.quiescent()) << "crash at " << k;
  }
}

Workload exchanges(std::vector<std::vector<std::int64_t>> per_pid) {
  Workload w;
  for (auto& vals : per_pid) {
    w.programs.emplace_back();
    for (auto v : vals) w.programs.back().push_back({OpCode::exchange, v});
  }
  return w;
}

TEST(Exchanger, TwoProcessesSwapValues) {
  SubjectSpec spec{StructureKind::exchanger, {}};
  Workload w = exchanges({{1}, {2}});
  RandomChooser chooser(3, 0.0, 0);
  RunOutcome out = run_schedule(spec, w, chooser, RunConfig{});
  ASSERT_EQ(out.status, RunStatus::completed);
  auto ops = extract_ops(out.history);
  ASSERT_EQ(ops.size(), 2U);
  for (const auto& o : ops) {
    ASSERT_TRUE(o.response);
    EXPECT_EQ(o.response->raw(), o.op.arg == 1 ? 2 : 1);
  }
  EXPECT_EQ(evaluate(out, SpecKind::exchanger).verdict, Verdict::ok);
}

TEST(Exchanger, LoneExchangeIsInconclusiveNotAFailure) {
  SubjectSpec spec{StructureKind::exchanger, {}};
  SequentialChooser seq;
  RunConfig cfg;
  cfg.op_step_budget = 200;
  RunOutcome out = run_schedule(spec, exchanges({{1}}), seq, cfg);
  EXPECT_EQ(out.status, RunStatus::inconclusive);
  EXPECT_TRUE(evaluate(out, SpecKind::exchanger).inconclusive);
}

TEST(Exchanger, ExhaustiveOneCrashPairsCorrectly) {
  SubjectSpec spec{StructureKind::exchanger, {}};
  ExploreLimits lim;
  lim.preemption_bound = 2;
  auto st = explore_exhaustive(spec, exchanges({{1}, {2}}), RunConfig{}, lim);
  EXPECT_TRUE(st.exhausted);
  EXPECT_EQ(st.violations, 0U);
  EXPECT_GT(st.ok, 100U);
}

TEST(TimedExchanger, SampledSchedulesPairOrTimeOut) {
  SubjectSpec spec{StructureKind::timed_exchanger, {}};
  std::uint64_t paired = 0;
  auto st = explore_random(spec, exchanges({{1, 2}, {3}, {4}}), RunConfig{}, 2000, 5, 0.02, 1,
                           [&](const RunOutcome& out, const RunVerdict&) {
                             for (const auto& o : extract_ops(out.history)) {
                               if (o.response && o.response->is_user()) ++paired;
                             }
                           });
  EXPECT_EQ(st.violations, 0U);
  EXPECT_EQ(st.inconclusive, 0U);
  EXPECT_GT(paired, 0U);
}

TEST(PairingChecker, AcceptsMutualSwap) {
  History h;
  h.invoke(0, {OpCode::exchange, 1});
  h.invoke(1, {OpCode::exchange, 2});
  h.respond(0, {OpCode::exchange, 1}, Payload::of(2));
  h.respond(1, {OpCode::exchange, 2}, Payload::of(1));
  EXPECT_EQ(check_exchange_pairing(h).verdict, Verdict::ok);
}

TEST(PairingChecker, RejectsOneSidedExchange) {
  History h;
  h.invoke(0, {OpCode::exchange, 1});
  h.invoke(1, {OpCode::exchange, 2});
  h.respond(0, {OpCode::exchange, 1}, Payload::of(2));
  h.respond(1, {OpCode::exchange, 2}, Payload::timeout());
  EXPECT_EQ(check_exchange_pairing(h).verdict, Verdict::violation);
}

TEST(PairingChecker, RejectsNonOverlappingPair) {
  History h;
  h.invoke(0, {OpCode::exchange, 1});
  h.respond(0, {OpCode::exchange, 1}, Payload::of(2));
  h.invoke(1, {OpCode::exchange, 2});
  h.respond(1, {OpCode::exchange, 2}, Payload::of(1));
  EXPECT_EQ(check_exchange_pairing(h).verdict, Verdict::violation);
}

TEST(PairingChecker, CrashExtendsTheInterval) {
  History h;
  h.invoke(0, {OpCode::exchange, 1});
  h.crash();
  h.invoke(1, {OpCode::exchange, 2});
  h.recover_begin(0, {OpCode::exchange, 1});
  h.respond(1, {OpCode::exchange, 2}, Payload::of(1));
  h.recover_response(0, {OpCode::exchange, 1}, Payload::of(2));
  EXPECT_EQ(check_exchange_pairing(h).verdict, Verdict::ok);
}

}  // namespace
}  // namespace nvtrack
