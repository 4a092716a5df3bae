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

#include <random>
#include <set>
#include <thread>

#include "nvtrack/harness/explorer.hpp"
#include "nvtrack/rbst/bst.hpp"
#include "support.hpp"

namespace nvtrack {
namespace {

using testing::run_for;

template <bool R>
void set_oracle() {
  SimEnv env(1);
  RecoverableBst<SimEnv, R> tree(env);
  std::set<Key> oracle;
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<Key> key(-30, 60);
  for (int i = 0; i < 20000; ++i) {
    Key k = key(rng);
    switch (rng() % 3) {
      case 0: ASSERT_EQ(tree.insert(0, k), oracle.insert(k).second) << i; break;
      case 1: ASSERT_EQ(tree.remove(0, k), oracle.erase(k) == 1) << i; break;
      default: ASSERT_EQ(tree.find(0, k), oracle.count(k) == 1) << i; break;
    }
    if (i % 997 == 0) {
      ASSERT_EQ(tree.check_structure(), "") << i;
    }
  }
  EXPECT_EQ(tree.snapshot(), std::vector<Key>(oracle.begin(), oracle.end()));
}

TEST(BstOracle, RecoverableMatchesStdSet) { set_oracle<true>(); }
TEST(BstOracle, BaseMatchesStdSet) { set_oracle<false>(); }

TEST(BstOracle, EmptyTreeHasSentinelShape) {
  SimEnv env(1);
  RecoverableBst<SimEnv, true> tree(env);
  EXPECT_EQ(tree.check_structure(), "");
  EXPECT_TRUE(tree.snapshot().empty());
  EXPECT_FALSE(tree.find(0, 3));
  EXPECT_FALSE(tree.remove(0, 3));
  EXPECT_THROW(tree.insert(0, kInf1), std::invalid_argument);
}

void sweep(std::vector<Key> setup, OpCode code, Key key, bool expected, std::vector<Key> final_keys) {
  using Tree = RecoverableBst<SimEnv, true>;
  auto make = [&](SimEnv& env) {
    auto t = std::make_unique<Tree>(env);
    for (Key k : setup) t->insert(0, k);
    return t;
  };
  auto op = [&](Tree& t) { return code == OpCode::insert ? t.insert(0, key) : t.remove(0, key); };
  auto rec = [&](Tree& t) { return code == OpCode::insert ? t.insert_recover(0, key) : t.remove_recover(0, key); };
  for (std::uint64_t k = 0;; ++k) {
    SimEnv env(1);
    auto t = make(env);
    env.begin_op(0);
    bool r = false;
    if (run_for(env, k, [&] { r = op(*t); })) {
      EXPECT_EQ(r, expected);
      break;
    }
    env.crash();
    for (std::uint64_t j = 0;; ++j) {
      SimEnv env2(1);
      auto t2 = make(env2);
      env2.begin_op(0);
      ASSERT_FALSE(run_for(env2, k, [&] { op(*t2); }));
      env2.crash();
      bool r2 = false;
      bool done = run_for(env2, j, [&] { r2 = rec(*t2); });
      if (!done) {
        env2.crash();
        r2 = rec(*t2);
      }
      EXPECT_EQ(r2, expected) << "crashes at " << k << "/" << j;
      EXPECT_EQ(t2->snapshot(), final_keys) << "crashes at " << k << "/" << j;
      EXPECT_EQ(t2->check_structure(), "");
      if (done) break;
    }
  }
}

TEST(BstRecovery, InsertEveryCrashPoint) {
  sweep({}, OpCode::insert, 5, true, {5});
  sweep({2, 8}, OpCode::insert, 5, true, {2, 5, 8});
  sweep({5}, OpCode::insert, 5, false, {5});
}

TEST(BstRecovery, DeleteEveryCrashPoint) {
  sweep({5}, OpCode::remove, 5, true, {});
  sweep({2, 5, 8}, OpCode::remove, 5, true, {2, 8});
  sweep({2}, OpCode::remove, 5, false, {2});
}

TEST(BstConcurrency, ExhaustiveSmallWorkloads) {
  SubjectSpec spec{StructureKind::bst, {}};
  ExploreLimits lim;
  lim.preemption_bound = 1;
  for (const auto& w : standard_workloads(StructureKind::bst, 2, 2)) {
    auto st = explore_exhaustive(spec, w, RunConfig{}, lim);
    EXPECT_TRUE(st.exhausted);
    EXPECT_EQ(st.violations, 0U) << w.describe() << "\n" << (st.witnesses.empty() ? "" : st.witnesses[0]);
  }
}

TEST(BstNative, ConcurrentMixedOpsStaySound) {
  constexpr unsigned kThreads = 4;
  NativeEnv env(kThreads);
  RecoverableBst<NativeEnv, true> tree(env);
  std::vector<long> net(kThreads, 0);
  std::vector<std::thread> ts;
  for (unsigned t = 0; t < kThreads; ++t) {
    ts.emplace_back([&, t] {
      std::mt19937_64 rng(100 + t);
      for (int i = 0; i < 20000; ++i) {
        Key k = static_cast<Key>(rng() % 32);
        if (rng() & 1) {
          net[t] += tree.insert(t, k) ? 1 : 0;
        } else {
          net[t] -= tree.remove(t, k) ? 1 : 0;
        }
      }
    });
  }
  for (auto& t : ts) t.join();
  long total = 0;
  for (long n : net) total += n;
  EXPECT_EQ(static_cast<long>(tree.snapshot().size()), total);
  EXPECT_EQ(tree.check_structure(), "");
}

}  // namespace
}  // namespace nvtrack
