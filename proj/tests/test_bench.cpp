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

#include <sstream>

#include "nvtrack/bench/bench.hpp"

namespace nvtrack::bench {
namespace {

BenchConfig small(Structure s, Variant v) {
  BenchConfig c;
  c.structure = s;
  c.variant = v;
  c.total_ops = 2000;
  c.runs = 2;
  c.read_pct = s == Structure::stack ? 0 : 30;
  c.timing = Timing::simulated;
  return c;
}

TEST(BenchConfig, ValidationRejectsBadFields) {
  BenchConfig c;
  EXPECT_NO_THROW(validate(c));
  auto bad = [](auto mutate) {
    BenchConfig c;
    mutate(c);
    EXPECT_THROW(validate(c), std::invalid_argument);
  };
  bad([](BenchConfig& c) { c.threads = 0; });
  bad([](BenchConfig& c) { c.runs = 0; });
  bad([](BenchConfig& c) { c.total_ops = 0; });
  bad([](BenchConfig& c) { c.read_pct = 101; });
  bad([](BenchConfig& c) { c.key_lo = 10, c.key_hi = 5; });
  bad([](BenchConfig& c) { c.key_lo = kMinKey; });
  bad([](BenchConfig& c) { c.structure = Structure::stack; });
  bad([](BenchConfig& c) { c.structure = Structure::list_flush, c.variant = Variant::base; });
}

TEST(BenchConfig, ParsersRoundTrip) {
  for (Structure s : {Structure::list, Structure::list_flush, Structure::stack, Structure::bst}) {
    EXPECT_EQ(parse_structure(to_string(s)), s);
  }
  EXPECT_EQ(parse_variant("base"), Variant::base);
  EXPECT_EQ(parse_timing("simulated"), Timing::simulated);
  EXPECT_EQ(parse_format("gnuplot"), Format::gnuplot);
  EXPECT_FALSE(parse_structure("queue"));
}

TEST(OpStream, DeterministicPerWorkerAndMixMatches) {
  BenchConfig c;
  c.read_pct = 70;
  OpStream a(c, 3);
  OpStream b(c, 3);
  OpStream other(c, 4);
  int finds = 0;
  int inserts = 0;
  bool differs = false;
  constexpr int kN = 200000;
  for (int i = 0; i < kN; ++i) {
    BenchOp x = a.next();
    BenchOp y = b.next();
    BenchOp z = other.next();
    ASSERT_EQ(x.kind, y.kind);
    ASSERT_EQ(x.key, y.key);
    differs |= x.key != z.key;
    ASSERT_GE(x.key, c.key_lo);
    ASSERT_LE(x.key, c.key_hi);
    finds += x.kind == OpKind::find;
    inserts += x.kind == OpKind::insert;
  }
  EXPECT_TRUE(differs);
  EXPECT_NEAR(finds / double(kN), 0.70, 0.01);
  EXPECT_NEAR(inserts / double(kN), 0.15, 0.01);
}

TEST(Share, SplitsTotalExactly) {
  BenchConfig c;
  c.total_ops = 1000003;
  c.threads = 8;
  std::uint64_t sum = 0;
  for (unsigned t = 0; t < c.threads; ++t) sum += share(c, t);
  EXPECT_EQ(sum, c.total_ops);
  EXPECT_EQ(share(c, 0), share(c, 7) + 1);
}

TEST(Emit, CsvAndGnuplotLayout) {
  BenchResult a;
  a.config = small(Structure::list, Variant::base);
  a.mean = 1.5;
  a.stddev = 0.25;
  BenchResult b = a;
  b.config.variant = Variant::recoverable;
  BenchResult c = a;
  c.config.structure = Structure::bst;

  std::ostringstream csv;
  emit_results(csv, {a, b}, Format::csv);
  EXPECT_EQ(csv.str(),
            "structure,variant,threads,read_pct,mean_mops,stddev\n"
            "list,base,1,30,1.500000,0.250000\n"
            "list,recoverable,1,30,1.500000,0.250000\n");

  std::ostringstream gp;
  emit_results(gp, {a, a, c}, Format::gnuplot);
  const std::string s = gp.str();
  EXPECT_EQ(s.rfind("# ", 0), 0U);
  EXPECT_NE(s.find("\n\n\n"), std::string::npos);

  std::ostringstream empty;
  emit_results(empty, {}, Format::csv);
  EXPECT_EQ(empty.str(), "structure,variant,threads,read_pct,mean_mops,stddev\n");

  std::ostringstream broken;
  broken.setstate(std::ios::badbit);
  EXPECT_THROW(emit_results(broken, {a}, Format::csv), std::runtime_error);
}

TEST(Simulated, BitStableAcrossInvocations) {
  for (Structure s : {Structure::list, Structure::list_flush, Structure::stack, Structure::bst}) {
    BenchConfig c = small(s, Variant::recoverable);
    c.runs = 1;
    std::ostringstream x;
    std::ostringstream y;
    emit_results(x, {run_benchmark(c)}, Format::csv);
    emit_results(y, {run_benchmark(c)}, Format::csv);
    EXPECT_EQ(x.str(), y.str()) << to_string(s);
  }
}

TEST(Simulated, MultiThreadedIsDeterministicAndPositive) {
  BenchConfig c = small(Structure::bst, Variant::recoverable);
  c.threads = 3;
  BenchResult r1 = run_benchmark(c);
  BenchResult r2 = run_benchmark(c);
  EXPECT_EQ(r1.mops, r2.mops);
  EXPECT_GT(r1.mean, 0);
  EXPECT_EQ(r1.stddev, 0);
}

TEST(Simulated, RecoverableCostsMoreSteps) {
  BenchConfig base = small(Structure::list, Variant::base);
  BenchConfig rec = small(Structure::list, Variant::recoverable);
  BenchConfig flush = small(Structure::list_flush, Variant::recoverable);
  double b = run_benchmark(base).mean;
  double r = run_benchmark(rec).mean;
  double f = run_benchmark(flush).mean;
  EXPECT_GT(b, r);
  EXPECT_GT(r, f);
}

// Same seed, one thread: base and recoverable answer every op identically.
TEST(Parity, BaseAndRecoverableRespondIdentically) {
  for (Structure s : {Structure::list, Structure::bst, Structure::stack}) {
    BenchConfig b = small(s, Variant::base);
    BenchConfig r = small(s, Variant::recoverable);
    b.record = r.record = true;
    b.runs = r.runs = 1;
    BenchResult rb = run_benchmark(b);
    BenchResult rr = run_benchmark(r);
    ASSERT_EQ(rb.responses.size(), 1U);
    EXPECT_EQ(rb.responses[0].size(), b.total_ops);
    EXPECT_EQ(rb.responses, rr.responses) << to_string(s);
  }
  BenchConfig f = small(Structure::list_flush, Variant::recoverable);
  BenchConfig l = small(Structure::list, Variant::recoverable);
  f.record = l.record = true;
  f.runs = l.runs = 1;
  EXPECT_EQ(run_benchmark(f).responses, run_benchmark(l).responses);
}

TEST(Wall, NativeRunProducesRates) {
  BenchConfig c = small(Structure::list, Variant::recoverable);
  c.timing = Timing::wall;
  c.threads = 2;
  BenchResult r = run_benchmark(c);
  ASSERT_EQ(r.mops.size(), 2U);
  for (double m : r.mops) EXPECT_GT(m, 0);
}

}  // namespace
}  // namespace nvtrack::bench
