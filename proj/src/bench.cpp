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

#include "nvtrack/bench/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <latch>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "nvtrack/core/native_env.hpp"
#include "nvtrack/core/scheduler.hpp"
#include "nvtrack/core/sim_env.hpp"
#include "nvtrack/harness/runner.hpp"
#include "nvtrack/rbst/bst.hpp"
#include "nvtrack/rlist/list.hpp"
#include "nvtrack/rstack/stack.hpp"

namespace nvtrack::bench {

namespace {

// Keys every structure accepts: clear of the payload sentinels at the bottom
// and of the tree's two infinity keys at the top.
constexpr Key kDomainLo = kMinKey + 4;
constexpr Key kDomainHi = kMaxKey - 2;

template <class E>
std::optional<E> parse_enum(const std::string& s, std::initializer_list<E> all) {
  for (E e : all) {
    if (to_string(e) == s) return e;
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(Structure s) {
  switch (s) {
    case Structure::list: return "list";
    case Structure::list_flush: return "list-flush";
    case Structure::stack: return "stack";
    case Structure::bst: return "bst";
  }
  return "?";
}

std::string to_string(Variant v) { return v == Variant::base ? "base" : "recoverable"; }
std::string to_string(Timing t) { return t == Timing::wall ? "wall" : "simulated"; }
static std::string to_string(Format f) { return f == Format::csv ? "csv" : "gnuplot"; }

std::optional<Structure> parse_structure(const std::string& s) {
  return parse_enum(s, {Structure::list, Structure::list_flush, Structure::stack, Structure::bst});
}
std::optional<Variant> parse_variant(const std::string& s) {
  return parse_enum(s, {Variant::base, Variant::recoverable});
}
std::optional<Timing> parse_timing(const std::string& s) { return parse_enum(s, {Timing::wall, Timing::simulated}); }
std::optional<Format> parse_format(const std::string& s) { return parse_enum(s, {Format::csv, Format::gnuplot}); }

void validate(const BenchConfig& c) {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (c.threads == 0) fail("threads must be at least 1");
  if (c.threads > 1024) fail("threads must be at most 1024");
  if (c.runs == 0) fail("runs must be at least 1");
  if (c.total_ops == 0) fail("ops must be at least 1");
  if (c.key_lo > c.key_hi) fail("key-lo must not exceed key-hi");
  if (c.key_lo < kDomainLo || c.key_hi > kDomainHi) fail("key range outside the user key domain");
  if (c.read_pct > 100) fail("read-pct must be in [0,100]");
  if (c.structure == Structure::stack && c.read_pct != 0) fail("the stack has no find; read-pct must be 0");
  if (c.structure == Structure::list_flush && c.variant == Variant::base) {
    fail("list-flush exists only as a recoverable variant");
  }
}

OpStream::OpStream(const BenchConfig& c, std::uint64_t worker)
    : key_(c.key_lo, c.key_hi), read_pct_(c.read_pct) {
  std::seed_seq seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32),
                    static_cast<std::uint32_t>(worker)};
  rng_.seed(seq);
}

BenchOp OpStream::next() {
  auto roll = std::uniform_int_distribution<unsigned>(0, 199)(rng_);
  OpKind kind;
  if (roll < 2 * read_pct_) {
    kind = OpKind::find;
  } else {
    kind = (roll & 1U) != 0 ? OpKind::insert : OpKind::remove;
  }
  return {kind, key_(rng_)};
}

std::uint64_t share(const BenchConfig& c, unsigned t) {
  return c.total_ops / c.threads + (t < c.total_ops % c.threads ? 1 : 0);
}

namespace {

template <class S>
struct SetAdapter {
  template <class Env>
  SetAdapter(Env& env, const BenchConfig&) : s(env) {}
  std::int64_t apply(Pid p, const BenchOp& op) {
    switch (op.kind) {
      case OpKind::find: return s.find(p, op.key);
      case OpKind::insert: return s.insert(p, op.key);
      case OpKind::remove: return s.remove(p, op.key);
    }
    return 0;
  }
  S s;
};

template <class S>
struct StackAdapter {
  template <class Env>
  StackAdapter(Env& env, const BenchConfig& c) : s(env, StackOptions{.seed = c.seed}) {}
  std::int64_t apply(Pid p, const BenchOp& op) {
    if (op.kind == OpKind::remove) return s.pop(p).raw();
    return s.push(p, Payload::of(op.key));
  }
  S s;
};

using Responses = std::vector<std::vector<std::int64_t>>;

template <class Adapter>
void prefill(Adapter& a, const BenchConfig& c) {
  OpStream keys(c, c.threads);
  for (std::uint64_t i = 0; i < c.prefill; ++i) a.apply(0, {OpKind::insert, keys.next().key});
}

template <template <class> class Build>
double run_wall(const BenchConfig& c, Responses* rec) {
  using Adapter = Build<NativeEnv>;
  NativeEnv env(c.threads);
  auto a = std::make_unique<Adapter>(env, c);
  prefill(*a, c);
  if (rec) rec->assign(c.threads, {});

  std::latch start(c.threads + 1);
  std::vector<std::thread> workers;
  workers.reserve(c.threads);
  for (unsigned t = 0; t < c.threads; ++t) {
    workers.emplace_back([&, t] {
      OpStream ops(c, t);
      const std::uint64_t n = share(c, t);
      std::vector<std::int64_t>* out = rec ? &(*rec)[t] : nullptr;
      if (out) out->reserve(n);
      start.arrive_and_wait();
      for (std::uint64_t i = 0; i < n; ++i) {
        std::int64_t r = a->apply(t, ops.next());
        if (out) out->push_back(r);
      }
    });
  }
  start.arrive_and_wait();
  auto t0 = std::chrono::steady_clock::now();
  for (auto& w : workers) w.join();
  auto t1 = std::chrono::steady_clock::now();
  double secs = std::chrono::duration<double>(t1 - t0).count();
  return static_cast<double>(c.total_ops) / secs / 1e6;
}

template <template <class> class Build>
double run_simulated(const BenchConfig& c, Responses* rec) {
  using Adapter = Build<SimEnv>;
  SimEnv env(c.threads);
  auto a = std::make_unique<Adapter>(env, c);
  prefill(*a, c);
  if (rec) rec->assign(c.threads, {});
  std::vector<std::uint64_t> base(c.threads);
  for (unsigned t = 0; t < c.threads; ++t) base[t] = env.steps(t);

  auto body = [&](unsigned t, Scheduler* sched) {
    OpStream ops(c, t);
    const std::uint64_t n = share(c, t);
    for (std::uint64_t i = 0; i < n; ++i) {
      if (sched) sched->reset_budget(t);
      std::int64_t r = a->apply(t, ops.next());
      if (rec) (*rec)[t].push_back(r);
    }
  };
  if (c.threads == 1) {
    body(0, nullptr);
  } else {
    Scheduler sched(env);
    for (unsigned t = 0; t < c.threads; ++t) sched.spawn(t, [&, t] { body(t, &sched); });
    RandomChooser chooser(c.seed, 0.0, 0);
    CrashPolicy policy = CrashPolicy::drop_all_unflushed();
    if (sched.run(chooser, policy, {}, {}) != RunStatus::completed) {
      throw std::runtime_error("simulated benchmark exceeded the per-operation step budget");
    }
  }
  std::uint64_t span = 1;
  for (unsigned t = 0; t < c.threads; ++t) span = std::max(span, env.steps(t) - base[t]);
  return static_cast<double>(c.total_ops) * 1e3 / static_cast<double>(span);
}

template <template <class> class Build>
double run_once(const BenchConfig& c, Responses* rec) {
  return c.timing == Timing::wall ? run_wall<Build>(c, rec) : run_simulated<Build>(c, rec);
}

template <class Env>
using ListBase = SetAdapter<LinkedListSet<Env, ListFlavor::base>>;
template <class Env>
using ListRec = SetAdapter<LinkedListSet<Env, ListFlavor::recoverable>>;
template <class Env>
using ListFlush = SetAdapter<LinkedListSet<Env, ListFlavor::recoverable_flush>>;
template <class Env>
using StackBase = StackAdapter<EliminationStack<Env, false>>;
template <class Env>
using StackRec = StackAdapter<EliminationStack<Env, true>>;
template <class Env>
using BstBase = SetAdapter<RecoverableBst<Env, false>>;
template <class Env>
using BstRec = SetAdapter<RecoverableBst<Env, true>>;

double dispatch(const BenchConfig& c, Responses* rec) {
  const bool r = c.variant == Variant::recoverable;
  switch (c.structure) {
    case Structure::list: return r ? run_once<ListRec>(c, rec) : run_once<ListBase>(c, rec);
    case Structure::list_flush: return run_once<ListFlush>(c, rec);
    case Structure::stack: return r ? run_once<StackRec>(c, rec) : run_once<StackBase>(c, rec);
    case Structure::bst: return r ? run_once<BstRec>(c, rec) : run_once<BstBase>(c, rec);
  }
  throw std::logic_error("unknown structure");
}

}  // namespace

BenchResult run_benchmark(const BenchConfig& c) {
  validate(c);
  BenchResult res;
  res.config = c;
  for (unsigned i = 0; i < c.runs; ++i) {
    const bool last = i + 1 == c.runs;
    res.mops.push_back(dispatch(c, c.record && last ? &res.responses : nullptr));
  }
  double sum = 0;
  for (double m : res.mops) sum += m;
  res.mean = sum / static_cast<double>(res.mops.size());
  if (res.mops.size() > 1) {
    double sq = 0;
    for (double m : res.mops) sq += (m - res.mean) * (m - res.mean);
    res.stddev = std::sqrt(sq / static_cast<double>(res.mops.size() - 1));
  }
  return res;
}

void emit_results(std::ostream& out, const std::vector<BenchResult>& results, Format f) {
  const char sep = f == Format::csv ? ',' : ' ';
  if (f == Format::gnuplot) out << "# ";
  out << "structure" << sep << "variant" << sep << "threads" << sep << "read_pct" << sep << "mean_mops" << sep
      << "stddev\n";
  const BenchResult* prev = nullptr;
  for (const auto& r : results) {
    // gnuplot: one data block per (structure, variant), selectable with `index`.
    if (f == Format::gnuplot && prev != nullptr &&
        (prev->config.structure != r.config.structure || prev->config.variant != r.config.variant)) {
      out << "\n\n";
    }
    char mean[32];
    char sd[32];
    std::snprintf(mean, sizeof mean, "%.6f", r.mean);
    std::snprintf(sd, sizeof sd, "%.6f", r.stddev);
    out << to_string(r.config.structure) << sep << to_string(r.config.variant) << sep << r.config.threads << sep
        << r.config.read_pct << sep << mean << sep << sd << '\n';
    prev = &r;
  }
  out.flush();
  if (!out) throw std::runtime_error("failed to write " + to_string(f) + " results");
}

}  // namespace nvtrack::bench
