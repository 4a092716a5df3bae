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

#include "nvtrack/harness/explorer.hpp"

#include <random>
#include <sstream>

namespace nvtrack {

Decision DfsChooser::choose(const ChoicePoint& point) {
  if (pos_ < frames_.size()) {
    const Frame& f = frames_[pos_++];
    if (f.preempts[f.index]) ++preemptions_;
    return f.options[f.index];
  }

  Frame f;
  auto add = [&f](Decision d, bool preempt) {
    f.options.push_back(d);
    f.preempts.push_back(preempt);
  };
  if (point.current && point.current_yield == YieldKind::step) {
    add(Decision::run(*point.current), false);
    if (preemptions_ < limits_.preemption_bound) {
      for (Pid p : point.runnable) {
        if (p != *point.current) add(Decision::run(p), true);
      }
    }
  } else if (point.current && point.current_yield == YieldKind::spin) {
    // Re-running a spinner before anyone else moves only burns budget.
    for (Pid p : point.runnable) {
      if (p != *point.current) add(Decision::run(p), false);
    }
    if (f.options.empty()) add(Decision::run(*point.current), false);
  } else {
    for (Pid p : point.runnable) add(Decision::run(p), false);
  }
  if (point.crash_allowed && point.crashes < limits_.max_crashes) add(Decision::crash_now(), false);

  frames_.push_back(std::move(f));
  ++pos_;
  return frames_.back().options.front();
}

bool DfsChooser::advance() {
  frames_.resize(pos_);
  pos_ = 0;
  preemptions_ = 0;
  while (!frames_.empty()) {
    Frame& f = frames_.back();
    if (f.index + 1 < f.options.size()) {
      ++f.index;
      return true;
    }
    frames_.pop_back();
  }
  return false;
}

void ExploreStats::merge(const ExploreStats& o) {
  runs += o.runs;
  ok += o.ok;
  violations += o.violations;
  inconclusive += o.inconclusive;
  unchecked += o.unchecked;
  strict_violations += o.strict_violations;
  structure_errors += o.structure_errors;
  with_crash += o.with_crash;
  exhausted = exhausted && o.exhausted;
  for (const auto& w : o.witnesses) {
    if (witnesses.size() < 5) witnesses.push_back(w);
  }
}

std::string ExploreStats::summary() const {
  std::ostringstream s;
  s << "runs=" << runs << " ok=" << ok << " violations=" << violations << " inconclusive=" << inconclusive
    << " unchecked=" << unchecked << " strict=" << strict_violations << " structure=" << structure_errors
    << " crashed_runs=" << with_crash << (exhausted ? " (exhaustive)" : " (truncated)");
  return s.str();
}

namespace {

void tally(ExploreStats& st, const RunOutcome& out, const RunVerdict& v, const Workload& w) {
  ++st.runs;
  if (out.crashes > 0) ++st.with_crash;
  if (!out.strict_violations.empty()) ++st.strict_violations;
  if (!out.structure_errors.empty()) ++st.structure_errors;
  if (v.inconclusive) {
    ++st.inconclusive;
    return;
  }
  switch (v.verdict) {
    case Verdict::ok: ++st.ok; break;
    case Verdict::unchecked: ++st.unchecked; break;
    case Verdict::violation:
      ++st.violations;
      if (st.witnesses.size() < 5) st.witnesses.push_back("workload " + w.describe() + "\n" + v.witness);
      break;
  }
}

}  // namespace

ExploreStats explore_exhaustive(const SubjectSpec& spec, const Workload& w, const RunConfig& cfg,
                                const ExploreLimits& limits, const RunVisitor& visit) {
  ExploreStats st;
  DfsChooser chooser(limits);
  SpecKind kind = spec_of(spec.kind);
  while (true) {
    RunOutcome out = run_schedule(spec, w, chooser, cfg);
    RunVerdict v = evaluate(out, kind);
    tally(st, out, v, w);
    if (visit) visit(out, v);
    if (!chooser.advance()) {
      st.exhausted = true;
      break;
    }
    if (limits.max_runs != 0 && st.runs >= limits.max_runs) break;
  }
  return st;
}

ExploreStats explore_random(const SubjectSpec& spec, const Workload& w, const RunConfig& cfg,
                            std::uint64_t samples, std::uint64_t seed, double crash_probability,
                            std::size_t max_crashes, const RunVisitor& visit) {
  ExploreStats st;
  SpecKind kind = spec_of(spec.kind);
  std::mt19937_64 seeds(seed);
  for (std::uint64_t i = 0; i < samples; ++i) {
    RandomChooser chooser(seeds(), crash_probability, max_crashes);
    RunOutcome out = run_schedule(spec, w, chooser, cfg);
    RunVerdict v = evaluate(out, kind);
    tally(st, out, v, w);
    if (visit) visit(out, v);
  }
  return st;
}

namespace {

Op ins(std::int64_t k) { return {OpCode::insert, k}; }
Op del(std::int64_t k) { return {OpCode::remove, k}; }
Op fnd(std::int64_t k) { return {OpCode::find, k}; }
Op push(std::int64_t v) { return {OpCode::push, v}; }
Op pop() { return {OpCode::pop, 0}; }
Op ex(std::int64_t v) { return {OpCode::exchange, v}; }

}  // namespace

std::vector<Workload> standard_workloads(StructureKind kind, Pid pids, std::size_t ops_per_pid) {
  if (pids != 2 || ops_per_pid != 2) return random_workloads(kind, pids, ops_per_pid, 4, 1);
  switch (spec_of(kind)) {
    case SpecKind::set:
      return {
          {{}, {{ins(1), del(1)}, {ins(1), fnd(1)}}},
          {{ins(1)}, {{del(1), ins(2)}, {del(1), fnd(2)}}},
          {{}, {{ins(1), ins(2)}, {del(2), ins(1)}}},
          {{ins(1), ins(2)}, {{del(1), del(2)}, {del(2), del(1)}}},
      };
    case SpecKind::stack:
      return {
          {{}, {{push(1), pop()}, {push(2), pop()}}},
          {{push(9)}, {{pop(), push(1)}, {pop(), pop()}}},
          {{}, {{push(1), push(2)}, {pop(), pop()}}},
      };
    case SpecKind::exchanger:
      return {{{}, {{ex(1), ex(2)}, {ex(3), ex(4)}}}};
  }
  return {};
}

std::vector<Workload> random_workloads(StructureKind kind, Pid pids, std::size_t ops_per_pid, std::size_t count,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<OpCode> codes = op_codes(kind);
  std::uniform_int_distribution<std::size_t> pick(0, codes.size() - 1);
  std::uniform_int_distribution<std::int64_t> key(1, 3);
  std::vector<Workload> out;
  std::int64_t next_value = 1;
  for (std::size_t n = 0; n < count; ++n) {
    Workload w;
    w.programs.resize(pids);
    if (spec_of(kind) != SpecKind::exchanger) {
      std::uniform_int_distribution<int> pre(0, 2);
      for (int i = pre(rng); i > 0; --i) {
        if (spec_of(kind) == SpecKind::set) {
          w.setup.push_back(ins(key(rng)));
        } else {
          w.setup.push_back(push(next_value++));
        }
      }
    }
    for (Pid p = 0; p < pids; ++p) {
      for (std::size_t i = 0; i < ops_per_pid; ++i) {
        OpCode c = codes[pick(rng)];
        std::int64_t arg = 0;
        if (c == OpCode::push || c == OpCode::exchange) {
          arg = next_value++;
        } else if (c != OpCode::pop) {
          arg = key(rng);
        }
        w.programs[p].push_back({c, arg});
      }
    }
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace nvtrack
