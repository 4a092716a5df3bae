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

#include "nvtrack/harness/runner.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace nvtrack {

std::string Workload::describe() const {
  std::string s;
  if (!setup.empty()) {
    s += "setup:";
    for (const auto& op : setup) s += " " + to_string(op);
    s += "; ";
  }
  for (std::size_t p = 0; p < programs.size(); ++p) {
    s += "p" + std::to_string(p) + ":";
    for (const auto& op : programs[p]) s += " " + to_string(op);
    if (p + 1 < programs.size()) s += "; ";
  }
  return s;
}

namespace {

class Run {
 public:
  Run(const SubjectSpec& spec, const Workload& w, const RunConfig& cfg)
      : w_(w),
        cfg_(cfg),
        env_(std::max<Pid>(1, w.processes())),
        subject_(make_subject(spec, env_)),
        sched_(env_, cfg.op_step_budget),
        next_(env_.processes(), 0),
        pending_(env_.processes()),
        recovering_(env_.processes(), false) {}

  RunOutcome execute(Chooser& chooser) {
    if (cfg_.instrument) cfg_.instrument(env_, *subject_);
    for (const Op& op : w_.setup) subject_->apply(0, op);
    out_.initial_state = subject_->state();

    for (Pid p = 0; p < w_.processes(); ++p) spawn(p);
    CrashPolicy policy = cfg_.policy;
    out_.status = sched_.run(
        chooser, policy, [this] { after_crash(); }, [this] { return crash_allowed(); });
    out_.crashes = sched_.crashes();
    out_.final_state = subject_->state();
    if (out_.status == RunStatus::completed) {
      std::string err = subject_->check_structure();
      if (!err.empty()) out_.structure_errors.push_back("at quiescence: " + err);
    }
    return std::move(out_);
  }

 private:
  bool crash_allowed() const {
    if (cfg_.crash_when_idle) return true;
    return std::any_of(pending_.begin(), pending_.end(), [](const auto& o) { return o.has_value(); });
  }

  void after_crash() {
    out_.history.crash();
    if (std::find(recovering_.begin(), recovering_.end(), true) != recovering_.end()) {
      ++out_.crashes_during_recovery;
    }
    std::string err = subject_->check_after_crash();
    if (!err.empty()) {
      // Recovery code may not survive a broken image; end the run here.
      out_.structure_errors.push_back("after crash " + std::to_string(sched_.crashes()) + ": " + err);
      return;
    }
    for (Pid p = 0; p < w_.processes(); ++p) spawn(p);
  }

  void spawn(Pid p) {
    if (!pending_[p] && next_[p] >= w_.programs[p].size()) return;
    sched_.spawn(p, [this, p] { drive(p); });
  }

  void drive(Pid p) {
    bool boundary_due = false;
    if (pending_[p]) {
      Op op = *pending_[p];
      recovering_[p] = true;
      out_.history.recover_begin(p, op);
      sched_.reset_budget(p);
      Payload r = recover_dispatch(*subject_, p, pending_[p]);
      complete(p, op, r, true);
      boundary_due = true;
    }
    const auto& prog = w_.programs[p];
    while (next_[p] < prog.size()) {
      if (boundary_due) sched_.yield_boundary();
      boundary_due = true;
      const Op op = prog[next_[p]];
      // The invocation contract: CP is reset just before the operation
      // starts. No step separates the reset from the invocation event.
      env_.begin_op(p);
      out_.history.invoke(p, op);
      pending_[p] = op;
      ++next_[p];
      sched_.reset_budget(p);
      Payload r = subject_->apply(p, op);
      complete(p, op, r, false);
    }
  }

  void complete(Pid p, const Op& op, Payload r, bool recovered) {
    if (recovered) {
      out_.history.recover_response(p, op, r);
    } else {
      out_.history.respond(p, op, r);
    }
    std::optional<Payload> persisted = subject_->persisted_response(p, op, r);
    if (persisted && *persisted != r) {
      out_.strict_violations.push_back("p" + std::to_string(p) + " " + to_string(op) + " returned " +
                                       r.to_string() + " but persisted " + persisted->to_string());
    }
    pending_[p].reset();
    recovering_[p] = false;
  }

  const Workload& w_;
  const RunConfig& cfg_;
  SimEnv env_;
  std::unique_ptr<Subject> subject_;
  Scheduler sched_;
  std::vector<std::size_t> next_;
  std::vector<std::optional<Op>> pending_;
  std::vector<bool> recovering_;
  RunOutcome out_;
};

}  // namespace

Payload recover_dispatch(Subject& s, Pid p, const std::optional<Op>& in_flight) {
  if (!in_flight) throw std::logic_error("p" + std::to_string(p) + " has no in-flight operation to recover");
  return s.recover(p, *in_flight);
}

RunOutcome run_schedule(const SubjectSpec& spec, const Workload& w, Chooser& chooser, const RunConfig& cfg) {
  if (w.programs.empty()) throw std::invalid_argument("workload has no processes");
  Run run(spec, w, cfg);
  return run.execute(chooser);
}

RunVerdict evaluate(const RunOutcome& out, SpecKind kind) {
  RunVerdict v;
  if (out.status == RunStatus::inconclusive) {
    v.inconclusive = true;
    return v;
  }
  std::string extra;
  for (const auto& s : out.strict_violations) extra += "strict recoverability: " + s + "\n";
  for (const auto& s : out.structure_errors) extra += "structure: " + s + "\n";
  CheckResult c = kind == SpecKind::exchanger
                      ? check_exchange_pairing(out.history)
                      : check_nrl(out.history, kind, out.initial_state, out.final_state);
  v.verdict = c.verdict;
  v.witness = c.witness;
  if (!extra.empty()) {
    v.verdict = Verdict::violation;
    v.witness = extra + (c.witness.empty() ? "history:\n" + out.history.dump() : c.witness);
  }
  return v;
}

Decision SequentialChooser::choose(const ChoicePoint& point) {
  if (point.current && point.current_yield != YieldKind::spin) return Decision::run(*point.current);
  for (Pid p : point.runnable) {
    if (!point.current || p != *point.current) return Decision::run(p);
  }
  return Decision::run(point.runnable.front());
}

Decision RandomChooser::choose(const ChoicePoint& point) {
  if (point.crash_allowed && point.crashes < max_crashes_ && crash_p_ > 0.0) {
    if (std::bernoulli_distribution(crash_p_)(rng_)) return Decision::crash_now();
  }
  std::vector<Pid> options;
  for (Pid p : point.runnable) {
    if (point.current_yield == YieldKind::spin && point.current && p == *point.current) continue;
    options.push_back(p);
  }
  if (options.empty()) options = point.runnable;
  return Decision::run(options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng_)]);
}

void Schedule::validate(Pid processes) const {
  for (std::size_t i = 1; i < crash_before.size(); ++i) {
    if (crash_before[i] <= crash_before[i - 1]) throw std::invalid_argument("crash points must strictly increase");
  }
  for (const auto& seg : segments) {
    if (seg.pid >= processes) throw std::invalid_argument("segment names an unknown pid");
  }
  for (const auto& order : recovery_orders) {
    std::vector<Pid> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("recovery order repeats a pid");
    }
    for (Pid p : order) {
      if (p >= processes) throw std::invalid_argument("recovery order names an unknown pid");
    }
  }
}

ScheduleChooser::ScheduleChooser(Schedule s) : s_(std::move(s)) {}

Decision ScheduleChooser::choose(const ChoicePoint& point) {
  auto runnable = [&](Pid p) {
    return std::find(point.runnable.begin(), point.runnable.end(), p) != point.runnable.end();
  };

  if (next_crash_ < s_.crash_before.size() && s_.crash_before[next_crash_] <= seg_ && used_ == 0) {
    ++next_crash_;
    if (point.crash_allowed && point.crashes < s_.max_crashes) {
      std::size_t k = point.crashes;
      recovery_queue_.clear();
      if (k < s_.recovery_orders.size()) recovery_queue_ = s_.recovery_orders[k];
      std::reverse(recovery_queue_.begin(), recovery_queue_.end());
      recovery_started_ = false;
      return Decision::crash_now();
    }
  }

  while (!recovery_queue_.empty()) {
    Pid p = recovery_queue_.back();
    bool done = !runnable(p) ||
                (recovery_started_ && point.current == p && point.current_yield == YieldKind::boundary);
    if (!done) {
      recovery_started_ = true;
      return Decision::run(p);
    }
    recovery_queue_.pop_back();
    recovery_started_ = false;
  }

  while (seg_ < s_.segments.size()) {
    const auto& seg = s_.segments[seg_];
    if (used_ < seg.steps && runnable(seg.pid)) {
      ++used_;
      if (used_ == seg.steps) {
        ++seg_;
        used_ = 0;
      }
      return Decision::run(seg.pid);
    }
    ++seg_;
    used_ = 0;
    if (next_crash_ < s_.crash_before.size() && s_.crash_before[next_crash_] <= seg_) {
      return choose(point);
    }
  }

  SequentialChooser fallback;
  return fallback.choose(point);
}

}  // namespace nvtrack
