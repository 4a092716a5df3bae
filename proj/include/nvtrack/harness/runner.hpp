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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nvtrack/core/scheduler.hpp"
#include "nvtrack/harness/checker.hpp"
#include "nvtrack/harness/history.hpp"
#include "nvtrack/harness/subject.hpp"

namespace nvtrack {

struct Workload {
  std::vector<Op> setup;                  // applied by pid 0 before the run, no steps recorded
  std::vector<std::vector<Op>> programs;  // one per pid

  Pid processes() const noexcept { return static_cast<Pid>(programs.size()); }
  std::string describe() const;
};

struct RunConfig {
  CrashPolicy policy = CrashPolicy::drop_all_unflushed();
  // Also crash between operations, when nothing is in flight.
  bool crash_when_idle = false;
  std::uint64_t op_step_budget = 10000;
  // Called once the subject exists, before setup (e.g. to install an observer).
  std::function<void(SimEnv&, Subject&)> instrument;
};

struct RunOutcome {
  History history;
  RunStatus status = RunStatus::completed;
  std::size_t crashes = 0;
  std::size_t crashes_during_recovery = 0;
  AbstractState initial_state;
  AbstractState final_state;
  std::vector<std::string> strict_violations;
  std::vector<std::string> structure_errors;
};

// Calls the recovery function of p's in-flight operation with its original
// arguments. Throws std::logic_error if p has none.
Payload recover_dispatch(Subject& s, Pid p, const std::optional<Op>& in_flight);

// Executes the workload under the interleaving and crashes the chooser picks.
RunOutcome run_schedule(const SubjectSpec& spec, const Workload& w, Chooser& chooser, const RunConfig& cfg);

// A run's overall verdict: the NRL (or pairing) check with the observed final
// state, plus strict recoverability and structural soundness.
struct RunVerdict {
  Verdict verdict = Verdict::ok;
  bool inconclusive = false;
  std::string witness;
};

RunVerdict evaluate(const RunOutcome& out, SpecKind kind);

// Runs every process to completion in pid order, never crashing.
class SequentialChooser final : public Chooser {
 public:
  Decision choose(const ChoicePoint& point) override;
};

class RandomChooser final : public Chooser {
 public:
  RandomChooser(std::uint64_t seed, double crash_probability, std::size_t max_crashes)
      : rng_(seed), crash_p_(crash_probability), max_crashes_(max_crashes) {}
  Decision choose(const ChoicePoint& point) override;

 private:
  std::mt19937_64 rng_;
  double crash_p_;
  std::size_t max_crashes_;
};

// An explicit interleaving: run each segment's pid for that many scheduling
// decisions; crash before the listed segments; after the k-th crash, run the
// pids of recovery_orders[k] in that order until each reaches a boundary.
struct Schedule {
  struct Segment {
    Pid pid;
    std::size_t steps;
  };
  std::vector<Segment> segments;
  std::vector<std::size_t> crash_before;
  std::vector<std::vector<Pid>> recovery_orders;
  std::size_t max_crashes = 2;

  // Throws std::invalid_argument on unordered crash points or bad orders.
  void validate(Pid processes) const;
};

class ScheduleChooser final : public Chooser {
 public:
  explicit ScheduleChooser(Schedule s);
  Decision choose(const ChoicePoint& point) override;

 private:
  Schedule s_;
  std::size_t seg_ = 0;
  std::size_t used_ = 0;
  std::size_t next_crash_ = 0;
  std::vector<Pid> recovery_queue_;
  bool recovery_started_ = false;
};

}  // namespace nvtrack
