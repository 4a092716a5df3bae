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

#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "nvtrack/core/sim_env.hpp"
#include "nvtrack/core/types.hpp"

namespace nvtrack {

// What a suspended process is about to do.
enum class YieldKind : std::uint8_t {
  fresh,     // spawned, has not run yet
  step,      // about to access a shared cell
  spin,      // about to re-read inside a busy-wait loop
  boundary,  // between two operations
};

struct ChoicePoint {
  const std::vector<Pid>& runnable;  // ascending
  std::optional<Pid> current;        // last resumed process, if still runnable
  YieldKind current_yield;
  bool crash_allowed;
  std::size_t crashes;
};

struct Decision {
  bool crash = false;
  Pid pid = 0;

  static Decision run(Pid p) noexcept { return {false, p}; }
  static Decision crash_now() noexcept { return {true, 0}; }
  friend bool operator==(const Decision&, const Decision&) = default;
};

class Chooser {
 public:
  virtual ~Chooser() = default;
  virtual Decision choose(const ChoicePoint& point) = 0;
};

enum class RunStatus : std::uint8_t { completed, inconclusive };

// Multiplexes logical processes, each on its own fiber, over the calling
// thread. A crash destroys every fiber, discarding all process-local state.
class Scheduler {
 public:
  using Hook = std::function<void()>;
  using Gate = std::function<bool()>;

  explicit Scheduler(SimEnv& env, std::uint64_t op_step_budget = 10000);
  ~Scheduler();
  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  // One task per pid at a time.
  void spawn(Pid pid, std::function<void()> body);

  // Runs until every task finishes or a budget is exhausted. after_crash runs
  // once the heap has been reverted and is expected to respawn tasks.
  RunStatus run(Chooser& chooser, CrashPolicy& policy, const Hook& after_crash,
                const Gate& crash_allowed);

  // Called from inside a task.
  void yield_step();
  void yield_boundary();
  void note_spin() noexcept;
  void reset_budget(Pid pid);

  bool in_task() const noexcept { return running_ != nullptr; }
  std::size_t crashes() const noexcept { return crashes_; }
  std::uint64_t decisions() const noexcept { return decisions_; }

 private:
  struct Task;

  void resume(Task& t);
  void yield(YieldKind kind);
  void kill_all() noexcept;

  SimEnv& env_;
  std::uint64_t budget_;
  std::vector<std::unique_ptr<Task>> tasks_;
  std::vector<std::uint64_t> op_steps_;
  Task* running_ = nullptr;
  std::optional<Pid> last_;
  bool over_budget_ = false;
  std::size_t crashes_ = 0;
  std::uint64_t decisions_ = 0;
  std::exception_ptr error_;
};

}  // namespace nvtrack
