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

#include "nvtrack/core/scheduler.hpp"

#include <boost/context/fiber.hpp>
#include <boost/context/stack_context.hpp>

#include <cstdlib>
#include <new>
#include <stdexcept>
#include <utility>

namespace nvtrack {

namespace ctx = boost::context;

namespace {

// Recycles fiber stacks; a run spawns a handful of fibers and exploration
// performs hundreds of thousands of runs.
class StackPool {
 public:
  static constexpr std::size_t kSize = 256 * 1024;

  ~StackPool() {
    for (void* p : free_) std::free(p);
  }

  ctx::stack_context allocate() {
    void* base;
    if (!free_.empty()) {
      base = free_.back();
      free_.pop_back();
    } else {
      base = std::aligned_alloc(64, kSize);
      if (base == nullptr) throw std::bad_alloc();
    }
    ctx::stack_context sc;
    sc.size = kSize;
    sc.sp = static_cast<char*>(base) + kSize;
    return sc;
  }

  void deallocate(ctx::stack_context& sc) noexcept {
    free_.push_back(static_cast<char*>(sc.sp) - sc.size);
  }

 private:
  std::vector<void*> free_;
};

StackPool& stack_pool() {
  static thread_local StackPool pool;
  return pool;
}

struct PooledStack {
  ctx::stack_context allocate() { return stack_pool().allocate(); }
  void deallocate(ctx::stack_context& sc) noexcept { stack_pool().deallocate(sc); }
};

}  // namespace

struct Scheduler::Task {
  Pid pid;
  std::function<void()> body;
  ctx::fiber fiber;
  ctx::fiber sink;
  YieldKind yield = YieldKind::fresh;
  bool spinning = false;
  bool finished = false;
};

Scheduler::Scheduler(SimEnv& env, std::uint64_t op_step_budget)
    : env_(env), budget_(op_step_budget), tasks_(env.processes()), op_steps_(env.processes(), 0) {}

Scheduler::~Scheduler() {
  kill_all();
  if (env_.scheduler() == this) env_.attach(nullptr);
}

void Scheduler::spawn(Pid pid, std::function<void()> body) {
  if (pid >= tasks_.size()) throw std::out_of_range("pid out of range");
  if (tasks_[pid] && !tasks_[pid]->finished) throw std::logic_error("pid already has a live task");
  auto task = std::make_unique<Task>();
  task->pid = pid;
  task->body = std::move(body);
  Task* t = task.get();
  task->fiber = ctx::fiber(std::allocator_arg, PooledStack{}, [this, t](ctx::fiber&& sink) {
    t->sink = std::move(sink);
    try {
      t->body();
    } catch (const ctx::detail::forced_unwind&) {
      throw;
    } catch (...) {
      error_ = std::current_exception();
    }
    t->finished = true;
    return std::move(t->sink);
  });
  tasks_[pid] = std::move(task);
  op_steps_[pid] = 0;
}

void Scheduler::resume(Task& t) {
  running_ = &t;
  env_.set_current(t.pid);
  t.fiber = std::move(t.fiber).resume();
  running_ = nullptr;
}

void Scheduler::yield(YieldKind kind) {
  Task* t = running_;
  t->yield = kind;
  t->sink = std::move(t->sink).resume();
}

void Scheduler::yield_step() {
  Task* t = running_;
  YieldKind kind = t->spinning ? YieldKind::spin : YieldKind::step;
  t->spinning = false;
  if (++op_steps_[t->pid] > budget_) over_budget_ = true;
  yield(kind);
}

void Scheduler::yield_boundary() { yield(YieldKind::boundary); }

void Scheduler::note_spin() noexcept {
  if (running_ != nullptr) running_->spinning = true;
}

void Scheduler::reset_budget(Pid pid) { op_steps_.at(pid) = 0; }

void Scheduler::kill_all() noexcept {
  for (auto& t : tasks_) {
    // Destroying a suspended fiber unwinds its stack.
    if (t) t->fiber = ctx::fiber{};
    t.reset();
  }
  last_.reset();
}

RunStatus Scheduler::run(Chooser& chooser, CrashPolicy& policy, const Hook& after_crash,
                         const Gate& crash_allowed) {
  env_.attach(this);
  std::vector<Pid> runnable;
  RunStatus status = RunStatus::completed;
  while (true) {
    if (error_) break;
    if (over_budget_) {
      status = RunStatus::inconclusive;
      break;
    }
    runnable.clear();
    for (Pid p = 0; p < tasks_.size(); ++p) {
      if (tasks_[p] && !tasks_[p]->finished) runnable.push_back(p);
    }
    if (runnable.empty()) break;

    std::optional<Pid> current;
    YieldKind cur_yield = YieldKind::fresh;
    if (last_ && tasks_[*last_] && !tasks_[*last_]->finished) {
      current = last_;
      cur_yield = tasks_[*last_]->yield;
    }
    bool may_crash = crash_allowed ? crash_allowed() : false;
    ChoicePoint point{runnable, current, cur_yield, may_crash, crashes_};
    Decision d = chooser.choose(point);
    ++decisions_;

    if (d.crash) {
      if (!may_crash) throw std::logic_error("chooser requested a crash that is not allowed");
      kill_all();
      env_.crash(policy);
      ++crashes_;
      if (after_crash) after_crash();
      continue;
    }
    if (d.pid >= tasks_.size() || !tasks_[d.pid] || tasks_[d.pid]->finished) {
      throw std::logic_error("chooser picked a process that cannot run");
    }
    Task& t = *tasks_[d.pid];
    last_ = d.pid;
    resume(t);
  }
  kill_all();
  env_.attach(nullptr);
  if (error_) {
    std::exception_ptr e = std::exchange(error_, nullptr);
    std::rethrow_exception(e);
  }
  return status;
}

}  // namespace nvtrack
