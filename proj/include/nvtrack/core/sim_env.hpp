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
#include <cstring>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "nvtrack/core/arena.hpp"
#include "nvtrack/core/process.hpp"
#include "nvtrack/core/types.hpp"

namespace nvtrack {

class SimEnv;
class SimLine;
class Scheduler;

enum class AccessKind : std::uint8_t { read, write, cas, flush };

class SimCellBase;

struct AccessEvent {
  AccessKind kind;
  CellRole role;
  Pid pid;
  const SimCellBase* cell;
  const SimLine* owner;
  std::uint64_t before;
  std::uint64_t after;
  bool success;
};

// Thrown in direct (unscheduled) mode when the step limit is exceeded.
struct StepBudgetExceeded : std::runtime_error {
  StepBudgetExceeded() : std::runtime_error("step budget exceeded") {}
};

class SimCellBase {
 public:
  SimCellBase(const SimCellBase&) = delete;
  SimCellBase& operator=(const SimCellBase&) = delete;

  SimLine& owner() const noexcept { return *owner_; }
  CellRole role() const noexcept { return role_; }
  bool dirty() const noexcept { return dirty_; }

  virtual std::uint64_t volatile_bits() const noexcept = 0;
  virtual std::uint64_t persisted_bits() const noexcept = 0;

 protected:
  SimCellBase(SimLine& owner, CellRole role) noexcept;
  virtual ~SimCellBase();

  SimEnv& env() const noexcept;
  CacheMode mode() const noexcept;

  virtual void revert() noexcept = 0;
  virtual void persist() noexcept = 0;

  template <class T>
  static std::uint64_t bits_of(const T& v) noexcept {
    std::uint64_t out = 0;
    std::memcpy(&out, &v, sizeof(T));
    return out;
  }

 private:
  friend class SimEnv;
  friend class SimLine;

  SimLine* owner_;
  CellRole role_;
  bool dirty_ = false;
  SimCellBase* next_in_line_ = nullptr;
  SimCellBase* dirty_prev_ = nullptr;
  SimCellBase* dirty_next_ = nullptr;
};

// A group of cells persisted together by one flush: a node or record.
class SimLine {
 public:
  using env_type = SimEnv;

  SimLine(SimEnv& env, CacheMode mode) noexcept : env_(&env), mode_(mode) {}
  SimLine(const SimLine&) = delete;
  SimLine& operator=(const SimLine&) = delete;

  SimEnv& env() const noexcept { return *env_; }
  CacheMode mode() const noexcept { return mode_; }

  void persist_all() noexcept;

 private:
  friend class SimCellBase;

  SimEnv* env_;
  CacheMode mode_;
  SimCellBase* cells_ = nullptr;
};

class CrashPolicy {
 public:
  enum class Mode : std::uint8_t { drop_all_unflushed, drop_random, adversarial };
  // Returns true to keep the unflushed value of the cell.
  using Callback = std::function<bool(const SimCellBase&)>;

  static CrashPolicy drop_all_unflushed() { return CrashPolicy(Mode::drop_all_unflushed); }
  static CrashPolicy drop_random(double drop_probability, std::uint64_t seed);
  static CrashPolicy adversarial(Callback keep);

  Mode mode() const noexcept { return mode_; }
  bool keep(const SimCellBase& cell);

 private:
  explicit CrashPolicy(Mode m) : mode_(m) {}

  Mode mode_;
  double drop_p_ = 1.0;
  std::mt19937_64 rng_;
  Callback keep_;
};

template <class T>
class SimCell final : public SimCellBase {
  static_assert(std::is_trivially_copyable_v<T> && sizeof(T) <= 8);

 public:
  SimCell(SimLine& owner, CellRole role, T init) noexcept
      : SimCellBase(owner, role), vol_(init), persisted_(init) {}

  T load() const;
  void store(T v);
  T cas_witness(T expected, T desired);
  bool cas(T expected, T desired) { return cas_witness(expected, desired) == expected; }
  void flush() const;

  // Inspection without taking a step.
  T peek() const noexcept { return vol_; }
  T peek_persisted() const noexcept { return persisted_; }

  std::uint64_t volatile_bits() const noexcept override { return bits_of(vol_); }
  std::uint64_t persisted_bits() const noexcept override { return bits_of(persisted_); }

 private:
  void revert() noexcept override { vol_ = persisted_; }
  void persist() noexcept override { persisted_ = vol_; }
  void after_write();

  T vol_;
  T persisted_;
};

// Cooperative single-threaded backend. Every cell access is a step and, when a
// Scheduler is attached, a yield point.
class SimEnv {
 public:
  using Line = SimLine;
  template <class T>
  using Cell = SimCell<T>;
  using InfoRecord = InfoRecordT<SimLine>;
  using Process = ProcessCtxT<SimLine, SimCell>;
  using Observer = std::function<void(const AccessEvent&)>;
  static constexpr bool kSimulated = true;

  explicit SimEnv(Pid processes);
  ~SimEnv();
  SimEnv(const SimEnv&) = delete;
  SimEnv& operator=(const SimEnv&) = delete;

  Pid processes() const noexcept { return processes_; }
  Process& ctx(Pid p) { return slots_.at(p)->ctx; }

  template <class T, class... Args>
  T* make(Pid p, Args&&... args) {
    return slots_.at(p)->arena.template make<T>(std::forward<Args>(args)...);
  }

  void begin_op(Pid p) { ctx(p).cp.store(0); }
  void spin_hint(Pid p);
  // Logical clock: own steps when scheduled, global steps otherwise.
  std::uint64_t now(Pid p) const noexcept;

  // Resolves every unflushed write per policy. Process fibers are the
  // scheduler's business; in direct mode the caller simply stops calling.
  void crash(CrashPolicy& policy);
  void crash();

  std::uint64_t total_steps() const noexcept { return total_steps_; }
  std::uint64_t steps(Pid p) const { return steps_.at(p); }
  std::size_t dirty_cells() const noexcept { return dirty_count_; }
  std::size_t crashes() const noexcept { return crashes_; }

  void set_observer(Observer obs) { observer_ = std::move(obs); }
  // Direct mode only: throw StepBudgetExceeded after this many steps (0 = off).
  void set_step_limit(std::uint64_t limit) noexcept { step_limit_ = limit; }

  Pid current_pid() const noexcept { return current_; }
  void set_current(Pid p) noexcept { current_ = p; }
  void attach(Scheduler* s) noexcept { sched_ = s; }
  Scheduler* scheduler() const noexcept { return sched_; }

  // Cell hooks.
  void before_access();
  bool observing() const noexcept { return static_cast<bool>(observer_); }
  void notify(const AccessEvent& e) const { observer_(e); }
  void mark_dirty(SimCellBase& c) noexcept;
  void unmark_dirty(SimCellBase& c) noexcept;

 private:
  struct PerProcess {
    PerProcess(SimEnv& env, Pid p) : ctx(env, p) {}
    Process ctx;
    Arena arena;
  };

  Pid processes_;
  Scheduler* sched_ = nullptr;
  Pid current_ = 0;
  std::uint64_t total_steps_ = 0;
  std::uint64_t step_limit_ = 0;
  std::vector<std::uint64_t> steps_;
  std::size_t crashes_ = 0;
  Observer observer_;
  SimCellBase* dirty_head_ = nullptr;
  SimCellBase* dirty_tail_ = nullptr;
  std::size_t dirty_count_ = 0;
  std::vector<std::unique_ptr<PerProcess>> slots_;
};

inline SimEnv& SimCellBase::env() const noexcept { return owner_->env(); }
inline CacheMode SimCellBase::mode() const noexcept { return owner_->mode(); }

template <class T>
T SimCell<T>::load() const {
  SimEnv& e = env();
  e.before_access();
  T v = vol_;
  if (e.observing()) {
    e.notify({AccessKind::read, role(), e.current_pid(), this, &owner(), bits_of(v), bits_of(v), true});
  }
  return v;
}

template <class T>
void SimCell<T>::after_write() {
  if (mode() == CacheMode::durable) {
    persisted_ = vol_;
  } else {
    env().mark_dirty(*this);
  }
}

template <class T>
void SimCell<T>::store(T v) {
  SimEnv& e = env();
  e.before_access();
  T old = vol_;
  vol_ = v;
  after_write();
  if (e.observing()) {
    e.notify({AccessKind::write, role(), e.current_pid(), this, &owner(), bits_of(old), bits_of(v), true});
  }
}

template <class T>
T SimCell<T>::cas_witness(T expected, T desired) {
  SimEnv& e = env();
  e.before_access();
  T old = vol_;
  bool ok = old == expected;
  if (ok) {
    vol_ = desired;
    after_write();
  }
  if (e.observing()) {
    e.notify({AccessKind::cas, role(), e.current_pid(), this, &owner(), bits_of(old), bits_of(vol_), ok});
  }
  return old;
}

template <class T>
void SimCell<T>::flush() const {
  SimEnv& e = env();
  e.before_access();
  owner().persist_all();
  if (e.observing()) {
    std::uint64_t b = bits_of(vol_);
    e.notify({AccessKind::flush, role(), e.current_pid(), this, &owner(), b, b, true});
  }
}

}  // namespace nvtrack
