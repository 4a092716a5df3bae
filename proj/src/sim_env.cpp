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

#include "nvtrack/core/sim_env.hpp"

#include "nvtrack/core/scheduler.hpp"

namespace nvtrack {

SimCellBase::SimCellBase(SimLine& owner, CellRole role) noexcept : owner_(&owner), role_(role) {
  next_in_line_ = owner.cells_;
  owner.cells_ = this;
}

SimCellBase::~SimCellBase() {
  if (dirty_) owner_->env().unmark_dirty(*this);
}

void SimLine::persist_all() noexcept {
  if (mode_ == CacheMode::durable) return;
  for (SimCellBase* c = cells_; c != nullptr; c = c->next_in_line_) {
    if (c->dirty_) {
      c->persist();
      env_->unmark_dirty(*c);
    }
  }
}

CrashPolicy CrashPolicy::drop_random(double drop_probability, std::uint64_t seed) {
  if (!(drop_probability >= 0.0 && drop_probability <= 1.0)) {
    throw std::invalid_argument("drop probability must lie in [0, 1]");
  }
  CrashPolicy p(Mode::drop_random);
  p.drop_p_ = drop_probability;
  p.rng_.seed(seed);
  return p;
}

CrashPolicy CrashPolicy::adversarial(Callback keep) {
  if (!keep) throw std::invalid_argument("adversarial policy needs a callback");
  CrashPolicy p(Mode::adversarial);
  p.keep_ = std::move(keep);
  return p;
}

bool CrashPolicy::keep(const SimCellBase& cell) {
  switch (mode_) {
    case Mode::drop_all_unflushed:
      return false;
    case Mode::drop_random: {
      std::bernoulli_distribution drop(drop_p_);
      return !drop(rng_);
    }
    case Mode::adversarial:
      return keep_(cell);
  }
  return false;
}

SimEnv::SimEnv(Pid processes) : processes_(processes), steps_(processes, 0) {
  if (processes == 0) throw std::invalid_argument("process count must be positive");
  for (Pid p = 0; p < processes; ++p) slots_.push_back(std::make_unique<PerProcess>(*this, p));
}

SimEnv::~SimEnv() {
  // Arenas destroy their cells, which unlink themselves from the dirty list.
  slots_.clear();
}

void SimEnv::spin_hint(Pid) {
  if (sched_ != nullptr && sched_->in_task()) sched_->note_spin();
}

std::uint64_t SimEnv::now(Pid p) const noexcept {
  return sched_ != nullptr ? steps_[p] : total_steps_;
}

void SimEnv::before_access() {
  if (sched_ != nullptr && sched_->in_task()) {
    sched_->yield_step();
  } else if (step_limit_ != 0 && total_steps_ >= step_limit_) {
    throw StepBudgetExceeded();
  }
  ++total_steps_;
  ++steps_[current_];
}

void SimEnv::crash(CrashPolicy& policy) {
  SimCellBase* c = dirty_head_;
  while (c != nullptr) {
    SimCellBase* next = c->dirty_next_;
    if (policy.keep(*c)) {
      c->persist();
    } else {
      c->revert();
    }
    c->dirty_ = false;
    c->dirty_prev_ = c->dirty_next_ = nullptr;
    c = next;
  }
  dirty_head_ = dirty_tail_ = nullptr;
  dirty_count_ = 0;
  ++crashes_;
}

void SimEnv::crash() {
  CrashPolicy p = CrashPolicy::drop_all_unflushed();
  crash(p);
}

void SimEnv::mark_dirty(SimCellBase& c) noexcept {
  if (c.dirty_) return;
  c.dirty_ = true;
  c.dirty_prev_ = dirty_tail_;
  c.dirty_next_ = nullptr;
  if (dirty_tail_ != nullptr) {
    dirty_tail_->dirty_next_ = &c;
  } else {
    dirty_head_ = &c;
  }
  dirty_tail_ = &c;
  ++dirty_count_;
}

void SimEnv::unmark_dirty(SimCellBase& c) noexcept {
  if (!c.dirty_) return;
  if (c.dirty_prev_ != nullptr) {
    c.dirty_prev_->dirty_next_ = c.dirty_next_;
  } else {
    dirty_head_ = c.dirty_next_;
  }
  if (c.dirty_next_ != nullptr) {
    c.dirty_next_->dirty_prev_ = c.dirty_prev_;
  } else {
    dirty_tail_ = c.dirty_prev_;
  }
  c.dirty_ = false;
  c.dirty_prev_ = c.dirty_next_ = nullptr;
  --dirty_count_;
}

}  // namespace nvtrack
