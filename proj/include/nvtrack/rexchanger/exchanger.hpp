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
#include <memory>
#include <stdexcept>
#include <vector>

#include "nvtrack/core/env.hpp"

namespace nvtrack {

enum class ExState : std::uint8_t { empty, waiting, busy };

template <class Env>
struct ExSlot;

template <class Env>
struct ExInfo : Env::InfoRecord {
  template <class T>
  using Cell = typename Env::template Cell<T>;

  ExInfo(Env& env, CacheMode mode, ExState s, Payload v, ExSlot<Env>* sl)
      : Env::InfoRecord(env, mode, InfoKind::exchange),
        state(*this, CellRole::ex_state, s),
        value(v),
        result(*this, CellRole::ex_result, Payload::bottom()),
        partner(*this, CellRole::ex_partner, nullptr),
        slot(sl) {}

  Cell<ExState> state;
  const Payload value;
  Cell<Payload> result;
  Cell<ExInfo*> partner;
  ExSlot<Env>* const slot;  // timed variant only
};

template <class Env>
struct alignas(64) ExSlot : Env::Line {
  ExSlot(Env& env, CacheMode mode, ExInfo<Env>* initial)
      : Env::Line(env, mode), current(*this, CellRole::ex_slot, initial) {}

  typename Env::template Cell<ExInfo<Env>*> current;
};

// Collision protocol shared by the untimed exchanger and the elimination
// array. Without Recoverable the RD/CP writes are skipped.
template <class Env, bool Recoverable = true>
class ExchangeEngine {
 public:
  using Info = ExInfo<Env>;
  using Slot = ExSlot<Env>;

  ExchangeEngine(Env& env, CacheMode mode = CacheMode::durable)
      : env_(env), mode_(mode), default_(make_default(env, mode)) {}

  ExchangeEngine(const ExchangeEngine&) = delete;
  ExchangeEngine& operator=(const ExchangeEngine&) = delete;

  Env& env() const noexcept { return env_; }
  CacheMode mode() const noexcept { return mode_; }
  Info* default_record() const noexcept { return default_.get(); }

  static void switch_pair(Info* first, Info* second) {
    if (first == second) throw std::logic_error("exchange record paired with itself");
    first->result.store(second->value);
    second->result.store(first->value);
  }

  Payload exchange(Pid p, Slot& slot, Payload value) {
    if constexpr (Recoverable) env_.begin_op(p);
    Info* myop = env_.template make<Info>(p, env_, mode_, ExState::waiting, value, nullptr);
    if constexpr (Recoverable) {
      env_.ctx(p).rd.store(myop);
      env_.ctx(p).cp.store(1);
    }
    while (true) {
      Info* yourop = slot.current.load();
      switch (yourop->state.load()) {
        case ExState::empty:
          myop->state.store(ExState::waiting);
          myop->partner.store(nullptr);
          if (slot.current.cas(yourop, myop)) return await_collision(p, slot, myop);
          break;
        case ExState::waiting:
          myop->partner.store(yourop);
          myop->state.store(ExState::busy);
          if (slot.current.cas(yourop, myop)) {
            switch_pair(myop, yourop);
            slot.current.cas(myop, default_.get());
            return myop->result.load();
          }
          break;
        case ExState::busy:
          switch_pair(yourop, yourop->partner.load());
          slot.current.cas(yourop, default_.get());
          break;
      }
    }
  }

  Payload exchange_recover(Pid p, Slot& slot, Payload value) requires Recoverable {
    auto& c = env_.ctx(p);
    Info* myop = static_cast<Info*>(c.rd.load());
    Info* yourop = slot.current.load();
    if (c.cp.load() == 0) return exchange(p, slot, value);
    if (myop->state.load() == ExState::waiting) {
      if (yourop == myop) return await_collision(p, slot, myop);
      if (yourop->partner.load() == myop) {
        switch_pair(myop, yourop);
        slot.current.cas(yourop, default_.get());
      }
    }
    if (myop->state.load() == ExState::busy) {
      if (yourop == myop) {
        switch_pair(myop, myop->partner.load());
        slot.current.cas(myop, default_.get());
      }
    }
    Payload r = myop->result.load();
    if (!r.is_bottom()) return r;
    return exchange(p, slot, value);
  }

  Payload exchange_timed(Pid p, Slot& slot, Payload value, std::uint64_t timeout) {
    if (timeout == 0) throw std::invalid_argument("timeout must be positive");
    const std::uint64_t bound = env_.now(p) + timeout;
    Info* myop = env_.template make<Info>(p, env_, mode_, ExState::waiting, value, &slot);
    if constexpr (Recoverable) env_.ctx(p).rd.store(myop);
    while (true) {
      if (env_.now(p) > bound) return Payload::timeout();
      Info* yourop = slot.current.load();
      switch (yourop->state.load()) {
        case ExState::empty:
          myop->state.store(ExState::waiting);
          myop->partner.store(nullptr);
          if (slot.current.cas(yourop, myop)) {
            while (env_.now(p) < bound) {
              env_.spin_hint(p);
              yourop = slot.current.load();
              if (yourop != myop) {
                complete_if_partner(slot, myop, yourop);
                return myop->result.load();
              }
            }
            if (slot.current.cas(myop, default_.get())) return Payload::timeout();
            yourop = slot.current.load();
            complete_if_partner(slot, myop, yourop);
            return myop->result.load();
          }
          break;
        case ExState::waiting:
          myop->partner.store(yourop);
          myop->state.store(ExState::busy);
          if (slot.current.cas(yourop, myop)) {
            switch_pair(myop, yourop);
            slot.current.cas(myop, default_.get());
            return myop->result.load();
          }
          break;
        case ExState::busy:
          switch_pair(yourop, yourop->partner.load());
          slot.current.cas(yourop, default_.get());
          break;
      }
    }
  }

  // Completes or abandons the attempt recorded in myop; bottom means it did
  // not collide.
  Payload exchange_timed_recover(Info* myop) requires Recoverable {
    Slot& slot = *myop->slot;
    if (myop->state.load() == ExState::waiting) {
      Info* yourop = slot.current.load();
      if (yourop == myop) {
        if (!slot.current.cas(myop, default_.get())) {
          yourop = slot.current.load();
          complete_if_partner(slot, myop, yourop);
        }
      } else {
        complete_if_partner(slot, myop, yourop);
      }
    }
    if (myop->state.load() == ExState::busy) {
      Info* yourop = slot.current.load();
      if (yourop == myop) {
        switch_pair(myop, myop->partner.load());
        slot.current.cas(myop, default_.get());
      }
    }
    return myop->result.load();
  }

 private:
  static std::unique_ptr<Info> make_default(Env& env, CacheMode mode) {
    return std::make_unique<Info>(env, mode, ExState::empty, Payload::bottom(), nullptr);
  }

  void complete_if_partner(Slot& slot, Info* myop, Info* yourop) {
    if (yourop->partner.load() == myop) {
      switch_pair(myop, yourop);
      slot.current.cas(yourop, default_.get());
    }
  }

  Payload await_collision(Pid p, Slot& slot, Info* myop) {
    while (true) {
      env_.spin_hint(p);
      Info* yourop = slot.current.load();
      if (yourop != myop) {
        complete_if_partner(slot, myop, yourop);
        return myop->result.load();
      }
    }
  }

  Env& env_;
  CacheMode mode_;
  std::unique_ptr<Info> default_;
};

// Single-slot untimed exchanger.
template <class Env, bool Recoverable = true>
class Exchanger {
 public:
  using Engine = ExchangeEngine<Env, Recoverable>;
  using Info = typename Engine::Info;

  explicit Exchanger(Env& env, CacheMode mode = CacheMode::durable)
      : engine_(env, mode), slot_(env, mode, engine_.default_record()) {}

  Payload exchange(Pid p, Payload value) { return engine_.exchange(p, slot_, value); }
  Payload exchange_recover(Pid p, Payload value) requires Recoverable {
    return engine_.exchange_recover(p, slot_, value);
  }

  Env& env() const noexcept { return engine_.env(); }
  Engine& engine() noexcept { return engine_; }
  ExSlot<Env>& slot() noexcept { return slot_; }
  Info* default_record() const noexcept { return engine_.default_record(); }
  bool quiescent() const noexcept { return slot_.current.peek() == engine_.default_record(); }

 private:
  Engine engine_;
  ExSlot<Env> slot_;
};

// Timed exchanger addressed by slot, as used for elimination.
template <class Env, bool Recoverable = true>
class TimedExchanger {
 public:
  using Engine = ExchangeEngine<Env, Recoverable>;
  using Info = typename Engine::Info;

  TimedExchanger(Env& env, std::size_t slots, CacheMode mode = CacheMode::durable) : engine_(env, mode) {
    if (slots == 0) throw std::invalid_argument("need at least one exchanger slot");
    for (std::size_t i = 0; i < slots; ++i) {
      slots_.push_back(std::make_unique<ExSlot<Env>>(env, mode, engine_.default_record()));
    }
  }

  // The caller owns the CP protocol; this only writes RD.
  Payload exchange(Pid p, std::size_t slot, Payload value, std::uint64_t timeout) {
    return engine_.exchange_timed(p, *slots_.at(slot), value, timeout);
  }
  Payload exchange_recover(Info* myop) requires Recoverable { return engine_.exchange_timed_recover(myop); }

  std::size_t size() const noexcept { return slots_.size(); }
  ExSlot<Env>& slot(std::size_t i) { return *slots_.at(i); }
  Info* default_record() const noexcept { return engine_.default_record(); }
  Engine& engine() noexcept { return engine_; }

  bool quiescent() const noexcept {
    for (const auto& s : slots_) {
      if (s->current.peek() != engine_.default_record()) return false;
    }
    return true;
  }

 private:
  Engine engine_;
  std::vector<std::unique_ptr<ExSlot<Env>>> slots_;
};

}  // namespace nvtrack
