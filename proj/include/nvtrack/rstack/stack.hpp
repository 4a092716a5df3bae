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

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvtrack/core/env.hpp"
#include "nvtrack/rexchanger/exchanger.hpp"

namespace nvtrack {

// Adaptive width of the elimination array visited by one process.
class EliminationPolicy {
 public:
  EliminationPolicy(std::size_t max_range, std::uint64_t duration) : max_(max_range), duration_(duration) {
    if (max_range == 0) throw std::invalid_argument("elimination range must be at least 1");
    if (duration == 0) throw std::invalid_argument("elimination duration must be positive");
  }

  std::size_t range() const noexcept { return range_; }
  std::uint64_t duration() const noexcept { return duration_; }
  void record_success() noexcept { range_ = std::max<std::size_t>(1, range_ - 1); }
  void record_failure() noexcept { range_ = std::min(max_, range_ + 1); }

 private:
  std::size_t max_;
  std::size_t range_ = 1;
  std::uint64_t duration_;
};

struct StackOptions {
  std::size_t slots = 16;
  // Exchange timeout: logical steps on the simulated backend, ns natively.
  std::uint64_t duration = 0;  // 0 picks 8 steps / 1000 ns
  std::uint64_t seed = 1;
};

// Treiber stack with an elimination layer of timed exchangers. Push and pop
// attempts on the central stack are tracked through CSInfo records; visits
// to the elimination layer through ExInfo records.
template <class Env, bool Recoverable = true>
class EliminationStack {
 public:
  template <class T>
  using Cell = typename Env::template Cell<T>;
  using Exchange = TimedExchanger<Env, Recoverable>;
  using ExRecord = typename Exchange::Info;

  struct alignas(64) Node : Env::Line {
    Node(Env& env, Payload v, Pid no_pid)
        : Env::Line(env, CacheMode::durable),
          value(v),
          next(*this, CellRole::stack_next, nullptr),
          pushed(*this, CellRole::stack_pushed, false),
          popper(*this, CellRole::stack_popper, no_pid) {}

    const Payload value;
    Cell<Node*> next;
    [[no_unique_address]] FieldIf<Recoverable, Cell<bool>> pushed;
    [[no_unique_address]] FieldIf<Recoverable, Cell<Pid>> popper;
  };

  struct CSInfo : Env::InfoRecord {
    CSInfo(Env& env, Node* n, Payload r)
        : Env::InfoRecord(env, CacheMode::durable, InfoKind::stack_cs),
          nd(*this, CellRole::info_node, n),
          result(*this, CellRole::info_result, r) {}

    Cell<Node*> nd;
    Cell<Payload> result;
  };

  EliminationStack(Env& env, StackOptions opts = {})
      : env_(env),
        no_pid_(env.processes()),
        root_(env, CacheMode::durable),
        top_(root_, CellRole::stack_top, nullptr),
        exchanger_(env, opts.slots) {
    std::uint64_t duration = opts.duration != 0 ? opts.duration : (Env::kSimulated ? 8 : 1000);
    for (Pid p = 0; p < env.processes(); ++p) {
      policies_.emplace_back(opts.slots, duration);
      rngs_.emplace_back(opts.seed * 0x9E3779B97F4A7C15ULL + p);
    }
  }

  EliminationStack(const EliminationStack&) = delete;
  EliminationStack& operator=(const EliminationStack&) = delete;

  static Payload pushed_marker() noexcept { return Payload::from_bool(true); }

  bool try_push(Pid p, CSInfo* data) {
    Node* oldtop = top_.load();
    Node* nd = data->nd.load();
    nd->next.store(oldtop);
    if constexpr (Recoverable) env_.ctx(p).rd.store(data);
    if (top_.cas(oldtop, nd)) {
      if constexpr (Recoverable) {
        nd->pushed.store(true);
        data->result.store(pushed_marker());
      }
      return true;
    }
    return false;
  }

  bool push(Pid p, Payload value) {
    if (!value.is_user()) throw std::invalid_argument("stack values must not be sentinels");
    if constexpr (Recoverable) env_.begin_op(p);
    Node* nd = env_.template make<Node>(p, env_, value, no_pid_);
    CSInfo* data = env_.template make<CSInfo>(p, env_, nd, Payload::bottom());
    if constexpr (Recoverable) {
      env_.ctx(p).rd.store(data);
      env_.ctx(p).cp.store(1);
    }
    EliminationPolicy& policy = policies_[p];
    while (true) {
      if (try_push(p, data)) return true;
      Payload other = visit(p, value, policy.range(), policy.duration());
      if (other == Payload::null()) {
        if constexpr (Recoverable) {
          env_.ctx(p).rd.store(env_.template make<CSInfo>(p, env_, nullptr, pushed_marker()));
        }
        policy.record_success();
        return true;
      }
      if (other == Payload::timeout()) policy.record_failure();
    }
  }

  bool push_recover(Pid p, Payload value) requires Recoverable {
    auto& c = env_.ctx(p);
    auto* data = c.rd.load();
    if (c.cp.load() == 0) return push(p, value);
    if (data->kind == InfoKind::exchange) {
      if (exchanger_.exchange_recover(static_cast<ExRecord*>(data)) == Payload::null()) {
        c.rd.store(env_.template make<CSInfo>(p, env_, nullptr, pushed_marker()));
      }
    } else {
      auto* info = static_cast<CSInfo*>(data);
      Node* nd = info->nd.load();
      if (info->result.load().is_bottom()) {
        if (search(nd) || nd->pushed.load()) {
          nd->pushed.store(true);
          info->result.store(pushed_marker());
        }
      }
    }
    auto* now = c.rd.load();
    if (now->kind == InfoKind::stack_cs && static_cast<CSInfo*>(now)->result.load() == pushed_marker()) {
      return true;
    }
    return push(p, value);
  }

  // A value, EMPTY, or bottom when the attempt lost a race.
  Payload try_pop(Pid p, CSInfo* data) {
    Node* oldtop = top_.load();
    if constexpr (Recoverable) {
      data->nd.store(oldtop);
      env_.ctx(p).rd.store(data);
    }
    if (oldtop == nullptr) {
      if constexpr (Recoverable) data->result.store(Payload::empty());
      return Payload::empty();
    }
    Node* newtop = oldtop->next.load();
    if constexpr (Recoverable) oldtop->pushed.store(true);
    if (top_.cas(oldtop, newtop)) {
      if constexpr (Recoverable) {
        if (oldtop->popper.cas(no_pid_, p)) {
          data->result.store(oldtop->value);
          return oldtop->value;
        }
      } else {
        return oldtop->value;
      }
    }
    return Payload::bottom();
  }

  Payload pop(Pid p) {
    if constexpr (Recoverable) env_.begin_op(p);
    CSInfo* data = nullptr;
    if constexpr (Recoverable) {
      data = env_.template make<CSInfo>(p, env_, top_.load(), Payload::bottom());
      env_.ctx(p).rd.store(data);
      env_.ctx(p).cp.store(1);
    }
    EliminationPolicy& policy = policies_[p];
    while (true) {
      Payload response = try_pop(p, data);
      if (!response.is_bottom()) return response;
      Payload other = visit(p, Payload::null(), policy.range(), policy.duration());
      if (other == Payload::timeout()) {
        policy.record_failure();
      } else if (other != Payload::null()) {
        if constexpr (Recoverable) env_.ctx(p).rd.store(env_.template make<CSInfo>(p, env_, nullptr, other));
        policy.record_success();
        return other;
      }
    }
  }

  Payload pop_recover(Pid p) requires Recoverable {
    auto& c = env_.ctx(p);
    auto* data = c.rd.load();
    if (c.cp.load() == 0) return pop(p);
    if (data->kind == InfoKind::exchange) {
      Payload temp = exchanger_.exchange_recover(static_cast<ExRecord*>(data));
      if (temp != Payload::null() && !temp.is_bottom()) {
        c.rd.store(env_.template make<CSInfo>(p, env_, nullptr, temp));
      }
    } else {
      auto* info = static_cast<CSInfo*>(data);
      Node* nd = info->nd.load();
      if (info->result.load().is_bottom()) {
        if (nd == nullptr) {
          info->result.store(Payload::empty());
        } else if (!search(nd)) {
          nd->popper.cas(no_pid_, p);
          if (nd->popper.load() == p) info->result.store(nd->value);
        }
      }
    }
    // Only a central-stack record carries a pop response; an exchange record
    // that paired with another pop holds NULL and means "retry".
    auto* now = c.rd.load();
    if (now->kind == InfoKind::stack_cs) {
      Payload r = static_cast<CSInfo*>(now)->result.load();
      if (!r.is_bottom()) return r;
    }
    return pop(p);
  }

  bool search(Node* nd) {
    for (Node* iter = top_.load(); iter != nullptr; iter = iter->next.load()) {
      if (iter == nd) return true;
    }
    return false;
  }

  Payload visit(Pid p, Payload value, std::size_t range, std::uint64_t duration) {
    std::size_t cell = range <= 1 ? 0 : std::uniform_int_distribution<std::size_t>(0, range - 1)(rngs_[p]);
    return exchanger_.exchange(p, cell, value, duration);
  }

  // Values from top to bottom, read without taking steps.
  std::vector<Payload> snapshot() const {
    std::vector<Payload> out;
    for (Node* n = top_.peek(); n != nullptr; n = n->next.peek()) out.push_back(n->value);
    return out;
  }

  std::string check_structure() const {
    std::size_t hops = 0;
    for (Node* n = top_.peek(); n != nullptr; n = n->next.peek()) {
      if (++hops > (std::size_t{1} << 24)) return "stack chain does not terminate";
    }
    return {};
  }

  Env& env() const noexcept { return env_; }
  Pid no_pid() const noexcept { return no_pid_; }
  Exchange& exchanger() noexcept { return exchanger_; }
  const Exchange& exchanger() const noexcept { return exchanger_; }
  const EliminationPolicy& policy(Pid p) const { return policies_.at(p); }
  Node* top_peek() const noexcept { return top_.peek(); }

 private:
  Env& env_;
  Pid no_pid_;
  typename Env::Line root_;
  Cell<Node*> top_;
  Exchange exchanger_;
  std::vector<EliminationPolicy> policies_;
  std::vector<std::mt19937_64> rngs_;
};

}  // namespace nvtrack
