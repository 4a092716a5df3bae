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
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nvtrack/core/env.hpp"

namespace nvtrack {

enum class ListFlavor : std::uint8_t { base, recoverable, recoverable_flush };

struct ListOptions {
  // Cache mode of nodes and records. Defaults to volatile for the flush
  // flavor and durable otherwise.
  std::optional<CacheMode> mode;
  // Flush flavor: persist the new node's line before the linking CAS.
  bool persist_new_node_before_link = true;
  // Flush flavor: persist a node's mark before helping to unlink it.
  bool persist_mark_before_unlink = true;
  // Fault injection: skip recording the result of a successful insert.
  bool skip_insert_result_persist = false;
};

// Sorted lock-free set of keys. The recoverable flavors record each update
// in an Info record reachable from RD and arbitrate deletions through a
// write-once deleter field.
template <class Env, ListFlavor Flavor>
class LinkedListSet {
 public:
  static constexpr bool kRecoverable = Flavor != ListFlavor::base;
  static constexpr bool kFlush = Flavor == ListFlavor::recoverable_flush;

  template <class T>
  using Cell = typename Env::template Cell<T>;

  struct Node;
  using Ref = MarkedRef<Node>;

  struct alignas(64) Node : Env::Line {
    Node(Env& env, CacheMode mode, Key k, Pid no_pid, bool flushed_init)
        : Env::Line(env, mode),
          key(k),
          next(*this, CellRole::list_next, Ref{}),
          deleter(*this, CellRole::list_deleter, no_pid),
          flushed(*this, CellRole::list_flushed, flushed_init) {}

    const Key key;
    Cell<Ref> next;
    [[no_unique_address]] FieldIf<kRecoverable, Cell<Pid>> deleter;
    [[no_unique_address]] FieldIf<kFlush, Cell<bool>> flushed;
  };

  struct Info : Env::InfoRecord {
    Info(Env& env, CacheMode mode, Node* n)
        : Env::InfoRecord(env, mode, InfoKind::list),
          nd(*this, CellRole::info_node, n),
          result(*this, CellRole::info_result, TriBool::unset) {}

    Cell<Node*> nd;
    Cell<TriBool> result;
  };

  explicit LinkedListSet(Env& env, ListOptions opts = {})
      : env_(env),
        opts_(opts),
        mode_(opts.mode.value_or(kFlush ? CacheMode::volatile_cache : CacheMode::durable)),
        no_pid_(env.processes()) {
    head_ = env_.template make<Node>(0, env_, mode_, kMinKey, no_pid_, true);
    if constexpr (kFlush) head_->next.flush();
    tail_ = env_.template make<Node>(0, env_, mode_, kMaxKey, no_pid_, true);
    head_->next.store(Ref(tail_, false));
    if constexpr (kFlush) head_->next.flush();
  }

  LinkedListSet(const LinkedListSet&) = delete;
  LinkedListSet& operator=(const LinkedListSet&) = delete;

  Env& env() const noexcept { return env_; }
  Pid no_pid() const noexcept { return no_pid_; }
  Node* head() const noexcept { return head_; }
  Node* tail() const noexcept { return tail_; }

  bool find(Pid p, Key key) {
    check_key(key);
    if constexpr (kRecoverable) env_.begin_op(p);
    Node* curr = head_;
    while (curr->key < key) {
      Node* succ = curr->next.load().get();
      if constexpr (kFlush) {
        if (!succ->flushed.load()) {
          curr->next.flush();
          succ->flushed.store(true);
          succ->flushed.flush();
        }
      }
      curr = succ;
    }
    return curr->key == key && !curr->next.load().marked();
  }

  // Adjacent unmarked (pred, curr) with pred.key < key <= curr.key; unlinks
  // marked nodes on the way.
  std::pair<Node*, Node*> search(Key key) {
  retry:
    Node* pred = head_;
    Node* curr = pred->next.load().get();
    while (true) {
      Ref succ = curr->next.load();
      if (succ.marked()) {
        if constexpr (kFlush) {
          if (opts_.persist_mark_before_unlink) curr->next.flush();
        }
        if (!pred->next.cas(Ref(curr, false), Ref(succ.get(), false))) goto retry;
        curr = succ.get();
      } else {
        if constexpr (kFlush) {
          if (!curr->flushed.load()) {
            pred->next.flush();
            curr->flushed.store(true);
            curr->flushed.flush();
          }
        }
        if (curr->key >= key) return {pred, curr};
        pred = curr;
        curr = succ.get();
      }
    }
  }

  bool insert(Pid p, Key key) {
    check_key(key);
    if constexpr (kRecoverable) env_.begin_op(p);
    Node* nd = env_.template make<Node>(p, env_, mode_, key, no_pid_, false);
    Info* info = nullptr;
    if constexpr (kRecoverable) {
      info = env_.template make<Info>(p, env_, mode_, nd);
      install(p, info);
    }
    while (true) {
      auto [pred, curr] = search(key);
      if (curr->key == key) {
        record(info, false);
        return false;
      }
      nd->next.store(Ref(curr, false));
      if constexpr (kFlush) {
        if (opts_.persist_new_node_before_link) nd->next.flush();
      }
      if (pred->next.cas(Ref(curr, false), Ref(nd, false))) {
        if constexpr (kFlush) {
          pred->next.flush();
          nd->flushed.store(true);
          nd->flushed.flush();
        }
        if (!opts_.skip_insert_result_persist) record(info, true);
        return true;
      }
    }
  }

  bool insert_recover(Pid p, Key key) requires kRecoverable {
    auto& c = env_.ctx(p);
    if (c.cp.load() == 0) return insert(p, key);
    Info* info = static_cast<Info*>(c.rd.load());
    TriBool r = info->result.load();
    if (r != TriBool::unset) return r == TriBool::yes;
    auto [pred, curr] = search(key);
    Node* nd = info->nd.load();
    if (curr == nd || nd->next.load().marked()) {
      record(info, true);
      return true;
    }
    return insert(p, key);
  }

  bool remove(Pid p, Key key) {
    check_key(key);
    if constexpr (!kRecoverable) {
      return remove_base(key);
    } else {
      env_.begin_op(p);
      Info* info = env_.template make<Info>(p, env_, mode_, nullptr);
      install(p, info);
      auto [pred, curr] = search(key);
      if (curr->key != key) {
        record(info, false);
        return false;
      }
      info->nd.store(curr);
      if constexpr (kFlush) info->nd.flush();
      while (true) {
        Ref succ = curr->next.load();
        if (succ.marked()) break;
        if (curr->next.cas(succ, succ.with_mark(true))) {
          if constexpr (kFlush) curr->next.flush();
        }
      }
      Ref succ = curr->next.load();
      pred->next.cas(Ref(curr, false), Ref(succ.get(), false));
      bool res = curr->deleter.cas(no_pid_, p);
      if constexpr (kFlush) curr->deleter.flush();
      record(info, res);
      return res;
    }
  }

  bool remove_recover(Pid p, Key key) requires kRecoverable {
    auto& c = env_.ctx(p);
    if (c.cp.load() == 0) return remove(p, key);
    Info* info = static_cast<Info*>(c.rd.load());
    TriBool r = info->result.load();
    if (r != TriBool::unset) return r == TriBool::yes;
    Node* nd = info->nd.load();
    if (nd != nullptr && nd->next.load().marked()) {
      nd->deleter.cas(no_pid_, p);
      if constexpr (kFlush) nd->deleter.flush();
      bool res = nd->deleter.load() == p;
      record(info, res);
      return res;
    }
    return remove(p, key);
  }

  bool find_recover(Pid p, Key key) requires kRecoverable { return find(p, key); }

  // Unmarked user keys in order, read without taking steps.
  std::vector<Key> snapshot() const {
    std::vector<Key> keys;
    for (Node* n = head_->next.peek().get(); n != nullptr && n != tail_; n = n->next.peek().get()) {
      if (!n->next.peek().marked()) keys.push_back(n->key);
    }
    return keys;
  }

  // Structural check over the volatile image; empty string when sound.
  std::string check_structure() const { return check_chain([](const Cell<Ref>& c) { return c.peek(); }); }

  // Same check over what a crash would leave behind.
  std::string check_persisted_structure() const requires Env::kSimulated {
    return check_chain([](const Cell<Ref>& c) { return c.peek_persisted(); });
  }

 private:
  static void check_key(Key key) {
    if (key == kMinKey || key == kMaxKey) throw std::invalid_argument("key collides with a list sentinel");
  }

  void install(Pid p, Info* info) {
    auto& c = env_.ctx(p);
    c.rd.store(info);
    if constexpr (kFlush) c.rd.flush();
    c.cp.store(1);
    if constexpr (kFlush) c.cp.flush();
  }

  void record(Info* info, bool value) {
    if constexpr (kRecoverable) {
      info->result.store(to_tri(value));
      if constexpr (kFlush) info->result.flush();
    }
  }

  bool remove_base(Key key) {
    while (true) {
      auto [pred, curr] = search(key);
      if (curr->key != key) return false;
      Ref succ = curr->next.load();
      if (succ.marked()) continue;
      if (curr->next.cas(succ, succ.with_mark(true))) {
        pred->next.cas(Ref(curr, false), Ref(succ.get(), false));
        return true;
      }
    }
  }

  template <class Read>
  std::string check_chain(Read read) const {
    Node* n = head_;
    std::size_t hops = 0;
    while (n != tail_) {
      Ref next = read(n->next);
      Node* succ = next.get();
      if (succ == nullptr) return "node " + std::to_string(n->key) + " has no successor before tail";
      if (succ->key <= n->key) {
        return "keys not increasing: " + std::to_string(n->key) + " -> " + std::to_string(succ->key);
      }
      if (++hops > (std::size_t{1} << 24)) return "chain does not terminate";
      n = succ;
    }
    return {};
  }

  Env& env_;
  ListOptions opts_;
  CacheMode mode_;
  Pid no_pid_;
  Node* head_ = nullptr;
  Node* tail_ = nullptr;
};

}  // namespace nvtrack
