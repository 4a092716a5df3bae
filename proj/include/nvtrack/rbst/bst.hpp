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
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "nvtrack/core/env.hpp"

namespace nvtrack {

inline constexpr Key kInf1 = kMaxKey - 1;
inline constexpr Key kInf2 = kMaxKey;

// Leaf-oriented non-blocking BST with flag/mark helping. The recoverable
// flavor records every attempt in RD and announces completion through the
// result field of the attempt's Info record before unflagging.
template <class Env, bool Recoverable = true>
class RecoverableBst {
 public:
  template <class T>
  using Cell = typename Env::template Cell<T>;
  using Info = typename Env::InfoRecord;
  using Update = UpdateWord<Info>;

  struct Node : Env::Line {
    Node(Env& env, Key k, bool is_leaf) : Env::Line(env, CacheMode::durable), key(k), leaf(is_leaf) {}
    const Key key;
    const bool leaf;
  };

  struct alignas(64) Leaf : Node {
    Leaf(Env& env, Key k) : Node(env, k, true) {}
  };

  struct alignas(64) Internal : Node {
    Internal(Env& env, Key k, Node* l, Node* r)
        : Node(env, k, false),
          update(*this, CellRole::bst_update, Update(UpdateState::clean, nullptr)),
          left(*this, CellRole::bst_child, l),
          right(*this, CellRole::bst_child, r) {}

    Cell<Update> update;
    Cell<Node*> left;
    Cell<Node*> right;
  };

  struct alignas(64) IInfo : Info {
    IInfo(Env& env, Internal* p_, Leaf* l_, Internal* n_, TriBool r)
        : Info(env, CacheMode::durable, InfoKind::bst_insert),
          p(p_),
          l(l_),
          new_internal(n_),
          result(*this, CellRole::info_result, r) {}

    Internal* const p;
    Leaf* const l;
    Internal* const new_internal;
    Cell<TriBool> result;
  };

  struct alignas(64) DInfo : Info {
    DInfo(Env& env, Internal* gp_, Internal* p_, Leaf* l_, Update pu, TriBool r)
        : Info(env, CacheMode::durable, InfoKind::bst_delete),
          gp(gp_),
          p(p_),
          l(l_),
          pupdate(pu),
          result(*this, CellRole::info_result, r) {}

    Internal* const gp;
    Internal* const p;
    Leaf* const l;
    const Update pupdate;
    Cell<TriBool> result;
  };

  struct SearchResult {
    Internal* gp;
    Internal* p;
    Leaf* l;
    Update pupdate;
    Update gpupdate;
  };

  explicit RecoverableBst(Env& env) : env_(env) {
    root_ = env_.template make<Internal>(0, env_, kInf2, env_.template make<Leaf>(0, env_, kInf1),
                                         env_.template make<Leaf>(0, env_, kInf2));
  }

  RecoverableBst(const RecoverableBst&) = delete;
  RecoverableBst& operator=(const RecoverableBst&) = delete;

  Env& env() const noexcept { return env_; }
  Internal* root() const noexcept { return root_; }

  SearchResult search(Key k) {
    Internal* gp = nullptr;
    Internal* p = nullptr;
    Node* l = root_;
    Update gpupdate, pupdate;
    while (!l->leaf) {
      gp = p;
      p = static_cast<Internal*>(l);
      gpupdate = pupdate;
      pupdate = p->update.load();
      l = k < p->key ? p->left.load() : p->right.load();
    }
    return {gp, p, static_cast<Leaf*>(l), pupdate, gpupdate};
  }

  Leaf* find_leaf(Key k) {
    check_key(k);
    Leaf* l = search(k).l;
    return l->key == k ? l : nullptr;
  }

  bool find(Pid, Key k) { return find_leaf(k) != nullptr; }
  bool find_recover(Pid p, Key k) requires Recoverable { return find(p, k); }

  bool insert(Pid q, Key k) {
    check_key(k);
    Leaf* fresh = env_.template make<Leaf>(q, env_, k);
    if constexpr (Recoverable) {
      env_.begin_op(q);
      env_.ctx(q).rd.store(nullptr);
      env_.ctx(q).cp.store(1);
    }
    while (true) {
      auto [gp, p, l, pupdate, gpupdate] = search(k);
      if (l->key == k) {
        if constexpr (Recoverable) {
          env_.ctx(q).rd.store(env_.template make<IInfo>(q, env_, nullptr, nullptr, nullptr, TriBool::no));
        }
        return false;
      }
      if (pupdate.state() != UpdateState::clean) {
        help(pupdate);
        continue;
      }
      Leaf* sibling = env_.template make<Leaf>(q, env_, l->key);
      Node* lo = k < l->key ? static_cast<Node*>(fresh) : sibling;
      Node* hi = k < l->key ? static_cast<Node*>(sibling) : fresh;
      Internal* internal = env_.template make<Internal>(q, env_, std::max(k, l->key), lo, hi);
      IInfo* op = env_.template make<IInfo>(q, env_, p, l, internal, TriBool::unset);
      if constexpr (Recoverable) env_.ctx(q).rd.store(op);
      Update witness = p->update.cas_witness(pupdate, Update(UpdateState::iflag, op));
      if (witness == pupdate) {
        help_insert(op);
        return true;
      }
      help(witness);
    }
  }

  bool insert_recover(Pid q, Key k) requires Recoverable {
    auto& c = env_.ctx(q);
    Info* rec = c.rd.load();
    if (c.cp.load() == 0 || rec == nullptr) return insert(q, k);
    IInfo* op = as<IInfo>(rec, InfoKind::bst_insert);
    if (op->result.load() == TriBool::no) return false;
    if (op->p->update.load() == Update(UpdateState::iflag, op)) help_insert(op);
    if (op->result.load() == TriBool::yes) return true;
    return insert(q, k);
  }

  bool remove(Pid q, Key k) {
    check_key(k);
    if constexpr (Recoverable) {
      env_.begin_op(q);
      env_.ctx(q).rd.store(nullptr);
      env_.ctx(q).cp.store(1);
    }
    while (true) {
      auto [gp, p, l, pupdate, gpupdate] = search(k);
      if (l->key != k) {
        if constexpr (Recoverable) {
          env_.ctx(q).rd.store(
              env_.template make<DInfo>(q, env_, nullptr, nullptr, nullptr, Update{}, TriBool::no));
        }
        return false;
      }
      if (gpupdate.state() != UpdateState::clean) {
        help(gpupdate);
      } else if (pupdate.state() != UpdateState::clean) {
        help(pupdate);
      } else {
        DInfo* op = env_.template make<DInfo>(q, env_, gp, p, l, pupdate, TriBool::unset);
        if constexpr (Recoverable) env_.ctx(q).rd.store(op);
        Update witness = gp->update.cas_witness(gpupdate, Update(UpdateState::dflag, op));
        if (witness == gpupdate) {
          if (help_delete(op)) return true;
        } else {
          help(witness);
        }
      }
    }
  }

  bool remove_recover(Pid q, Key k) requires Recoverable {
    auto& c = env_.ctx(q);
    Info* rec = c.rd.load();
    if (c.cp.load() == 0 || rec == nullptr) return remove(q, k);
    DInfo* op = as<DInfo>(rec, InfoKind::bst_delete);
    if (op->result.load() == TriBool::no) return false;
    if (op->gp->update.load() == Update(UpdateState::dflag, op)) help_delete(op);
    if (op->result.load() == TriBool::yes) return true;
    return remove(q, k);
  }

  void help(Update u) {
    switch (u.state()) {
      case UpdateState::iflag: help_insert(static_cast<IInfo*>(u.info())); break;
      case UpdateState::mark: help_marked(static_cast<DInfo*>(u.info())); break;
      case UpdateState::dflag: help_delete(static_cast<DInfo*>(u.info())); break;
      case UpdateState::clean: break;
    }
  }

  void help_insert(IInfo* op) {
    cas_child(op->p, op->l, op->new_internal);
    if constexpr (Recoverable) op->result.store(TriBool::yes);
    op->p->update.cas(Update(UpdateState::iflag, op), Update(UpdateState::clean, op));
  }

  bool help_delete(DInfo* op) {
    Update marked(UpdateState::mark, op);
    Update seen = op->p->update.cas_witness(op->pupdate, marked);
    if (seen == op->pupdate || seen == marked) {
      help_marked(op);
      return true;
    }
    help(seen);
    op->gp->update.cas(Update(UpdateState::dflag, op), Update(UpdateState::clean, op));
    return false;
  }

  void help_marked(DInfo* op) {
    Node* other = op->p->right.load() == op->l ? op->p->left.load() : op->p->right.load();
    cas_child(op->gp, op->p, other);
    if constexpr (Recoverable) op->result.store(TriBool::yes);
    op->gp->update.cas(Update(UpdateState::dflag, op), Update(UpdateState::clean, op));
  }

  void cas_child(Internal* parent, Node* old_child, Node* new_child) {
    if (new_child->key < parent->key) {
      parent->left.cas(old_child, new_child);
    } else {
      parent->right.cas(old_child, new_child);
    }
  }

  // User keys held in leaves, in order, read without taking steps.
  std::vector<Key> snapshot() const {
    std::vector<Key> out;
    collect(root_, out);
    return out;
  }

  // Structural check over the current image; empty string when sound.
  std::string check_structure() const {
    std::size_t nodes = 0;
    std::string err = check_subtree(root_, kMinKey, kMaxKey, true, nodes);
    if (!err.empty()) return err;
    if (nodes < 3) return "tree has fewer than three nodes";
    return {};
  }

 private:
  static void check_key(Key k) {
    if (k >= kInf1) throw std::invalid_argument("key collides with a tree sentinel");
  }

  template <class T>
  static T* as(Info* rec, InfoKind kind) {
    if (rec->kind != kind) throw std::logic_error("recovery data holds a record of another operation");
    return static_cast<T*>(rec);
  }

  static void collect(const Node* n, std::vector<Key>& out) {
    if (n->leaf) {
      if (n->key < kInf1) out.push_back(n->key);
      return;
    }
    auto* in = static_cast<const Internal*>(n);
    collect(in->left.peek(), out);
    collect(in->right.peek(), out);
  }

  // Keys of the subtree must lie in [lo, hi) (hi inclusive at the right spine).
  static std::string check_subtree(const Node* n, Key lo, Key hi, bool hi_inclusive, std::size_t& count) {
    if (n == nullptr) return "missing child";
    if (++count > (std::size_t{1} << 24)) return "tree does not terminate";
    bool in_range = n->key >= lo && (n->key < hi || (hi_inclusive && n->key == hi));
    if (!in_range) return "key " + std::to_string(n->key) + " violates routing bounds";
    if (n->leaf) return {};
    auto* in = static_cast<const Internal*>(n);
    std::string err = check_subtree(in->left.peek(), lo, in->key, false, count);
    if (!err.empty()) return err;
    return check_subtree(in->right.peek(), in->key, hi, hi_inclusive, count);
  }

  Env& env_;
  Internal* root_ = nullptr;
};

}  // namespace nvtrack
