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

#include <stdexcept>

#include "nvtrack/harness/subject.hpp"
#include "nvtrack/rbst/bst.hpp"
#include "nvtrack/rexchanger/exchanger.hpp"

namespace nvtrack {

std::string to_string(StructureKind k) {
  switch (k) {
    case StructureKind::list: return "list";
    case StructureKind::list_flush: return "list-flush";
    case StructureKind::stack: return "stack";
    case StructureKind::bst: return "bst";
    case StructureKind::exchanger: return "exchanger";
    case StructureKind::timed_exchanger: return "timed-exchanger";
  }
  return "?";
}

std::optional<StructureKind> parse_structure(const std::string& name) {
  for (auto k : {StructureKind::list, StructureKind::list_flush, StructureKind::stack, StructureKind::bst,
                 StructureKind::exchanger, StructureKind::timed_exchanger}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

SpecKind spec_of(StructureKind k) noexcept {
  switch (k) {
    case StructureKind::stack: return SpecKind::stack;
    case StructureKind::exchanger:
    case StructureKind::timed_exchanger: return SpecKind::exchanger;
    default: return SpecKind::set;
  }
}

std::vector<OpCode> op_codes(StructureKind k) {
  switch (spec_of(k)) {
    case SpecKind::set: return {OpCode::insert, OpCode::remove, OpCode::find};
    case SpecKind::stack: return {OpCode::push, OpCode::pop};
    case SpecKind::exchanger: return {OpCode::exchange};
  }
  return {};
}

namespace {

[[noreturn]] void bad_op(const Op& op) { throw std::invalid_argument("unsupported operation " + to_string(op)); }

Payload tri_payload(TriBool t) {
  switch (t) {
    case TriBool::yes: return Payload::from_bool(true);
    case TriBool::no: return Payload::from_bool(false);
    case TriBool::unset: break;
  }
  return Payload::bottom();
}

template <ListFlavor Flavor>
class ListSubject final : public Subject {
  using List = LinkedListSet<SimEnv, Flavor>;

 public:
  ListSubject(SimEnv& env, const ListOptions& opts) : env_(env), list_(env, opts) {}

  Payload apply(Pid p, const Op& op) override {
    switch (op.code) {
      case OpCode::insert: return Payload::from_bool(list_.insert(p, op.arg));
      case OpCode::remove: return Payload::from_bool(list_.remove(p, op.arg));
      case OpCode::find: return Payload::from_bool(list_.find(p, op.arg));
      default: bad_op(op);
    }
  }

  Payload recover(Pid p, const Op& op) override {
    switch (op.code) {
      case OpCode::insert: return Payload::from_bool(list_.insert_recover(p, op.arg));
      case OpCode::remove: return Payload::from_bool(list_.remove_recover(p, op.arg));
      case OpCode::find: return Payload::from_bool(list_.find_recover(p, op.arg));
      default: bad_op(op);
    }
  }

  std::optional<Payload> persisted_response(Pid p, const Op& op, Payload) const override {
    if (op.code == OpCode::find) return std::nullopt;
    auto* info = static_cast<typename List::Info*>(env_.ctx(p).rd.peek_persisted());
    if (info == nullptr || info->kind != InfoKind::list) return Payload::bottom();
    return tri_payload(info->result.peek_persisted());
  }

  AbstractState state() const override {
    auto keys = list_.snapshot();
    return AbstractState(keys.begin(), keys.end());
  }

  std::string check_structure() const override {
    std::string err = list_.check_structure();
    if (err.empty() && List::kFlush) err = list_.check_persisted_structure();
    return err;
  }

  std::string check_after_crash() const override { return list_.check_structure(); }

 private:
  SimEnv& env_;
  List list_;
};

class BstSubject final : public Subject {
  using Tree = RecoverableBst<SimEnv, true>;

 public:
  explicit BstSubject(SimEnv& env) : env_(env), tree_(env) {}

  Payload apply(Pid p, const Op& op) override {
    switch (op.code) {
      case OpCode::insert: return Payload::from_bool(tree_.insert(p, op.arg));
      case OpCode::remove: return Payload::from_bool(tree_.remove(p, op.arg));
      case OpCode::find: return Payload::from_bool(tree_.find(p, op.arg));
      default: bad_op(op);
    }
  }

  Payload recover(Pid p, const Op& op) override {
    switch (op.code) {
      case OpCode::insert: return Payload::from_bool(tree_.insert_recover(p, op.arg));
      case OpCode::remove: return Payload::from_bool(tree_.remove_recover(p, op.arg));
      case OpCode::find: return Payload::from_bool(tree_.find_recover(p, op.arg));
      default: bad_op(op);
    }
  }

  std::optional<Payload> persisted_response(Pid p, const Op& op, Payload) const override {
    if (op.code == OpCode::find) return std::nullopt;
    auto* rec = env_.ctx(p).rd.peek_persisted();
    if (rec == nullptr) return Payload::bottom();
    if (rec->kind == InfoKind::bst_insert && op.code == OpCode::insert) {
      return tri_payload(static_cast<Tree::IInfo*>(rec)->result.peek_persisted());
    }
    if (rec->kind == InfoKind::bst_delete && op.code == OpCode::remove) {
      return tri_payload(static_cast<Tree::DInfo*>(rec)->result.peek_persisted());
    }
    return Payload::bottom();
  }

  AbstractState state() const override {
    auto keys = tree_.snapshot();
    return AbstractState(keys.begin(), keys.end());
  }

  std::string check_structure() const override { return tree_.check_structure(); }

 private:
  SimEnv& env_;
  Tree tree_;
};

class StackSubject final : public Subject {
  using Stack = EliminationStack<SimEnv, true>;

 public:
  StackSubject(SimEnv& env, const StackOptions& opts) : env_(env), stack_(env, opts) {}

  Payload apply(Pid p, const Op& op) override {
    switch (op.code) {
      case OpCode::push: return Payload::from_bool(stack_.push(p, Payload::of(op.arg)));
      case OpCode::pop: return stack_.pop(p);
      default: bad_op(op);
    }
  }

  Payload recover(Pid p, const Op& op) override {
    switch (op.code) {
      case OpCode::push: return Payload::from_bool(stack_.push_recover(p, Payload::of(op.arg)));
      case OpCode::pop: return stack_.pop_recover(p);
      default: bad_op(op);
    }
  }

  std::optional<Payload> persisted_response(Pid p, const Op&, Payload) const override {
    auto* rec = env_.ctx(p).rd.peek_persisted();
    if (rec == nullptr || rec->kind != InfoKind::stack_cs) return Payload::bottom();
    return static_cast<Stack::CSInfo*>(rec)->result.peek_persisted();
  }

  AbstractState state() const override {
    AbstractState out;
    for (Payload v : stack_.snapshot()) out.push_back(v.raw());
    return out;
  }

  std::string check_structure() const override {
    std::string err = stack_.check_structure();
    if (err.empty() && !stack_.exchanger().quiescent()) {
      err = "elimination slot not reset at quiescence";
    }
    return err;
  }

 private:
  SimEnv& env_;
  Stack stack_;
};

class ExchangerSubject final : public Subject {
  using Ex = Exchanger<SimEnv, true>;

 public:
  explicit ExchangerSubject(SimEnv& env) : env_(env), ex_(env) {}

  Payload apply(Pid p, const Op& op) override {
    if (op.code != OpCode::exchange) bad_op(op);
    return ex_.exchange(p, Payload::of(op.arg));
  }

  Payload recover(Pid p, const Op& op) override {
    if (op.code != OpCode::exchange) bad_op(op);
    return ex_.exchange_recover(p, Payload::of(op.arg));
  }

  std::optional<Payload> persisted_response(Pid p, const Op&, Payload) const override {
    auto* rec = env_.ctx(p).rd.peek_persisted();
    if (rec == nullptr || rec->kind != InfoKind::exchange) return Payload::bottom();
    return static_cast<Ex::Info*>(rec)->result.peek_persisted();
  }

  AbstractState state() const override { return {}; }

  std::string check_structure() const override {
    return ex_.quiescent() ? std::string() : "slot not reset to the default record at quiescence";
  }

 private:
  SimEnv& env_;
  Ex ex_;
};

// Stand-alone timed exchanger on one slot. The subject owns the checkpoint
// protocol the stack would otherwise provide.
class TimedExchangerSubject final : public Subject {
  using Ex = TimedExchanger<SimEnv, true>;

 public:
  TimedExchangerSubject(SimEnv& env, std::uint64_t timeout) : env_(env), ex_(env, 1), timeout_(timeout) {}

  Payload apply(Pid p, const Op& op) override {
    if (op.code != OpCode::exchange) bad_op(op);
    auto& c = env_.ctx(p);
    env_.begin_op(p);
    c.rd.store(nullptr);
    c.cp.store(1);
    return ex_.exchange(p, 0, Payload::of(op.arg), timeout_);
  }

  Payload recover(Pid p, const Op& op) override {
    if (op.code != OpCode::exchange) bad_op(op);
    auto& c = env_.ctx(p);
    auto* rec = c.rd.load();
    if (c.cp.load() == 0 || rec == nullptr) return apply(p, op);
    Payload r = ex_.exchange_recover(static_cast<Ex::Info*>(rec));
    if (r.is_bottom()) return apply(p, op);
    return r;
  }

  std::optional<Payload> persisted_response(Pid p, const Op&, Payload response) const override {
    if (response == Payload::timeout()) return std::nullopt;
    auto* rec = env_.ctx(p).rd.peek_persisted();
    if (rec == nullptr || rec->kind != InfoKind::exchange) return Payload::bottom();
    return static_cast<Ex::Info*>(rec)->result.peek_persisted();
  }

  AbstractState state() const override { return {}; }

  std::string check_structure() const override {
    return ex_.quiescent() ? std::string() : "slot not reset to the default record at quiescence";
  }

 private:
  SimEnv& env_;
  Ex ex_;
  std::uint64_t timeout_;
};

}  // namespace

std::unique_ptr<Subject> make_subject(const SubjectSpec& spec, SimEnv& env) {
  const SubjectOptions& o = spec.options;
  switch (spec.kind) {
    case StructureKind::list: return std::make_unique<ListSubject<ListFlavor::recoverable>>(env, o.list);
    case StructureKind::list_flush:
      return std::make_unique<ListSubject<ListFlavor::recoverable_flush>>(env, o.list);
    case StructureKind::stack: return std::make_unique<StackSubject>(env, o.stack);
    case StructureKind::bst: return std::make_unique<BstSubject>(env);
    case StructureKind::exchanger: return std::make_unique<ExchangerSubject>(env);
    case StructureKind::timed_exchanger: return std::make_unique<TimedExchangerSubject>(env, o.exchange_timeout);
  }
  throw std::invalid_argument("unknown structure");
}

}  // namespace nvtrack
