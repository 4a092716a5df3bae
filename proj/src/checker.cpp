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

#include "nvtrack/harness/checker.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_set>

namespace nvtrack {

Payload SequentialSpec::apply(SpecKind kind, AbstractState& state, const Op& op) {
  switch (kind) {
    case SpecKind::set: {
      auto it = std::lower_bound(state.begin(), state.end(), op.arg);
      bool present = it != state.end() && *it == op.arg;
      switch (op.code) {
        case OpCode::find: return Payload::from_bool(present);
        case OpCode::insert:
          if (present) return Payload::from_bool(false);
          state.insert(it, op.arg);
          return Payload::from_bool(true);
        case OpCode::remove:
          if (!present) return Payload::from_bool(false);
          state.erase(it);
          return Payload::from_bool(true);
        default: break;
      }
      break;
    }
    case SpecKind::stack:
      if (op.code == OpCode::push) {
        state.insert(state.begin(), op.arg);
        return Payload::from_bool(true);
      }
      if (op.code == OpCode::pop) {
        if (state.empty()) return Payload::empty();
        Payload top = Payload::of(state.front());
        state.erase(state.begin());
        return top;
      }
      break;
    case SpecKind::exchanger:
      throw std::invalid_argument("exchanges have no sequential oracle");
  }
  throw std::invalid_argument("operation " + to_string(op) + " does not belong to this structure kind");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::ok: return "OK";
    case Verdict::violation: return "VIOLATION";
    case Verdict::unchecked: return "UNCHECKED";
  }
  return "?";
}

namespace {

class Linearizer {
 public:
  Linearizer(const std::vector<OpRecord>& ops, SpecKind kind, const std::optional<AbstractState>& final_state)
      : ops_(ops), kind_(kind), final_(final_state) {
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      if (ops_[i].response) required_ |= std::uint32_t{1} << i;
    }
  }

  bool run(AbstractState initial) { return dfs(0, initial); }

  std::uint32_t best_mask() const noexcept { return best_mask_; }

 private:
  bool dfs(std::uint32_t mask, const AbstractState& state) {
    if ((mask & required_) == required_ && (!final_ || state == *final_)) return true;
    if (!seen_.insert(encode(mask, state)).second) return false;
    if (std::popcount(mask) > std::popcount(best_mask_)) best_mask_ = mask;

    std::size_t min_end = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      if ((mask >> i & 1U) == 0 && ops_[i].response) min_end = std::min(min_end, ops_[i].end);
    }
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      if ((mask >> i & 1U) != 0 || ops_[i].invoke > min_end) continue;
      AbstractState next = state;
      Payload r = SequentialSpec::apply(kind_, next, ops_[i].op);
      if (ops_[i].response && *ops_[i].response != r) continue;
      if (dfs(mask | std::uint32_t{1} << i, next)) return true;
    }
    return false;
  }

  static std::string encode(std::uint32_t mask, const AbstractState& state) {
    std::string key(sizeof mask + state.size() * sizeof(std::int64_t), '\0');
    std::memcpy(key.data(), &mask, sizeof mask);
    if (!state.empty()) std::memcpy(key.data() + sizeof mask, state.data(), state.size() * sizeof(std::int64_t));
    return key;
  }

  const std::vector<OpRecord>& ops_;
  SpecKind kind_;
  const std::optional<AbstractState>& final_;
  std::uint32_t required_ = 0;
  std::uint32_t best_mask_ = 0;
  std::unordered_set<std::string> seen_;
};

std::string describe(const OpRecord& r) {
  std::string s = "p" + std::to_string(r.pid) + " " + to_string(r.op) + " -> ";
  s += r.response ? r.response->to_string() : std::string("pending");
  if (r.crashed) s += " (crashed)";
  return s;
}

CheckResult check_group(const std::vector<OpRecord>& ops, SpecKind kind, const AbstractState& initial,
                        const std::optional<AbstractState>& final_state, const History& h) {
  if (ops.size() > kMaxCheckedOps) {
    return {Verdict::unchecked, std::to_string(ops.size()) + " operations exceed the checker bound"};
  }
  Linearizer lin(ops, kind, final_state);
  if (lin.run(initial)) return {};
  std::string w = "no crash-extended linearization; operations that cannot be placed:\n";
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if ((lin.best_mask() >> i & 1U) == 0) w += "  " + describe(ops[i]) + "\n";
  }
  if (final_state) {
    w += "observed final state:";
    for (auto v : *final_state) w += " " + std::to_string(v);
    w += "\n";
  }
  w += "history:\n" + h.dump();
  return {Verdict::violation, w};
}

}  // namespace

CheckResult check_nrl(const History& h, SpecKind kind, const AbstractState& initial,
                      const std::optional<AbstractState>& final_state) {
  if (kind == SpecKind::exchanger) return check_exchange_pairing(h);
  std::string why;
  if (!h.well_formed(&why)) return {Verdict::violation, "malformed history: " + why};
  std::vector<OpRecord> ops = extract_ops(h);
  if (ops.size() <= kMaxCheckedOps || kind != SpecKind::set) {
    return check_group(ops, kind, initial, final_state, h);
  }

  // Set operations on distinct keys commute; check each key on its own.
  std::map<std::int64_t, std::vector<OpRecord>> by_key;
  for (const auto& r : ops) by_key[r.op.arg].push_back(r);
  for (const auto& [key, group] : by_key) {
    auto member = [key](const AbstractState& s) {
      return std::binary_search(s.begin(), s.end(), key) ? AbstractState{key} : AbstractState{};
    };
    std::optional<AbstractState> fin;
    if (final_state) fin = member(*final_state);
    CheckResult r = check_group(group, kind, member(initial), fin, h);
    if (r.verdict != Verdict::ok) return r;
  }
  return {};
}

namespace {

class Matcher {
 public:
  explicit Matcher(std::vector<OpRecord> ops) : ops_(std::move(ops)), partner_(ops_.size(), kNone) {}

  bool run() { return assign(0); }

  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

 private:
  bool needs_partner(std::size_t i) const {
    return ops_[i].response && *ops_[i].response != Payload::timeout();
  }

  bool compatible(std::size_t i, std::size_t j) const {
    const OpRecord& a = ops_[i];
    const OpRecord& b = ops_[j];
    if (i == j || a.pid == b.pid) return false;
    bool overlap = a.invoke < b.end && b.invoke < a.end;
    auto got = [](const OpRecord& x, const OpRecord& y) {
      if (!x.response) return true;
      return *x.response == Payload::from_raw(y.op.arg);
    };
    return overlap && got(a, b) && got(b, a) && (!a.response || *a.response != Payload::timeout()) &&
           (!b.response || *b.response != Payload::timeout());
  }

  bool assign(std::size_t i) {
    while (i < ops_.size() && (partner_[i] != kNone || !needs_partner(i))) ++i;
    if (i == ops_.size()) return true;
    for (std::size_t j = 0; j < ops_.size(); ++j) {
      if (partner_[j] != kNone || !compatible(i, j)) continue;
      partner_[i] = j;
      partner_[j] = i;
      if (assign(i + 1)) return true;
      partner_[i] = partner_[j] = kNone;
    }
    return false;
  }

  std::vector<OpRecord> ops_;
  std::vector<std::size_t> partner_;
};

}  // namespace

CheckResult check_exchange_pairing(const History& h) {
  std::string why;
  if (!h.well_formed(&why)) return {Verdict::violation, "malformed history: " + why};
  std::vector<OpRecord> ops;
  for (auto& r : extract_ops(h)) {
    if (r.op.code != OpCode::exchange) return {Verdict::violation, "non-exchange operation " + to_string(r.op)};
    if (r.response && !r.response->is_user() && *r.response != Payload::timeout()) {
      return {Verdict::violation, describe(r) + " returned a reserved value\nhistory:\n" + h.dump()};
    }
    ops.push_back(r);
  }
  if (ops.size() > 2 * kMaxCheckedOps) return {Verdict::unchecked, "too many exchanges"};
  Matcher m(ops);
  if (m.run()) return {};
  std::string w = "exchange answers admit no pairing\n";
  for (const auto& r : ops) w += "  " + describe(r) + "\n";
  return {Verdict::violation, w + "history:\n" + h.dump()};
}

}  // namespace nvtrack
