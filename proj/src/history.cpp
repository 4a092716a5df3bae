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

#include "nvtrack/harness/history.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace nvtrack {

std::string to_string(OpCode code) {
  switch (code) {
    case OpCode::insert: return "insert";
    case OpCode::remove: return "delete";
    case OpCode::find: return "find";
    case OpCode::push: return "push";
    case OpCode::pop: return "pop";
    case OpCode::exchange: return "exchange";
  }
  return "?";
}

std::string to_string(const Op& op) {
  if (op.code == OpCode::pop) return "pop()";
  return to_string(op.code) + "(" + std::to_string(op.arg) + ")";
}

bool is_update(OpCode code) noexcept { return code != OpCode::find; }

bool History::well_formed(std::string* why) const {
  enum class S { idle, running, crashed, recovering };
  std::unordered_map<Pid, S> state;
  auto fail = [&](std::size_t i, const std::string& msg) {
    if (why != nullptr) *why = "event " + std::to_string(i) + ": " + msg;
    return false;
  };
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    S& s = state[e.pid];
    switch (e.type) {
      case EventType::invoke:
        if (s != S::idle) return fail(i, "invoke while another operation is in flight");
        s = S::running;
        break;
      case EventType::response:
        if (s != S::running) return fail(i, "response without a running invocation");
        s = S::idle;
        break;
      case EventType::crash:
        for (auto& [pid, st] : state) {
          if (st == S::running || st == S::recovering) st = S::crashed;
        }
        break;
      case EventType::recover_begin:
        if (s != S::crashed) return fail(i, "recovery of a process with nothing to recover");
        s = S::recovering;
        break;
      case EventType::recover_response:
        if (s != S::recovering) return fail(i, "recovery response without recovery");
        s = S::idle;
        break;
    }
  }
  return true;
}

std::string History::dump() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    out << i << ": ";
    switch (e.type) {
      case EventType::invoke: out << "p" << e.pid << " invoke " << to_string(e.op); break;
      case EventType::response: out << "p" << e.pid << " response " << e.value.to_string(); break;
      case EventType::crash: out << "CRASH"; break;
      case EventType::recover_begin: out << "p" << e.pid << " recover " << to_string(e.op); break;
      case EventType::recover_response:
        out << "p" << e.pid << " recovered " << e.value.to_string();
        break;
    }
    out << '\n';
  }
  return out.str();
}

std::vector<OpRecord> extract_ops(const History& h) {
  std::vector<OpRecord> ops;
  std::unordered_map<Pid, std::size_t> open;
  const auto& ev = h.events();
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const Event& e = ev[i];
    switch (e.type) {
      case EventType::invoke:
        open[e.pid] = ops.size();
        ops.push_back({e.pid, e.op, i, std::numeric_limits<std::size_t>::max(), std::nullopt, false});
        break;
      case EventType::response:
      case EventType::recover_response: {
        auto it = open.find(e.pid);
        if (it == open.end()) throw std::invalid_argument("history has a response without an invocation");
        ops[it->second].end = i;
        ops[it->second].response = e.value;
        open.erase(it);
        break;
      }
      case EventType::crash:
        for (auto& [pid, idx] : open) ops[idx].crashed = true;
        break;
      case EventType::recover_begin:
        if (open.find(e.pid) == open.end()) throw std::invalid_argument("history recovers an idle process");
        break;
    }
  }
  return ops;
}

}  // namespace nvtrack
