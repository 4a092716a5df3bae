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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nvtrack/core/types.hpp"

namespace nvtrack {

enum class OpCode : std::uint8_t { insert, remove, find, push, pop, exchange };

// arg is the key for set operations and the offered value for push/exchange.
struct Op {
  OpCode code = OpCode::find;
  std::int64_t arg = 0;

  friend bool operator==(const Op&, const Op&) = default;
};

std::string to_string(OpCode code);
std::string to_string(const Op& op);
bool is_update(OpCode code) noexcept;

enum class EventType : std::uint8_t { invoke, response, crash, recover_begin, recover_response };

struct Event {
  EventType type = EventType::crash;
  Pid pid = 0;
  Op op{};
  Payload value{};

  friend bool operator==(const Event&, const Event&) = default;
};

class History {
 public:
  void invoke(Pid p, const Op& op) { events_.push_back({EventType::invoke, p, op, Payload::bottom()}); }
  void respond(Pid p, const Op& op, Payload v) { events_.push_back({EventType::response, p, op, v}); }
  void crash() { events_.push_back({EventType::crash, 0, {}, Payload::bottom()}); }
  void recover_begin(Pid p, const Op& op) { events_.push_back({EventType::recover_begin, p, op, Payload::bottom()}); }
  void recover_response(Pid p, const Op& op, Payload v) {
    events_.push_back({EventType::recover_response, p, op, v});
  }

  const std::vector<Event>& events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }

  // Per-pid alternation: invoke, then response or crash-and-recover, and so on.
  bool well_formed(std::string* why = nullptr) const;
  std::string dump() const;

  friend bool operator==(const History&, const History&) = default;

 private:
  std::vector<Event> events_;
};

// One operation with its crash-extended interval [invoke, end]. Pending
// operations never responded; their end is past the last event.
struct OpRecord {
  Pid pid = 0;
  Op op{};
  std::size_t invoke = 0;
  std::size_t end = 0;
  std::optional<Payload> response;
  bool crashed = false;
};

std::vector<OpRecord> extract_ops(const History& h);

}  // namespace nvtrack
