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
#include <limits>
#include <stdexcept>
#include <string>

namespace nvtrack {

using Pid = std::uint32_t;
using Key = std::int64_t;

inline constexpr Key kMinKey = std::numeric_limits<Key>::min();
inline constexpr Key kMaxKey = std::numeric_limits<Key>::max();

enum class CacheMode : std::uint8_t { durable, volatile_cache };

// Response slot of an Info record: unset (bottom), true or false.
enum class TriBool : std::uint8_t { unset, yes, no };

constexpr TriBool to_tri(bool b) noexcept { return b ? TriBool::yes : TriBool::no; }

// Word-sized opaque value with three reserved sentinels besides bottom.
class Payload {
 public:
  constexpr Payload() noexcept = default;

  static constexpr Payload of(std::int64_t v) {
    if (v < kMinUser) throw std::invalid_argument("payload value collides with a reserved sentinel");
    return Payload(v);
  }
  static constexpr Payload from_bool(bool b) noexcept { return Payload(b ? 1 : 0); }
  static constexpr Payload from_raw(std::int64_t raw) noexcept { return Payload(raw); }

  static constexpr Payload bottom() noexcept { return Payload(kBottom); }
  static constexpr Payload null() noexcept { return Payload(kNull); }
  static constexpr Payload empty() noexcept { return Payload(kEmpty); }
  static constexpr Payload timeout() noexcept { return Payload(kTimeout); }

  constexpr bool is_bottom() const noexcept { return raw_ == kBottom; }
  constexpr bool is_user() const noexcept { return raw_ >= kMinUser; }
  constexpr std::int64_t raw() const noexcept { return raw_; }
  constexpr std::int64_t value() const {
    if (!is_user()) throw std::logic_error("payload holds a sentinel");
    return raw_;
  }

  friend constexpr bool operator==(Payload, Payload) noexcept = default;

  std::string to_string() const {
    switch (raw_) {
      case kBottom: return "_|_";
      case kNull: return "NULL";
      case kEmpty: return "EMPTY";
      case kTimeout: return "TIMEOUT";
      default: return std::to_string(raw_);
    }
  }

  static constexpr std::int64_t kMinUser = std::numeric_limits<std::int64_t>::min() + 4;

 private:
  static constexpr std::int64_t kBottom = std::numeric_limits<std::int64_t>::min();
  static constexpr std::int64_t kNull = kBottom + 1;
  static constexpr std::int64_t kEmpty = kBottom + 2;
  static constexpr std::int64_t kTimeout = kBottom + 3;

  constexpr explicit Payload(std::int64_t raw) noexcept : raw_(raw) {}

  std::int64_t raw_ = kBottom;
};

// Identifies a cell's purpose in access traces. Ignored by the native backend.
enum class CellRole : std::uint8_t {
  generic,
  checkpoint,
  recovery_data,
  info_node,
  info_result,
  list_next,
  list_deleter,
  list_flushed,
  stack_top,
  stack_next,
  stack_pushed,
  stack_popper,
  ex_slot,
  ex_state,
  ex_result,
  ex_partner,
  bst_update,
  bst_child,
};

enum class InfoKind : std::uint8_t { list, stack_cs, exchange, bst_insert, bst_delete };

}  // namespace nvtrack
