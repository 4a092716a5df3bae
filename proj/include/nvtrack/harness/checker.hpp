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

#include "nvtrack/harness/history.hpp"

namespace nvtrack {

enum class SpecKind : std::uint8_t { set, stack, exchanger };

// Set: sorted keys. Stack: values from top to bottom. Exchanger: unused.
using AbstractState = std::vector<std::int64_t>;

// Sequential oracles.
struct SequentialSpec {
  // Applies op and returns the response it must produce.
  static Payload apply(SpecKind kind, AbstractState& state, const Op& op);
};

enum class Verdict : std::uint8_t { ok, violation, unchecked };

std::string to_string(Verdict v);

struct CheckResult {
  Verdict verdict = Verdict::ok;
  std::string witness;
};

inline constexpr std::size_t kMaxCheckedOps = 24;

// Searches for a linearization of the crash-extended intervals. Pending
// operations may be linearized with any response or left out. When
// final_state is given, the linearization must end in it.
CheckResult check_nrl(const History& h, SpecKind kind, const AbstractState& initial = {},
                      const std::optional<AbstractState>& final_state = std::nullopt);

// Every answered exchange is matched with a distinct operation of another
// process whose interval overlaps and whose value it received, and vice
// versa. TIMEOUT answers are unmatched.
CheckResult check_exchange_pairing(const History& h);

}  // namespace nvtrack
