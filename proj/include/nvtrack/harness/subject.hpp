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
#include <optional>
#include <string>
#include <vector>

#include "nvtrack/core/sim_env.hpp"
#include "nvtrack/harness/checker.hpp"
#include "nvtrack/harness/history.hpp"
#include "nvtrack/rlist/list.hpp"
#include "nvtrack/rstack/stack.hpp"

namespace nvtrack {

enum class StructureKind : std::uint8_t { list, list_flush, stack, bst, exchanger, timed_exchanger };

std::string to_string(StructureKind k);
std::optional<StructureKind> parse_structure(const std::string& name);
SpecKind spec_of(StructureKind k) noexcept;
std::vector<OpCode> op_codes(StructureKind k);

struct SubjectOptions {
  ListOptions list{};
  StackOptions stack{};
  // Timed exchanger only, in logical steps.
  std::uint64_t exchange_timeout = 16;
};

// A recoverable structure on the simulated backend behind one interface.
class Subject {
 public:
  virtual ~Subject() = default;

  virtual Payload apply(Pid p, const Op& op) = 0;
  virtual Payload recover(Pid p, const Op& op) = 0;

  // Response persisted in the record reachable from RD, or nullopt when the
  // operation persists none (find, timed-out exchange).
  virtual std::optional<Payload> persisted_response(Pid p, const Op& op, Payload response) const = 0;

  virtual AbstractState state() const = 0;
  // Structural soundness at quiescence; empty when sound.
  virtual std::string check_structure() const = 0;
  // Soundness of the image a crash just left behind; empty when sound.
  virtual std::string check_after_crash() const { return {}; }
};

struct SubjectSpec {
  StructureKind kind = StructureKind::list;
  SubjectOptions options{};
};

std::unique_ptr<Subject> make_subject(const SubjectSpec& spec, SimEnv& env);

}  // namespace nvtrack
