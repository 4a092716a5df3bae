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

#include "nvtrack/core/types.hpp"

namespace nvtrack {

// Base of every per-operation recovery record reachable from RD.
template <class Line>
struct InfoRecordT : Line {
  InfoRecordT(typename Line::env_type& env, CacheMode mode, InfoKind k) : Line(env, mode), kind(k) {}
  const InfoKind kind;
};

// Non-volatile private variables of one process. Always durable.
template <class Line, template <class> class Cell>
struct alignas(64) ProcessCtxT : Line {
  using Info = InfoRecordT<Line>;

  ProcessCtxT(typename Line::env_type& env, Pid id)
      : Line(env, CacheMode::durable),
        pid(id),
        cp(*this, CellRole::checkpoint, 0),
        rd(*this, CellRole::recovery_data, nullptr) {}

  const Pid pid;
  Cell<std::uint64_t> cp;
  Cell<Info*> rd;
};

}  // namespace nvtrack
