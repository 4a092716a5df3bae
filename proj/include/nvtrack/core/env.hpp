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

#include <type_traits>

#include "nvtrack/core/native_env.hpp"
#include "nvtrack/core/sim_env.hpp"
#include "nvtrack/core/tagged.hpp"
#include "nvtrack/core/types.hpp"

namespace nvtrack {

// Placeholder for a field a variant does without.
struct Unused {
  template <class... Args>
  constexpr explicit Unused(Args&&...) noexcept {}
};

template <bool Present, class T>
using FieldIf = std::conditional_t<Present, T, Unused>;

}  // namespace nvtrack
