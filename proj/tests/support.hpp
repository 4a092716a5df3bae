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
#include <utility>

#include "nvtrack/core/sim_env.hpp"

namespace nvtrack::testing {

// Runs f in direct mode with at most `steps` shared-cell accesses. Returns
// false if the budget ran out first, which stands for a crash at that point.
template <class F>
bool run_for(SimEnv& env, std::uint64_t steps, F&& f) {
  env.set_step_limit(env.total_steps() + steps);
  try {
    std::forward<F>(f)();
  } catch (const StepBudgetExceeded&) {
    env.set_step_limit(0);
    return false;
  }
  env.set_step_limit(0);
  return true;
}

}  // namespace nvtrack::testing
