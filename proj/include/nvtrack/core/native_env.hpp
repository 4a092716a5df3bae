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

#include <immintrin.h>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "nvtrack/core/arena.hpp"
#include "nvtrack/core/process.hpp"
#include "nvtrack/core/types.hpp"

namespace nvtrack {

class NativeEnv;

namespace persist {

enum class FlushMethod : std::uint8_t { clwb, clflushopt, fence };

// Chosen once at startup from CPUID; NVTRACK_NO_FLUSH_INSTR=1 forces the fence.
FlushMethod flush_method() noexcept;
const char* flush_method_name(FlushMethod m) noexcept;

namespace detail {
extern void (*flush_fn)(const void*) noexcept;
}

// Writes back the cache line holding addr and orders it before later stores.
inline void flush_line(const void* addr) noexcept { detail::flush_fn(addr); }

}  // namespace persist

class NativeLine {
 public:
  using env_type = NativeEnv;
  NativeLine(NativeEnv&, CacheMode) noexcept {}
};

template <class T>
class NativeCell {
  static_assert(std::is_trivially_copyable_v<T>);

 public:
  NativeCell(NativeLine&, CellRole, T init) noexcept : v_(init) {}
  NativeCell(const NativeCell&) = delete;
  NativeCell& operator=(const NativeCell&) = delete;

  T load() const noexcept { return v_.load(std::memory_order_acquire); }
  void store(T v) noexcept { v_.store(v, std::memory_order_release); }

  // Returns the value observed; the swap happened iff it equals expected.
  T cas_witness(T expected, T desired) noexcept {
    v_.compare_exchange_strong(expected, desired, std::memory_order_acq_rel, std::memory_order_acquire);
    return expected;
  }
  bool cas(T expected, T desired) noexcept {
    return v_.compare_exchange_strong(expected, desired, std::memory_order_acq_rel,
                                      std::memory_order_acquire);
  }

  void flush() const noexcept { persist::flush_line(this); }
  T peek() const noexcept { return v_.load(std::memory_order_relaxed); }

 private:
  std::atomic<T> v_;
};

// Real threads and real atomics. No crash injection.
class NativeEnv {
 public:
  using Line = NativeLine;
  template <class T>
  using Cell = NativeCell<T>;
  using InfoRecord = InfoRecordT<NativeLine>;
  using Process = ProcessCtxT<NativeLine, NativeCell>;
  static constexpr bool kSimulated = false;

  explicit NativeEnv(Pid processes) : processes_(processes) {
    if (processes == 0) throw std::invalid_argument("process count must be positive");
    for (Pid p = 0; p < processes; ++p) {
      slots_.push_back(std::make_unique<PerProcess>(*this, p));
    }
  }

  Pid processes() const noexcept { return processes_; }
  Process& ctx(Pid p) { return slots_[p]->ctx; }

  template <class T, class... Args>
  T* make(Pid p, Args&&... args) {
    return slots_[p]->arena.template make<T>(std::forward<Args>(args)...);
  }

  void begin_op(Pid p) { ctx(p).cp.store(0); }
  void spin_hint(Pid) const noexcept { _mm_pause(); }

  std::uint64_t now(Pid) const noexcept {
    return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                          std::chrono::steady_clock::now().time_since_epoch())
                                          .count());
  }

 private:
  struct PerProcess {
    PerProcess(NativeEnv& env, Pid p) : ctx(env, p) {}
    Process ctx;
    Arena arena;
  };

  Pid processes_;
  std::vector<std::unique_ptr<PerProcess>> slots_;
};

}  // namespace nvtrack
