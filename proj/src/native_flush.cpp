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

#include <cpuid.h>
#include <immintrin.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "nvtrack/core/native_env.hpp"

namespace nvtrack::persist {

namespace {

__attribute__((target("clwb"))) void flush_clwb(const void* addr) noexcept {
  _mm_clwb(const_cast<void*>(addr));
  _mm_sfence();
}

__attribute__((target("clflushopt"))) void flush_clflushopt(const void* addr) noexcept {
  _mm_clflushopt(const_cast<void*>(addr));
  _mm_sfence();
}

void flush_fence(const void*) noexcept { std::atomic_thread_fence(std::memory_order_seq_cst); }

FlushMethod detect() noexcept {
  const char* env = std::getenv("NVTRACK_NO_FLUSH_INSTR");
  if (env != nullptr && std::strcmp(env, "1") == 0) {
    std::fprintf(stderr, "nvtrack: warning: NVTRACK_NO_FLUSH_INSTR=1, flush falls back to a full fence\n");
    return FlushMethod::fence;
  }
  unsigned a = 0, b = 0, c = 0, d = 0;
  if (__get_cpuid_count(7, 0, &a, &b, &c, &d) != 0) {
    if ((b & (1U << 24)) != 0) return FlushMethod::clwb;
    if ((b & (1U << 23)) != 0) return FlushMethod::clflushopt;
  }
  std::fprintf(stderr, "nvtrack: warning: no cache-line writeback instruction, flush falls back to a full fence\n");
  return FlushMethod::fence;
}

const FlushMethod kMethod = detect();

void (*pick(FlushMethod m))(const void*) noexcept {
  switch (m) {
    case FlushMethod::clwb: return &flush_clwb;
    case FlushMethod::clflushopt: return &flush_clflushopt;
    case FlushMethod::fence: break;
  }
  return &flush_fence;
}

}  // namespace

namespace detail {
void (*flush_fn)(const void*) noexcept = pick(kMethod);
}

FlushMethod flush_method() noexcept { return kMethod; }

const char* flush_method_name(FlushMethod m) noexcept {
  switch (m) {
    case FlushMethod::clwb: return "clwb+sfence";
    case FlushMethod::clflushopt: return "clflushopt+sfence";
    case FlushMethod::fence: return "fence";
  }
  return "unknown";
}

}  // namespace nvtrack::persist
