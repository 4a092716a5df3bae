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
#include <memory>
#include <new>
#include <type_traits>
#include <utility>
#include <vector>

namespace nvtrack {

// Bump allocator owned by one process. Nothing is freed before the arena
// itself is destroyed, so references held across crashes stay valid.
class Arena {
 public:
  explicit Arena(std::size_t first_chunk = 16 * 1024) : next_chunk_(first_chunk) {}
  Arena(const Arena&) = delete;
  Arena& operator=(const Arena&) = delete;

  ~Arena() {
    for (auto it = dtors_.rbegin(); it != dtors_.rend(); ++it) it->fn(it->obj);
    for (auto& c : chunks_) ::operator delete(c.base, std::align_val_t{kChunkAlign});
  }

  template <class T, class... Args>
  T* make(Args&&... args) {
    void* mem = allocate(sizeof(T), alignof(T));
    T* obj = ::new (mem) T(std::forward<Args>(args)...);
    if constexpr (!std::is_trivially_destructible_v<T>) {
      dtors_.push_back({[](void* p) { static_cast<T*>(p)->~T(); }, obj});
    }
    return obj;
  }

  std::size_t bytes_used() const noexcept { return used_; }

 private:
  static constexpr std::size_t kChunkAlign = 64;

  struct Chunk {
    std::byte* base;
    std::size_t size;
  };
  struct Dtor {
    void (*fn)(void*);
    void* obj;
  };

  void* allocate(std::size_t size, std::size_t align) {
    std::size_t offset = (offset_ + align - 1) & ~(align - 1);
    if (chunks_.empty() || offset + size > chunks_.back().size) {
      std::size_t want = next_chunk_;
      while (want < size + align) want *= 2;
      auto* base = static_cast<std::byte*>(::operator new(want, std::align_val_t{kChunkAlign}));
      chunks_.push_back({base, want});
      if (next_chunk_ < (std::size_t{1} << 24)) next_chunk_ *= 2;
      offset = 0;
    }
    offset_ = offset + size;
    used_ += size;
    return chunks_.back().base + offset;
  }

  std::vector<Chunk> chunks_;
  std::vector<Dtor> dtors_;
  std::size_t offset_ = 0;
  std::size_t next_chunk_;
  std::size_t used_ = 0;
};

}  // namespace nvtrack
