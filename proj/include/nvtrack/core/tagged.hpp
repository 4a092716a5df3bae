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

namespace nvtrack {

// Node reference with a mark bit packed into the low bit.
template <class T>
class MarkedRef {
 public:
  MarkedRef() noexcept = default;
  MarkedRef(T* target, bool mark) noexcept
      : bits_(reinterpret_cast<std::uintptr_t>(target) | static_cast<std::uintptr_t>(mark)) {}

  T* get() const noexcept { return reinterpret_cast<T*>(bits_ & ~std::uintptr_t{1}); }
  bool marked() const noexcept { return (bits_ & 1U) != 0; }
  MarkedRef with_mark(bool mark) const noexcept { return MarkedRef(get(), mark); }
  std::uintptr_t bits() const noexcept { return bits_; }

  friend bool operator==(MarkedRef, MarkedRef) noexcept = default;

 private:
  std::uintptr_t bits_ = 0;
};

enum class UpdateState : std::uint8_t { clean = 0, iflag = 1, dflag = 2, mark = 3 };

// (state, info) pair of a BST internal node, packed into one word.
template <class Info>
class UpdateWord {
 public:
  UpdateWord() noexcept = default;
  UpdateWord(UpdateState state, Info* info) noexcept
      : bits_(reinterpret_cast<std::uintptr_t>(info) | static_cast<std::uintptr_t>(state)) {}

  UpdateState state() const noexcept { return static_cast<UpdateState>(bits_ & 3U); }
  Info* info() const noexcept { return reinterpret_cast<Info*>(bits_ & ~std::uintptr_t{3}); }
  std::uintptr_t bits() const noexcept { return bits_; }

  static UpdateWord from_bits(std::uintptr_t bits) noexcept {
    UpdateWord w;
    w.bits_ = bits;
    return w;
  }

  friend bool operator==(UpdateWord, UpdateWord) noexcept = default;

 private:
  std::uintptr_t bits_ = 0;
};

}  // namespace nvtrack
