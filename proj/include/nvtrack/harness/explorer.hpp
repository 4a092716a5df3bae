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
#include <functional>
#include <string>
#include <vector>

#include "nvtrack/harness/runner.hpp"

namespace nvtrack {

struct ExploreLimits {
  // Context switches away from a process that could keep running. Switches
  // at operation boundaries, busy-wait re-reads and after crashes are free.
  std::size_t preemption_bound = 2;
  std::size_t max_crashes = 1;
  // Stop after this many runs; 0 means run to exhaustion.
  std::uint64_t max_runs = 0;
};

// Depth-first enumeration of every decision sequence within the limits:
// which process takes the next step, and whether to crash before it.
class DfsChooser final : public Chooser {
 public:
  explicit DfsChooser(ExploreLimits limits) : limits_(limits) {}

  Decision choose(const ChoicePoint& point) override;
  // Prepares the next unexplored sequence; false once the tree is exhausted.
  bool advance();

  std::size_t depth() const noexcept { return frames_.size(); }

 private:
  struct Frame {
    std::vector<Decision> options;
    std::vector<bool> preempts;
    std::size_t index = 0;
  };

  ExploreLimits limits_;
  std::vector<Frame> frames_;
  std::size_t pos_ = 0;
  std::size_t preemptions_ = 0;
};

struct ExploreStats {
  std::uint64_t runs = 0;
  std::uint64_t ok = 0;
  std::uint64_t violations = 0;
  std::uint64_t inconclusive = 0;
  std::uint64_t unchecked = 0;
  std::uint64_t strict_violations = 0;
  std::uint64_t structure_errors = 0;
  std::uint64_t with_crash = 0;
  bool exhausted = false;
  std::vector<std::string> witnesses;  // first few only

  void merge(const ExploreStats& o);
  std::string summary() const;
};

// Receives every run with its verdict; used for scenario-specific properties.
using RunVisitor = std::function<void(const RunOutcome&, const RunVerdict&)>;

ExploreStats explore_exhaustive(const SubjectSpec& spec, const Workload& w, const RunConfig& cfg,
                                const ExploreLimits& limits, const RunVisitor& visit = {});

ExploreStats explore_random(const SubjectSpec& spec, const Workload& w, const RunConfig& cfg,
                            std::uint64_t samples, std::uint64_t seed, double crash_probability,
                            std::size_t max_crashes, const RunVisitor& visit = {});

// Small workloads that exercise the interesting races of each structure.
std::vector<Workload> standard_workloads(StructureKind kind, Pid pids, std::size_t ops_per_pid);
// Seeded random workloads over a tiny key/value domain.
std::vector<Workload> random_workloads(StructureKind kind, Pid pids, std::size_t ops_per_pid, std::size_t count,
                                       std::uint64_t seed);

}  // namespace nvtrack
