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
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nvtrack/core/types.hpp"

namespace nvtrack::bench {

enum class Structure : std::uint8_t { list, list_flush, stack, bst };
enum class Variant : std::uint8_t { base, recoverable };
// wall: native threads, wall-clock time. simulated: the step scheduler,
// one shared-cell access counts as one nanosecond; fully deterministic.
enum class Timing : std::uint8_t { wall, simulated };
enum class Format : std::uint8_t { csv, gnuplot };

std::string to_string(Structure s);
std::string to_string(Variant v);
std::string to_string(Timing t);
std::optional<Structure> parse_structure(const std::string& s);
std::optional<Variant> parse_variant(const std::string& s);
std::optional<Timing> parse_timing(const std::string& s);
std::optional<Format> parse_format(const std::string& s);

struct BenchConfig {
  Structure structure = Structure::list;
  Variant variant = Variant::recoverable;
  unsigned threads = 1;
  std::uint64_t total_ops = 1000000;
  Key key_lo = 1;
  Key key_hi = 500;
  // Share of finds; the rest splits evenly between inserts and deletes
  // (pushes and pops for the stack, which has no find and requires 0).
  unsigned read_pct = 30;
  // Insert (push) operations with random keys before the timed phase.
  std::uint64_t prefill = 250;
  unsigned runs = 10;
  std::uint64_t seed = 42;
  Timing timing = Timing::wall;
  // Keep every response for parity checks.
  bool record = false;
};

// Throws std::invalid_argument naming the offending field.
void validate(const BenchConfig& c);

enum class OpKind : std::uint8_t { find, insert, remove };

struct BenchOp {
  OpKind kind;
  Key key;
};

// The operation stream of one worker. A pure function of (seed, worker).
class OpStream {
 public:
  OpStream(const BenchConfig& c, std::uint64_t worker);
  BenchOp next();

 private:
  std::mt19937_64 rng_;
  std::uniform_int_distribution<Key> key_;
  unsigned read_pct_;
};

// Ops assigned to worker t: an even split, the remainder to the first workers.
std::uint64_t share(const BenchConfig& c, unsigned t);

struct BenchResult {
  BenchConfig config;
  std::vector<double> mops;  // one per run
  double mean = 0;
  double stddev = 0;  // sample standard deviation; 0 for a single run
  // record mode, last run only: responses per worker, in issue order.
  std::vector<std::vector<std::int64_t>> responses;
};

BenchResult run_benchmark(const BenchConfig& c);

// Header always present. Throws std::runtime_error if the stream fails.
void emit_results(std::ostream& out, const std::vector<BenchResult>& results, Format f);

}  // namespace nvtrack::bench
