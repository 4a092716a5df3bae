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

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "nvtrack/bench/bench.hpp"
#include "nvtrack/core/native_env.hpp"
#include "nvtrack/harness/explorer.hpp"

namespace {

using namespace nvtrack;

struct BenchArgs {
  std::string structure = "list";
  std::vector<std::string> variants{"recoverable"};
  std::vector<unsigned> threads{1};
  std::uint64_t ops = 1000000;
  Key key_lo = 1;
  Key key_hi = 500;
  unsigned read_pct = 30;
  std::uint64_t prefill = 250;
  unsigned runs = 10;
  std::uint64_t seed = 42;
  std::string format = "csv";
  std::string timing = "wall";
  std::string output;
};

int run_bench(const BenchArgs& a, bool read_pct_given) {
  bench::BenchConfig base;
  auto s = bench::parse_structure(a.structure);
  auto fmt = bench::parse_format(a.format);
  auto timing = bench::parse_timing(a.timing);
  if (!s) throw std::invalid_argument("unknown structure '" + a.structure + "'");
  if (!fmt) throw std::invalid_argument("unknown format '" + a.format + "'");
  if (!timing) throw std::invalid_argument("unknown timing '" + a.timing + "'");
  base.structure = *s;
  base.total_ops = a.ops;
  base.key_lo = a.key_lo;
  base.key_hi = a.key_hi;
  base.read_pct = *s == bench::Structure::stack && !read_pct_given ? 0 : a.read_pct;
  base.prefill = a.prefill;
  base.runs = a.runs;
  base.seed = a.seed;
  base.timing = *timing;

  std::vector<bench::BenchConfig> configs;
  for (const auto& vname : a.variants) {
    auto v = bench::parse_variant(vname);
    if (!v) throw std::invalid_argument("unknown variant '" + vname + "'");
    for (unsigned t : a.threads) {
      bench::BenchConfig c = base;
      c.variant = *v;
      c.threads = t;
      bench::validate(c);
      configs.push_back(c);
    }
  }
  if (*timing == bench::Timing::wall) {
    std::fprintf(stderr, "flush: %s\n", persist::flush_method_name(persist::flush_method()));
  }

  std::vector<bench::BenchResult> results;
  for (const auto& c : configs) results.push_back(bench::run_benchmark(c));

  if (a.output.empty()) {
    bench::emit_results(std::cout, results, *fmt);
  } else {
    std::ofstream f(a.output);
    if (!f) throw std::runtime_error("cannot open " + a.output);
    bench::emit_results(f, results, *fmt);
  }
  return 0;
}

struct VerifyArgs {
  std::string structure = "list";
  Pid pids = 2;
  std::size_t ops_per_pid = 2;
  std::size_t max_crashes = 1;
  bool exhaustive = false;
  std::uint64_t samples = 0;
  std::uint64_t seed = 42;
  std::size_t preemption_bound = 2;
  std::size_t workloads = 4;
  double crash_probability = 0.05;
  bool crash_when_idle = false;
  std::string junit;
};

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

int run_verify(const VerifyArgs& a) {
  auto kind = parse_structure(a.structure);
  if (!kind) throw std::invalid_argument("unknown structure '" + a.structure + "'");
  if (a.pids < 1 || a.pids > 3) throw std::invalid_argument("pids must be in [1,3]");
  if (a.ops_per_pid < 1 || a.ops_per_pid > 3) throw std::invalid_argument("ops-per-pid must be in [1,3]");
  if (a.max_crashes > 2) throw std::invalid_argument("max-crashes must be at most 2");
  if (a.exhaustive == (a.samples > 0)) throw std::invalid_argument("choose exactly one of --exhaustive and --samples");

  SubjectSpec spec{*kind, {}};
  std::vector<Workload> ws = a.pids == 2 && a.ops_per_pid == 2
                                 ? standard_workloads(*kind, a.pids, a.ops_per_pid)
                                 : random_workloads(*kind, a.pids, a.ops_per_pid, a.workloads, a.seed);
  RunConfig cfg;
  cfg.crash_when_idle = a.crash_when_idle;

  struct Case {
    std::string name;
    ExploreStats stats;
  };
  std::vector<Case> cases;
  std::uint64_t failures = 0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    ExploreStats st;
    if (a.exhaustive) {
      ExploreLimits lim;
      lim.preemption_bound = a.preemption_bound;
      lim.max_crashes = a.max_crashes;
      st = explore_exhaustive(spec, ws[i], cfg, lim);
    } else {
      st = explore_random(spec, ws[i], cfg, a.samples, a.seed + i, a.crash_probability, a.max_crashes);
    }
    std::cout << (st.violations == 0 ? "PASS " : "FAIL ") << ws[i].describe() << " | " << st.summary() << "\n";
    for (const auto& w : st.witnesses) std::cout << "--- witness ---\n" << w << "\n";
    if (st.violations != 0) ++failures;
    cases.push_back({ws[i].describe(), std::move(st)});
  }

  if (!a.junit.empty()) {
    std::ofstream x(a.junit);
    if (!x) throw std::runtime_error("cannot open " + a.junit);
    x << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<testsuite name=\"verify." << xml_escape(a.structure) << "\" tests=\"" << cases.size()
      << "\" failures=\"" << failures << "\">\n";
    for (const auto& c : cases) {
      x << "  <testcase classname=\"nvtrack.verify." << xml_escape(a.structure) << "\" name=\""
        << xml_escape(c.name) << "\">\n";
      x << "    <system-out>" << xml_escape(c.stats.summary()) << "</system-out>\n";
      if (c.stats.violations != 0) {
        x << "    <failure message=\"" << c.stats.violations << " violating runs\">";
        for (const auto& w : c.stats.witnesses) x << xml_escape(w) << "\n";
        x << "</failure>\n";
      }
      x << "  </testcase>\n";
    }
    x << "</testsuite>\n";
    if (!x) throw std::runtime_error("failed to write " + a.junit);
  }
  std::cout << (failures == 0 ? "verify: PASS" : "verify: FAIL") << " (" << cases.size() << " workloads, "
            << failures << " failing)\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nvtrack: recoverable lock-free structures, crash verifier and benchmark"};
  app.require_subcommand(1);

  BenchArgs b;
  auto* bench_cmd = app.add_subcommand("bench", "Throughput benchmark");
  bench_cmd->add_option("--structure", b.structure, "list, list-flush, stack or bst")->capture_default_str();
  bench_cmd->add_option("--variant", b.variants, "base and/or recoverable")->capture_default_str();
  bench_cmd->add_option("--threads", b.threads, "Worker threads; several values give several rows")
      ->capture_default_str();
  bench_cmd->add_option("--ops", b.ops, "Operations per run, across all threads")->capture_default_str();
  bench_cmd->add_option("--key-lo", b.key_lo)->capture_default_str();
  bench_cmd->add_option("--key-hi", b.key_hi)->capture_default_str();
  auto* read_opt = bench_cmd->add_option("--read-pct", b.read_pct, "Percentage of finds (stack: 0)")
                       ->capture_default_str();
  bench_cmd->add_option("--prefill", b.prefill, "Inserts before timing starts")->capture_default_str();
  bench_cmd->add_option("--runs", b.runs)->capture_default_str();
  bench_cmd->add_option("--seed", b.seed)->capture_default_str();
  bench_cmd->add_option("--format", b.format, "csv or gnuplot")->capture_default_str();
  bench_cmd->add_option("--timing", b.timing, "wall or simulated (deterministic step count)")
      ->capture_default_str();
  bench_cmd->add_option("--output", b.output, "Write results here instead of stdout");

  VerifyArgs v;
  auto* verify_cmd = app.add_subcommand("verify", "Crash-injection verification on the simulated backend");
  verify_cmd->add_option("--structure", v.structure, "list, list-flush, stack, bst, exchanger or timed-exchanger")
      ->capture_default_str();
  verify_cmd->add_option("--pids", v.pids)->capture_default_str();
  verify_cmd->add_option("--ops-per-pid", v.ops_per_pid)->capture_default_str();
  verify_cmd->add_option("--max-crashes", v.max_crashes)->capture_default_str();
  verify_cmd->add_flag("--exhaustive", v.exhaustive, "Enumerate every schedule within the bounds");
  verify_cmd->add_option("--samples", v.samples, "Random schedules per workload");
  verify_cmd->add_option("--seed", v.seed)->capture_default_str();
  verify_cmd->add_option("--preemption-bound", v.preemption_bound)->capture_default_str();
  verify_cmd->add_option("--workloads", v.workloads, "Random workloads when not 2 pids x 2 ops")
      ->capture_default_str();
  verify_cmd->add_option("--crash-probability", v.crash_probability, "Per-step crash chance when sampling")
      ->capture_default_str();
  verify_cmd->add_flag("--crash-when-idle", v.crash_when_idle, "Also crash between operations");
  verify_cmd->add_option("--junit", v.junit, "Write a JUnit XML report to this file");

  CLI11_PARSE(app, argc, argv);
  try {
    if (bench_cmd->parsed()) return run_bench(b, read_opt->count() > 0);
    return run_verify(v);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
