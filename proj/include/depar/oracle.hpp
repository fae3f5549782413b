// Copyright 2026 The depar Authors. All rights reserved.
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

// Independent checks for the predictor: exhaustive partition search and an
// event-driven simulation of sparks, futures and barriers.

#ifndef DEPAR_ORACLE_HPP_
#define DEPAR_ORACLE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "depar/overlap.hpp"
#include "depar/planner.hpp"

namespace depar {

// All 2^(n-1) partitions of conjuncts [0, n). Requires 1 <= n <= 20.
std::vector<Partition> enumerate_partitions(std::size_t n);

// Exact best partitions of the span, evaluating every candidate from scratch.
SearchResult brute_force_best(const std::vector<ConjunctInfo>& infos, Group span,
                              const OverheadParams& overheads);

enum class SimEventKind {
  spawn_spark,
  start_conjunct,
  signal,
  wait,
  wake,
  barrier_arrive,
  finish,
};

std::string_view to_string(SimEventKind kind);

struct SimEvent {
  double time = 0.0;
  SimEventKind kind = SimEventKind::finish;
  int conjunct = 0;  // 1-based; 0 for whole-conjunction events
  std::optional<VarId> var;
  int engine = -1;
};

struct SimResult {
  double makespan = 0.0;
  std::vector<double> conjunct_end;
  std::vector<SimEvent> trace;

  // One event per line: "<time> <kind> c<i> [V<var>] [e<engine>]".
  std::string trace_text() const;
};

// Runs the conjuncts of a parallel conjunction. The first conjunct runs in
// the entering context, which spawns the rest as a chain of sparks. Sparks
// are taken FIFO by idle engines; runnable contexts are preferred over
// sparks. num_engines = nullopt means one engine per conjunct.
SimResult simulate_execution(const std::vector<ConjunctTimeline>& conjuncts,
                             const OverheadParams& overheads,
                             std::optional<int> num_engines = std::nullopt);

// Formats a cost for reports and traces: integers without a fraction,
// otherwise the shortest round-trip representation.
std::string format_cost(double value);

}  // namespace depar

#endif  // DEPAR_ORACLE_HPP_
