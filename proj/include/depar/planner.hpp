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

// Choosing how to parallelise one conjunction: which conjuncts to include
// and how to group them into parallel conjuncts.

#ifndef DEPAR_PLANNER_HPP_
#define DEPAR_PLANNER_HPP_

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "depar/ir.hpp"
#include "depar/overlap.hpp"
#include "depar/timing.hpp"

namespace depar {

class NotACandidate : public Error {
 public:
  using Error::Error;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

// Half-open range [begin, end) of conjunct indices.
struct Group {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  auto operator<=>(const Group&) const = default;
};

// Contiguous, order-preserving groups; each group runs sequentially and the
// groups run in parallel.
struct Partition {
  std::vector<Group> groups;

  std::size_t begin() const { return groups.front().begin; }
  std::size_t end() const { return groups.back().end; }
  // "(c1, c2) & c3", 1-based.
  std::string str() const;
  // Throws InvariantViolation unless groups are nonempty and contiguous.
  void check() const;
  auto operator<=>(const Partition&) const = default;
};

// Parses "1,2|3" (1-based conjunct numbers, '|' between groups).
Partition parse_partition(std::string_view text);

// Conjuncts [begin, end) from the first expensive one to the last.
// Throws NotACandidate when fewer than two conjuncts are expensive.
Group select_middle(const std::vector<double>& costs, double expensive_threshold);

// Timeline of each group. A group produces events for variables consumed by
// conjuncts in [group.end, horizon), except the last group, and consumes
// variables produced by earlier groups of the partition.
std::vector<ConjunctTimeline> partition_timelines(const std::vector<ConjunctInfo>& infos,
                                                  const Partition& partition,
                                                  std::size_t horizon);

// Predicted time of the parallel conjunction alone.
double partition_time(const std::vector<ConjunctInfo>& infos, const Partition& partition,
                      const OverheadParams& overheads);

// Conjuncts outside the partition run sequentially before and after it.
double conjunction_time(const std::vector<ConjunctInfo>& infos, const Partition& partition,
                        const OverheadParams& overheads);

struct SearchBudget {
  std::uint64_t prefer_linear_evals = 1000;
  std::uint64_t num_evals = 0;
};

struct SearchOptions {
  bool prune = true;        // skip branches already slower than a complete partition
  bool incremental = true;  // reuse closed groups' state across evaluations
};

struct SearchResult {
  double time = 0.0;
  std::set<Partition> partitions;
};

// Best partitions of conjuncts [span.begin, span.end).
SearchResult find_best_partition(const std::vector<ConjunctInfo>& infos, Group span,
                                 const OverheadParams& overheads, SearchBudget& budget,
                                 SearchOptions options = {});

// Fewest groups, then leftmost boundaries.
const Partition& preferred_partition(const std::set<Partition>& partitions);

// Moves edge groups out of the parallel conjunction while that is faster.
Partition shrink_edges(const std::vector<ConjunctInfo>& infos, const Partition& partition,
                       const OverheadParams& overheads, bool left = true, bool right = true);

// Pulls neighbouring conjuncts in [lo, partition.begin()) into the first group
// and [partition.end(), hi) into the last one while that is strictly faster.
Partition expand_edges(const std::vector<ConjunctInfo>& infos, const Partition& partition,
                       std::size_t lo, std::size_t hi, const OverheadParams& overheads,
                       bool left = true, bool right = true);

// Strongly connected components of the first-order call graph.
class CallGraph {
 public:
  explicit CallGraph(const Program& program);

  int component(const ProcKey& key) const;
  bool same_component(const ProcKey& a, const ProcKey& b) const;
  // Components callees-first.
  const std::vector<std::vector<ProcKey>>& components() const { return components_; }

 private:
  std::map<ProcKey, int> component_of_;
  std::vector<std::vector<ProcKey>> components_;
};

enum class RecursionClass { none, single, multi_clause, doubly, irregular };

std::string_view to_string(RecursionClass c);
std::optional<RecursionClass> parse_recursion_class(std::string_view s);

struct RecursionInfo {
  RecursionClass cls = RecursionClass::none;
  double entries = 0.0;               // E: calls from outside the recursive clique
  std::vector<SiteId> sites;          // recursive call sites in the body
  std::vector<double> counts;         // R_i per site
};

RecursionInfo classify_recursion(const Program& program, const Profile& profile,
                                 const CallGraph& graph, const ProcKey& proc);

// Average recursion depth R_1 / E.
double recursion_depth(const RecursionInfo& info);

// Total saving per outside entry. site_index selects R_i for multi-clause
// recursion. Throws Unsupported for irregular recursion, Error when no
// recursion was observed.
double extrapolated_saving(double seq_saving, const RecursionInfo& info,
                           std::size_t site_index = 0);

// Queue length at which spawning stops.
int throttling_condition(int num_cpus, std::optional<int> override_m = std::nullopt);

struct PlannerParams {
  double expensive_threshold = 1000.0;
  double speedup_threshold = 1.01;
  std::uint64_t eval_budget = 1000;
  OverheadParams overheads = OverheadParams::defaults();
  SearchOptions search;
};

struct Advice {
  ProcKey procedure;
  GoalId goal_id{};
  std::size_t conjunct_count = 0;
  // Original conjunct indices, 0-based, half-open: [0, before_end) runs
  // first, then the groups, then [after_begin, conjunct_count).
  std::size_t before_end = 0;
  std::size_t after_begin = 0;
  std::vector<Group> groups;
  double seq_time = 0.0;
  double par_time = 0.0;
  double speedup = 0.0;
  RecursionClass recursion = RecursionClass::none;
  std::optional<double> extrapolated_saving;
  bool throttle = false;

  // "c1, ((c2, c3) & c4), c5", 1-based.
  std::string form() const;
  bool operator==(const Advice&) const = default;
};

// A conjunction with its runs of zero-cost unifications fused into the next
// conjunct (the previous one at the end).
class ConjunctionModel {
 public:
  ConjunctionModel(TimingModel& timing, const Goal& conj_goal);

  const std::vector<const Goal*>& goals() const { return goals_; }
  // Original index range of each fused conjunct.
  const std::vector<Group>& fused() const { return fused_; }
  const std::vector<ConjunctInfo>& infos() const { return infos_; }
  std::vector<double> costs() const;

  // Maps a partition over fused conjuncts to original indices.
  Partition to_original(const Partition& fused_partition) const;

 private:
  std::vector<const Goal*> goals_;
  std::vector<Group> fused_;
  std::vector<ConjunctInfo> infos_;
};

// Intermediate results of planning one conjunction, for explanations.
struct PlanTrace {
  std::vector<double> costs;  // fused
  std::optional<Group> middle;
  SearchResult search;
  std::uint64_t evals = 0;
  std::optional<Partition> chosen;
  std::optional<Partition> shrunk;
  std::optional<Partition> expanded;
  std::string rejection;  // empty when advice was produced
};

// Returns advice iff the final speedup reaches params.speedup_threshold.
std::optional<Advice> best_parallelisation(TimingModel& timing, const CallGraph& graph,
                                           const Procedure& proc, const Goal& conj_goal,
                                           const PlannerParams& params,
                                           PlanTrace* trace = nullptr);

}  // namespace depar

#endif  // DEPAR_PLANNER_HPP_
