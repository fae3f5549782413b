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

// Expected production and first-consumption times of shared variables,
// measured from the start of a goal, derived from profile averages.

#ifndef DEPAR_TIMING_HPP_
#define DEPAR_TIMING_HPP_

#include <map>
#include <tuple>
#include <vector>

#include "depar/ir.hpp"

namespace depar {

// Time of first consumption as a function of what runs afterwards:
// T(rest) = base + slope * rest, where rest is the time until the variable
// is consumed by whatever follows. A goal that never consumes the variable
// is {cost, 1}; one that always consumes it is {t, 0}.
struct Affine {
  double base = 0.0;
  double slope = 0.0;

  double at(double rest) const { return base + slope * rest; }
  bool operator==(const Affine&) const = default;
};

// first(rest) followed by second: first.at(second.at(rest)).
Affine compose(const Affine& first, const Affine& second);

enum class EventKind { produce, consume };

struct ProdConsEvent {
  VarId var;
  double time;  // relative to the start of the conjunct
  EventKind kind;

  bool operator==(const ProdConsEvent&) const = default;
};

// Orders by time, then produce before consume, then variable id.
bool event_less(const ProdConsEvent& a, const ProdConsEvent& b);

struct ConjunctTimeline {
  double seq_cost = 0.0;
  std::vector<ProdConsEvent> events;  // sorted with event_less
};

// Timing summary of one conjunct restricted to the variables it shares with
// the other conjuncts of its conjunction.
struct ConjunctInfo {
  double cost = 0.0;
  std::map<VarId, double> produces;
  std::map<VarId, Affine> consumes;
};

// Sequential composition of several conjuncts. Variables produced and
// consumed inside the sequence drop out of its consumes map.
ConjunctInfo sequence(const std::vector<ConjunctInfo>& parts);

class TimingModel {
 public:
  TimingModel(const Program& program, const Profile& profile);

  const Program& program() const { return program_; }
  const Profile& profile() const { return profile_; }

  double cost(const Goal& goal) const { return goal_cost(goal, profile_); }

  // Throws Error if var is not produced by goal.
  double production_time(const Goal& goal, VarId var);

  // Time at which goal first consumes var, treating paths that never consume
  // it as consuming it at the very end of the goal.
  double first_consumption_time(const Goal& goal, VarId var);
  Affine consumption(const Goal& goal, VarId var);

  // Expected cost of cond over its failing executions. Throws Error when
  // the condition never fails.
  double expected_cost_on_failure(const Goal& cond, std::uint64_t failures) const;
  double expected_cost_on_failure(const Goal& ite_goal) const;

  // Per-conjunct info for the variables produced by one conjunct and
  // consumed by a later one.
  std::vector<ConjunctInfo> conjunct_infos(const std::vector<const Goal*>& conjuncts);

  // Each conjunct's events: produces of variables consumed later and
  // consumes of variables produced earlier.
  std::vector<ConjunctTimeline> shared_var_timeline(
      const std::vector<const Goal*>& conjuncts);

  // Procedure whose body contains the call site.
  const Procedure* site_owner(SiteId site) const;

 private:
  struct Context {
    std::vector<ProcKey> stack;
    // Goals on the path to the recursive call site inside a self-recursive
    // callee; branches along it are taken with probability 1.
    const std::vector<GoalId>* steady = nullptr;
  };

  double production(const Goal& goal, VarId var, const Context& ctx);
  Affine consume(const Goal& goal, VarId var, const Context& ctx);
  double call_production(const Goal& goal, const Call& call, VarId var, const Context& ctx);
  Affine call_consumption(const Goal& goal, const Call& call, VarId var, const Context& ctx);
  std::vector<double> arm_weights(const Goal& switch_goal, const Context& ctx) const;
  std::optional<double> then_weight(const Goal& ite_goal, const Context& ctx) const;
  Context enter(const Call& call, const Context& ctx);

  const Program& program_;
  const Profile& profile_;
  std::map<SiteId, const Procedure*> owners_;
  std::map<SiteId, GoalId> site_goals_;
  std::map<ProcKey, GoalIndex> indexes_;
  std::map<SiteId, std::vector<GoalId>> steady_paths_;
  using MemoKey = std::tuple<ProcKey, int, int, int, std::vector<ProcKey>>;
  std::map<MemoKey, Affine> memo_;
};

}  // namespace depar

#endif  // DEPAR_TIMING_HPP_
