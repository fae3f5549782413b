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

// Goal-level intermediate representation of a logic program: procedures,
// goals, variables with produced/nonlocal sets, and determinism tags.

#ifndef DEPAR_IR_HPP_
#define DEPAR_IR_HPP_

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace depar {

enum class VarId : std::int32_t {};
enum class GoalId : std::int32_t {};
enum class SiteId : std::int32_t {};

constexpr std::int32_t to_int(VarId v) { return static_cast<std::int32_t>(v); }
constexpr std::int32_t to_int(GoalId g) { return static_cast<std::int32_t>(g); }
constexpr std::int32_t to_int(SiteId s) { return static_cast<std::int32_t>(s); }

using VarSet = std::set<VarId>;

// Base class of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed program, profile, config or advice text. Syntax errors carry
// a 1-based line/column; structural errors carry a JSON pointer.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what), line_(line), column_(column) {}
  explicit ParseError(const std::string& what) : Error(what) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_ = 0;
  int column_ = 0;
};

class MissingProfileEntry : public Error {
 public:
  explicit MissingProfileEntry(const std::string& what) : Error(what) {}
};

// An internal ordering or consistency invariant was broken upstream.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

enum class Determinism { det, semidet, multi, nondet, failure, erroneous };

std::string_view to_string(Determinism d);
std::optional<Determinism> parse_determinism(std::string_view s);

enum class ArgMode { in, out };

// Identifies one mode of a predicate. Rendered as "name/arity/mode".
struct ProcKey {
  std::string name;
  int arity = 0;
  int mode = 0;

  std::string str() const;
  static std::optional<ProcKey> parse(std::string_view text);
  auto operator<=>(const ProcKey&) const = default;
};

struct Goal;

// Owning, deep-copying pointer used for the single-child goal slots.
template <typename T>
class Box {
 public:
  Box() = default;
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& other)
      : ptr_(other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) {
      ptr_ = other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr;
    }
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }
  explicit operator bool() const { return ptr_ != nullptr; }

 private:
  std::unique_ptr<T> ptr_;
};

struct Unify {
  VarId lhs;
  std::string functor;  // empty for var-var unification
  std::vector<VarId> args;
};

struct Call {
  ProcKey callee;
  std::vector<VarId> args;
  SiteId site;
};

struct HigherOrderCall {
  VarId closure;
  std::vector<VarId> args;
  SiteId site;
};

// Sequential or parallel conjunction.
struct Conj {
  std::vector<Goal> goals;
  bool parallel = false;
};

struct SwitchArm {
  std::string functor;
  std::vector<VarId> binds;  // bound by the deconstruction on arm entry
  Box<Goal> goal;
};

struct Switch {
  VarId var;
  std::vector<SwitchArm> arms;
};

struct IfThenElse {
  Box<Goal> cond;
  Box<Goal> then_goal;
  Box<Goal> else_goal;
};

struct Negation {
  Box<Goal> inner;
};

struct Quantification {
  std::vector<VarId> vars;
  Box<Goal> inner;
};

struct Disjunction {
  std::vector<Goal> goals;
};

using GoalNode = std::variant<Unify, Call, HigherOrderCall, Conj, Switch,
                              IfThenElse, Negation, Quantification, Disjunction>;

struct Goal {
  GoalId id{};
  Determinism det = Determinism::det;
  GoalNode node;
  // For atomic goals: the variables the goal binds, as declared by the
  // program text (or derived from callee modes). Composite goals may also
  // declare a set; validate() checks it against the derived one.
  std::optional<VarSet> declared_produces;

  // Filled in by Program::finalize().
  VarSet produced;
  VarSet nonlocals;

  bool is_atomic() const;
  std::string_view kind_name() const;
};

// Variables mentioned anywhere inside the goal (including nested goals).
VarSet mentioned_vars(const Goal& goal);
const VarSet& produced_vars(const Goal& goal);
// Nonlocal variables the goal uses but does not bind.
VarSet consumed_vars(const Goal& goal);

// Applies fn to goal and every descendant, parents before children.
template <typename Fn>
void for_each_goal(const Goal& goal, Fn&& fn);

struct Variable {
  VarId id;
  std::string name;
};

struct HeadArg {
  VarId var;
  ArgMode mode;
};

struct Procedure {
  ProcKey key;
  Determinism det = Determinism::det;
  std::vector<Variable> vars;
  std::vector<HeadArg> head;
  Goal body;

  std::string var_name(VarId v) const;
};

// Index of a procedure body: goal lookup and parent links.
class GoalIndex {
 public:
  explicit GoalIndex(const Goal& body);

  const Goal* find(GoalId id) const;
  std::optional<GoalId> parent(GoalId id) const;
  // The goal itself followed by its ancestors up to the body.
  std::vector<GoalId> path_to_root(GoalId id) const;

 private:
  void add(const Goal& goal, std::optional<GoalId> parent);

  std::map<GoalId, const Goal*> goals_;
  std::map<GoalId, GoalId> parents_;
};

struct Program {
  std::map<ProcKey, Procedure> procedures;
  std::set<ProcKey> externals;
  ProcKey entry;

  const Procedure* find(const ProcKey& key) const;
  bool is_external(const ProcKey& key) const { return externals.count(key) != 0; }

  // Derives produced/nonlocal sets for every goal. Must be called after the
  // goal trees are built and before any analysis.
  void finalize();
};

struct SiteStats {
  std::uint64_t count = 0;
  double total_cost = 0.0;
};

// Flat profile: per call site, per goal entry counts and per if-then-else
// condition failure counts. Costs are abstract cost units.
struct Profile {
  std::map<SiteId, SiteStats> sites;
  std::map<GoalId, std::uint64_t> goal_counts;
  std::map<GoalId, std::uint64_t> cond_failures;  // keyed by if-then-else id

  const SiteStats* site(SiteId id) const;
  std::optional<std::uint64_t> goal_count(GoalId id) const;
};

// Expected execution count of a goal, from the profile where recorded and
// otherwise derived from its children or call site.
std::optional<std::uint64_t> entry_count(const Goal& goal, const Profile& profile);

// Normalised per-arm probabilities of a switch. Erroneous arms and arms that
// never ran get weight 0. All zero if the switch never ran.
std::vector<double> branch_weights(const Goal& switch_goal, const Profile& profile);

// Probability of the then branch of an if-then-else, or nullopt if the
// if-then-else never ran.
std::optional<double> then_probability(const Goal& ite_goal, const Profile& profile);

// Expected cost per invocation. Unifications cost nothing; a call costs its
// site's average; composite goals weight their children by entry counts.
// Throws MissingProfileEntry for unprofiled call sites.
double goal_cost(const Goal& goal, const Profile& profile);

struct Diagnostic {
  std::optional<GoalId> goal;
  std::string rule;
  std::string message;

  std::string str() const;
  bool operator==(const Diagnostic&) const = default;
};

// Checks structural invariants of a finalized program against its profile.
std::vector<Diagnostic> validate(const Program& program, const Profile& profile);

// ---------------------------------------------------------------------------

template <typename Fn>
void for_each_goal(const Goal& goal, Fn&& fn) {
  fn(goal);
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Conj> || std::is_same_v<T, Disjunction>) {
          for (const Goal& g : node.goals) for_each_goal(g, fn);
        } else if constexpr (std::is_same_v<T, Switch>) {
          for (const SwitchArm& arm : node.arms) for_each_goal(*arm.goal, fn);
        } else if constexpr (std::is_same_v<T, IfThenElse>) {
          for_each_goal(*node.cond, fn);
          for_each_goal(*node.then_goal, fn);
          for_each_goal(*node.else_goal, fn);
        } else if constexpr (std::is_same_v<T, Negation> ||
                             std::is_same_v<T, Quantification>) {
          for_each_goal(*node.inner, fn);
        }
      },
      goal.node);
}

}  // namespace depar

#endif  // DEPAR_IR_HPP_
