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

#include "depar/ir.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <sstream>

namespace depar {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

VarSet set_union(const VarSet& a, const VarSet& b) {
  VarSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

VarSet set_intersection(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.end()));
  return out;
}

VarSet set_difference(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::inserter(out, out.end()));
  return out;
}

// Variables an atomic goal (or the switch test itself) mentions directly.
VarSet direct_vars(const Goal& goal) {
  VarSet vars;
  std::visit(overloaded{
                 [&](const Unify& u) {
                   vars.insert(u.lhs);
                   vars.insert(u.args.begin(), u.args.end());
                 },
                 [&](const Call& c) { vars.insert(c.args.begin(), c.args.end()); },
                 [&](const HigherOrderCall& c) {
                   vars.insert(c.closure);
                   vars.insert(c.args.begin(), c.args.end());
                 },
                 [&](const Switch& s) { vars.insert(s.var); },
                 [](const auto&) {},
             },
             goal.node);
  return vars;
}

using Occurrences = std::map<VarId, int>;

void add_occurrences(Occurrences& into, const Occurrences& from) {
  for (const auto& [v, n] : from) into[v] += n;
}

class Annotator {
 public:
  Annotator(const Program& program, const Procedure& proc)
      : program_(program) {
    for (const HeadArg& arg : proc.head) total_[arg.var] += 1;
  }

  // First pass: total occurrence counts across the procedure.
  void count(const Goal& goal) {
    for_each_goal(goal, [&](const Goal& g) {
      for (VarId v : direct_vars(g)) total_[v] += 1;
      if (const auto* sw = std::get_if<Switch>(&g.node)) {
        for (const SwitchArm& arm : sw->arms) {
          for (VarId v : arm.binds) total_[v] += 1;
        }
      }
    });
  }

  // Second pass: post-order derivation of nonlocal and produced sets.
  Occurrences annotate(Goal& goal) {
    Occurrences sub;
    for (VarId v : direct_vars(goal)) sub[v] += 1;

    std::visit(
        overloaded{
            [&](Conj& c) {
              for (Goal& g : c.goals) add_occurrences(sub, annotate(g));
            },
            [&](Disjunction& d) {
              for (Goal& g : d.goals) add_occurrences(sub, annotate(g));
            },
            [&](Switch& s) {
              for (SwitchArm& arm : s.arms) {
                for (VarId v : arm.binds) sub[v] += 1;
                add_occurrences(sub, annotate(*arm.goal));
              }
            },
            [&](IfThenElse& ite) {
              add_occurrences(sub, annotate(*ite.cond));
              add_occurrences(sub, annotate(*ite.then_goal));
              add_occurrences(sub, annotate(*ite.else_goal));
            },
            [&](Negation& n) { add_occurrences(sub, annotate(*n.inner)); },
            [&](Quantification& q) { add_occurrences(sub, annotate(*q.inner)); },
            [](auto&) {},
        },
        goal.node);

    goal.nonlocals.clear();
    for (const auto& [v, n] : sub) {
      if (n < total_[v]) goal.nonlocals.insert(v);
    }
    goal.produced = derive_produced(goal);
    return sub;
  }

 private:
  VarSet derive_produced(const Goal& goal) const {
    return std::visit(
        overloaded{
            [&](const Unify&) { return goal.declared_produces.value_or(VarSet{}); },
            [&](const HigherOrderCall&) {
              return goal.declared_produces.value_or(VarSet{});
            },
            [&](const Call& c) {
              if (goal.declared_produces) return *goal.declared_produces;
              VarSet out;
              if (const Procedure* callee = program_.find(c.callee)) {
                for (std::size_t i = 0; i < c.args.size() && i < callee->head.size(); ++i) {
                  if (callee->head[i].mode == ArgMode::out) out.insert(c.args[i]);
                }
              }
              return out;
            },
            [&](const Conj& c) {
              VarSet out;
              for (const Goal& g : c.goals) out.insert(g.produced.begin(), g.produced.end());
              return set_intersection(out, goal.nonlocals);
            },
            [&](const Switch& s) {
              std::optional<VarSet> out;
              for (const SwitchArm& arm : s.arms) {
                if (arm.goal->det == Determinism::erroneous) continue;
                out = out ? set_intersection(*out, arm.goal->produced) : arm.goal->produced;
              }
              return set_intersection(out.value_or(VarSet{}), goal.nonlocals);
            },
            [&](const IfThenElse& ite) {
              VarSet then_side = set_union(ite.cond->produced, ite.then_goal->produced);
              VarSet out;
              if (ite.else_goal->det == Determinism::erroneous) {
                out = then_side;
              } else {
                out = set_intersection(then_side, ite.else_goal->produced);
              }
              return set_intersection(out, goal.nonlocals);
            },
            [&](const Quantification& q) {
              VarSet bound(q.vars.begin(), q.vars.end());
              return set_intersection(set_difference(q.inner->produced, bound),
                                      goal.nonlocals);
            },
            // Negated goals and disjunctions never bind visible variables.
            [](const Negation&) { return VarSet{}; },
            [](const Disjunction&) { return VarSet{}; },
        },
        goal.node);
  }

  const Program& program_;
  Occurrences total_;
};

}  // namespace

std::string_view to_string(Determinism d) {
  switch (d) {
    case Determinism::det: return "det";
    case Determinism::semidet: return "semidet";
    case Determinism::multi: return "multi";
    case Determinism::nondet: return "nondet";
    case Determinism::failure: return "failure";
    case Determinism::erroneous: return "erroneous";
  }
  return "?";
}

std::optional<Determinism> parse_determinism(std::string_view s) {
  for (Determinism d : {Determinism::det, Determinism::semidet, Determinism::multi,
                        Determinism::nondet, Determinism::failure,
                        Determinism::erroneous}) {
    if (to_string(d) == s) return d;
  }
  return std::nullopt;
}

std::string ProcKey::str() const {
  return name + "/" + std::to_string(arity) + "/" + std::to_string(mode);
}

std::optional<ProcKey> ProcKey::parse(std::string_view text) {
  auto last = text.rfind('/');
  if (last == std::string_view::npos || last == 0) return std::nullopt;
  auto mid = text.rfind('/', last - 1);
  if (mid == std::string_view::npos || mid == 0) return std::nullopt;
  ProcKey key;
  key.name = std::string(text.substr(0, mid));
  auto parse_int = [](std::string_view s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size() && out >= 0;
  };
  if (!parse_int(text.substr(mid + 1, last - mid - 1), key.arity)) return std::nullopt;
  if (!parse_int(text.substr(last + 1), key.mode)) return std::nullopt;
  return key;
}

bool Goal::is_atomic() const {
  return std::holds_alternative<Unify>(node) || std::holds_alternative<Call>(node) ||
         std::holds_alternative<HigherOrderCall>(node);
}

std::string_view Goal::kind_name() const {
  return std::visit(overloaded{
                        [](const Unify&) { return std::string_view("unify"); },
                        [](const Call&) { return std::string_view("call"); },
                        [](const HigherOrderCall&) { return std::string_view("ho_call"); },
                        [](const Conj& c) {
                          return c.parallel ? std::string_view("par_conj")
                                            : std::string_view("conj");
                        },
                        [](const Switch&) { return std::string_view("switch"); },
                        [](const IfThenElse&) { return std::string_view("ite"); },
                        [](const Negation&) { return std::string_view("not"); },
                        [](const Quantification&) { return std::string_view("some"); },
                        [](const Disjunction&) { return std::string_view("disj"); },
                    },
                    node);
}

VarSet mentioned_vars(const Goal& goal) {
  VarSet vars;
  for_each_goal(goal, [&](const Goal& g) {
    VarSet d = direct_vars(g);
    vars.insert(d.begin(), d.end());
    if (const auto* sw = std::get_if<Switch>(&g.node)) {
      for (const SwitchArm& arm : sw->arms) vars.insert(arm.binds.begin(), arm.binds.end());
    }
  });
  return vars;
}

const VarSet& produced_vars(const Goal& goal) { return goal.produced; }

VarSet consumed_vars(const Goal& goal) {
  return set_difference(goal.nonlocals, goal.produced);
}

std::string Procedure::var_name(VarId v) const {
  for (const Variable& var : vars) {
    if (var.id == v) return var.name;
  }
  return "V" + std::to_string(to_int(v));
}

GoalIndex::GoalIndex(const Goal& body) { add(body, std::nullopt); }

void GoalIndex::add(const Goal& goal, std::optional<GoalId> parent) {
  goals_.emplace(goal.id, &goal);
  if (parent) parents_.emplace(goal.id, *parent);
  std::visit(overloaded{
                 [&](const Conj& c) {
                   for (const Goal& g : c.goals) add(g, goal.id);
                 },
                 [&](const Disjunction& d) {
                   for (const Goal& g : d.goals) add(g, goal.id);
                 },
                 [&](const Switch& s) {
                   for (const SwitchArm& arm : s.arms) add(*arm.goal, goal.id);
                 },
                 [&](const IfThenElse& ite) {
                   add(*ite.cond, goal.id);
                   add(*ite.then_goal, goal.id);
                   add(*ite.else_goal, goal.id);
                 },
                 [&](const Negation& n) { add(*n.inner, goal.id); },
                 [&](const Quantification& q) { add(*q.inner, goal.id); },
                 [](const auto&) {},
             },
             goal.node);
}

const Goal* GoalIndex::find(GoalId id) const {
  auto it = goals_.find(id);
  return it == goals_.end() ? nullptr : it->second;
}

std::optional<GoalId> GoalIndex::parent(GoalId id) const {
  auto it = parents_.find(id);
  if (it == parents_.end()) return std::nullopt;
  return it->second;
}

std::vector<GoalId> GoalIndex::path_to_root(GoalId id) const {
  std::vector<GoalId> path{id};
  while (auto p = parent(path.back())) path.push_back(*p);
  return path;
}

const Procedure* Program::find(const ProcKey& key) const {
  auto it = procedures.find(key);
  return it == procedures.end() ? nullptr : &it->second;
}

void Program::finalize() {
  for (auto& [key, proc] : procedures) {
    Annotator annotator(*this, proc);
    annotator.count(proc.body);
    annotator.annotate(proc.body);
  }
}

const SiteStats* Profile::site(SiteId id) const {
  auto it = sites.find(id);
  return it == sites.end() ? nullptr : &it->second;
}

std::optional<std::uint64_t> Profile::goal_count(GoalId id) const {
  auto it = goal_counts.find(id);
  if (it == goal_counts.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint64_t> entry_count(const Goal& goal, const Profile& profile) {
  if (auto recorded = profile.goal_count(goal.id)) return recorded;
  auto max_of = [&](const std::vector<Goal>& goals) -> std::optional<std::uint64_t> {
    std::optional<std::uint64_t> best;
    for (const Goal& g : goals) {
      if (auto n = entry_count(g, profile)) best = std::max(best.value_or(0), *n);
    }
    return best;
  };
  return std::visit(
      overloaded{
          [](const Unify&) -> std::optional<std::uint64_t> { return std::nullopt; },
          [&](const Call& c) -> std::optional<std::uint64_t> {
            if (const SiteStats* s = profile.site(c.site)) return s->count;
            return std::nullopt;
          },
          [&](const HigherOrderCall& c) -> std::optional<std::uint64_t> {
            if (const SiteStats* s = profile.site(c.site)) return s->count;
            return std::nullopt;
          },
          [&](const Conj& c) { return max_of(c.goals); },
          [&](const Disjunction& d) -> std::optional<std::uint64_t> {
            if (d.goals.empty()) return std::nullopt;
            return entry_count(d.goals.front(), profile);
          },
          [&](const Switch& s) -> std::optional<std::uint64_t> {
            std::uint64_t sum = 0;
            for (const SwitchArm& arm : s.arms) {
              auto n = entry_count(*arm.goal, profile);
              if (!n) return std::nullopt;
              sum += *n;
            }
            return sum;
          },
          [&](const IfThenElse& ite) { return entry_count(*ite.cond, profile); },
          [&](const Negation& n) { return entry_count(*n.inner, profile); },
          [&](const Quantification& q) { return entry_count(*q.inner, profile); },
      },
      goal.node);
}

std::vector<double> branch_weights(const Goal& switch_goal, const Profile& profile) {
  const auto& sw = std::get<Switch>(switch_goal.node);
  std::vector<double> weights;
  double total = 0.0;
  for (const SwitchArm& arm : sw.arms) {
    double w = 0.0;
    if (arm.goal->det != Determinism::erroneous) {
      auto n = entry_count(*arm.goal, profile);
      if (!n) {
        throw MissingProfileEntry("no entry count for switch arm goal " +
                                  std::to_string(to_int(arm.goal->id)));
      }
      w = static_cast<double>(*n);
    }
    weights.push_back(w);
    total += w;
  }
  if (total > 0.0) {
    for (double& w : weights) w /= total;
  }
  return weights;
}

namespace {

std::uint64_t ite_failures(const Goal& ite_goal, const IfThenElse& ite,
                           const Profile& profile) {
  auto it = profile.cond_failures.find(ite_goal.id);
  if (it != profile.cond_failures.end()) return it->second;
  if (auto n = profile.goal_count(ite.else_goal->id)) return *n;
  return 0;
}

}  // namespace

std::optional<double> then_probability(const Goal& ite_goal, const Profile& profile) {
  const auto& ite = std::get<IfThenElse>(ite_goal.node);
  auto entries = entry_count(ite_goal, profile);
  if (!entries) {
    throw MissingProfileEntry("no entry count for if-then-else goal " +
                              std::to_string(to_int(ite_goal.id)));
  }
  if (*entries == 0) return std::nullopt;
  std::uint64_t failures = std::min(ite_failures(ite_goal, ite, profile), *entries);
  return static_cast<double>(*entries - failures) / static_cast<double>(*entries);
}

namespace {

// Weight of one child of a conjunction or disjunction: its share of the
// parent's executions, or 1 if either count is unknown.
double child_weight(const Goal& child, std::optional<std::uint64_t> parent_count,
                    const Profile& profile) {
  if (!parent_count || *parent_count == 0) return 1.0;
  auto n = entry_count(child, profile);
  if (!n) return 1.0;
  return static_cast<double>(*n) / static_cast<double>(*parent_count);
}

}  // namespace

double goal_cost(const Goal& goal, const Profile& profile) {
  auto site_cost = [&](SiteId site) {
    const SiteStats* s = profile.site(site);
    if (s == nullptr) {
      throw MissingProfileEntry("no profile entry for call site " +
                                std::to_string(to_int(site)));
    }
    if (s->count == 0) return 0.0;
    return s->total_cost / static_cast<double>(s->count);
  };
  auto weighted_sum = [&](const std::vector<Goal>& goals) {
    auto parent = entry_count(goal, profile);
    double sum = 0.0;
    for (const Goal& g : goals) sum += child_weight(g, parent, profile) * goal_cost(g, profile);
    return sum;
  };
  return std::visit(
      overloaded{
          [](const Unify&) { return 0.0; },
          [&](const Call& c) { return site_cost(c.site); },
          [&](const HigherOrderCall& c) { return site_cost(c.site); },
          [&](const Conj& c) { return weighted_sum(c.goals); },
          [&](const Disjunction& d) { return weighted_sum(d.goals); },
          [&](const Switch& s) {
            std::vector<double> w = branch_weights(goal, profile);
            double sum = 0.0;
            for (std::size_t i = 0; i < s.arms.size(); ++i) {
              if (w[i] > 0.0) sum += w[i] * goal_cost(*s.arms[i].goal, profile);
            }
            return sum;
          },
          [&](const IfThenElse& ite) {
            auto p = then_probability(goal, profile);
            if (!p) return 0.0;
            double cost = goal_cost(*ite.cond, profile);
            if (*p > 0.0) cost += *p * goal_cost(*ite.then_goal, profile);
            if (*p < 1.0) cost += (1.0 - *p) * goal_cost(*ite.else_goal, profile);
            return cost;
          },
          [&](const Negation& n) { return goal_cost(*n.inner, profile); },
          [&](const Quantification& q) { return goal_cost(*q.inner, profile); },
      },
      goal.node);
}

std::string Diagnostic::str() const {
  std::ostringstream out;
  out << rule;
  if (goal) out << " at goal-id " << to_int(*goal);
  if (!message.empty()) out << ": " << message;
  return out.str();
}

namespace {

class Validator {
 public:
  Validator(const Program& program, const Profile& profile)
      : program_(program), profile_(profile) {}

  std::vector<Diagnostic> run() {
    if (program_.find(program_.entry) == nullptr) {
      report(std::nullopt, "unresolved-entry",
             "entry point " + program_.entry.str() + " is not a procedure");
    }
    for (const auto& [key, proc] : program_.procedures) check_procedure(proc);
    for (const auto& [site, stats] : profile_.sites) {
      if (!seen_sites_.count(site)) {
        report(std::nullopt, "unknown-site",
               "profile site " + std::to_string(to_int(site)) + " is not in the program");
      }
      if (!std::isfinite(stats.total_cost) || stats.total_cost < 0.0) {
        report(std::nullopt, "negative-cost",
               "site " + std::to_string(to_int(site)) + " has an invalid total cost");
      }
    }
    return std::move(diags_);
  }

 private:
  void report(std::optional<GoalId> goal, std::string rule, std::string message) {
    diags_.push_back(Diagnostic{goal, std::move(rule), std::move(message)});
  }

  void check_procedure(const Procedure& proc) {
    std::set<VarId> declared;
    for (const Variable& v : proc.vars) {
      if (!declared.insert(v.id).second) {
        report(std::nullopt, "duplicate-variable",
               proc.key.str() + ": variable id " + std::to_string(to_int(v.id)));
      }
    }
    for (VarId v : mentioned_vars(proc.body)) {
      if (!declared.count(v)) {
        report(std::nullopt, "unknown-variable",
               proc.key.str() + ": variable id " + std::to_string(to_int(v)));
      }
    }
    for (const HeadArg& arg : proc.head) {
      if (!declared.count(arg.var)) {
        report(std::nullopt, "unknown-variable",
               proc.key.str() + ": head variable id " + std::to_string(to_int(arg.var)));
      }
      if (arg.mode == ArgMode::out && !proc.body.produced.count(arg.var)) {
        report(proc.body.id, "unproduced-output",
               proc.key.str() + ": output " + proc.var_name(arg.var) +
                   " is not produced by the body");
      }
    }
    for_each_goal(proc.body, [&](const Goal& g) { check_goal(proc, g); });
  }

  void check_goal(const Procedure& proc, const Goal& g) {
    if (!seen_goals_.insert(g.id).second) {
      report(g.id, "duplicate-goal-id", proc.key.str());
    }
    if (!g.is_atomic() && g.declared_produces && *g.declared_produces != g.produced) {
      report(g.id, "produced-mismatch", "declared produced set differs from derived set");
    }
    std::visit(
        overloaded{
            [&](const Call& c) {
              check_site(g, c.site);
              if (const Procedure* callee = program_.find(c.callee)) {
                if (callee->head.size() != c.args.size()) {
                  report(g.id, "arity-mismatch", "call to " + c.callee.str());
                }
              } else if (!program_.is_external(c.callee)) {
                report(g.id, "unresolved-callee", c.callee.str());
              }
            },
            [&](const HigherOrderCall& c) { check_site(g, c.site); },
            [&](const Conj& c) { check_conj(g, c); },
            [&](const Switch& s) { check_switch(g, s); },
            [&](const IfThenElse& ite) { check_ite(g, ite); },
            [&](const Negation& n) {
              VarSet leaked;
              for (VarId v : n.inner->produced) {
                if (g.nonlocals.count(v)) leaked.insert(v);
              }
              if (!leaked.empty() || (g.declared_produces && !g.declared_produces->empty())) {
                report(g.id, "negation-binds", "negated goals cannot bind variables");
              }
            },
            [&](const Disjunction& d) {
              bool leaks = g.declared_produces && !g.declared_produces->empty();
              for (const Goal& alt : d.goals) {
                for (VarId v : alt.produced) leaks = leaks || g.nonlocals.count(v) != 0;
              }
              if (leaks) {
                report(g.id, "disjunction-binds",
                       "disjunctions cannot produce variables visible outside");
              }
            },
            [](const auto&) {},
        },
        g.node);
  }

  void check_site(const Goal& g, SiteId site) {
    if (!seen_sites_.insert(site).second) {
      report(g.id, "duplicate-site-id", "site " + std::to_string(to_int(site)));
    }
    const SiteStats* s = profile_.site(site);
    if (s == nullptr) {
      report(g.id, "missing-profile-entry", "site " + std::to_string(to_int(site)));
    } else if (s->count == 0) {
      report(g.id, "zero-count-site",
             "site " + std::to_string(to_int(site)) + " never executed; costed as 0");
    }
  }

  void check_conj(const Goal& g, const Conj& c) {
    for (std::size_t i = 0; i < c.goals.size(); ++i) {
      const Goal& gi = c.goals[i];
      if (c.parallel && gi.det != Determinism::det) {
        report(gi.id, "nondet-parallel-conjunct", "parallel conjuncts must be det");
      }
      VarSet consumed = consumed_vars(gi);
      for (std::size_t j = i + 1; j < c.goals.size(); ++j) {
        for (VarId v : c.goals[j].produced) {
          if (consumed.count(v)) {
            report(g.id, "producer-order",
                   "producer-order violated: conjunct " + std::to_string(i + 1) +
                       " consumes V" + std::to_string(to_int(v)) + " produced by conjunct " +
                       std::to_string(j + 1));
          }
          if (gi.produced.count(v)) {
            report(g.id, "multiple-producers",
                   "V" + std::to_string(to_int(v)) + " is produced by conjuncts " +
                       std::to_string(i + 1) + " and " + std::to_string(j + 1));
          }
        }
      }
    }
  }

  void check_switch(const Goal& g, const Switch& s) {
    auto recorded = profile_.goal_count(g.id);
    if (!recorded) return;
    std::uint64_t sum = 0;
    for (const SwitchArm& arm : s.arms) {
      auto n = entry_count(*arm.goal, profile_);
      if (!n) return;
      sum += *n;
    }
    if (sum != *recorded) {
      report(g.id, "count-mismatch",
             "switch arm entry counts sum to " + std::to_string(sum) + ", expected " +
                 std::to_string(*recorded));
    }
  }

  void check_ite(const Goal& g, const IfThenElse& ite) {
    auto entries = entry_count(g, profile_);
    auto then_n = entry_count(*ite.then_goal, profile_);
    auto else_n = entry_count(*ite.else_goal, profile_);
    if (entries && then_n && else_n && *then_n + *else_n != *entries) {
      report(g.id, "count-mismatch",
             "then + else counts " + std::to_string(*then_n + *else_n) +
                 " differ from entry count " + std::to_string(*entries));
    }
    auto f = profile_.cond_failures.find(g.id);
    if (f != profile_.cond_failures.end() && else_n && f->second != *else_n) {
      report(g.id, "failure-mismatch",
             "condition failure count " + std::to_string(f->second) +
                 " differs from else count " + std::to_string(*else_n));
    }
  }

  const Program& program_;
  const Profile& profile_;
  std::vector<Diagnostic> diags_;
  std::set<GoalId> seen_goals_;
  std::set<SiteId> seen_sites_;
};

}  // namespace

std::vector<Diagnostic> validate(const Program& program, const Profile& profile) {
  return Validator(program, profile).run();
}

}  // namespace depar
