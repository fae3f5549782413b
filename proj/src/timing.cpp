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

#include "depar/timing.hpp"

#include <algorithm>

namespace depar {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Affine scale(const Affine& a, double w) { return {a.base * w, a.slope * w}; }
Affine plus(const Affine& a, const Affine& b) { return {a.base + b.base, a.slope + b.slope}; }

bool contains(const std::vector<GoalId>* path, GoalId id) {
  return path != nullptr && std::find(path->begin(), path->end(), id) != path->end();
}

std::string var_str(VarId v) { return "V" + std::to_string(to_int(v)); }

}  // namespace

Affine compose(const Affine& first, const Affine& second) {
  return {first.base + first.slope * second.base, first.slope * second.slope};
}

bool event_less(const ProdConsEvent& a, const ProdConsEvent& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.kind != b.kind) return a.kind == EventKind::produce;
  return a.var < b.var;
}

ConjunctInfo sequence(const std::vector<ConjunctInfo>& parts) {
  ConjunctInfo out;
  for (const ConjunctInfo& p : parts) {
    for (const auto& [v, t] : p.produces) out.produces[v] = out.cost + t;
    out.cost += p.cost;
  }
  // Consumption of v, right to left: members that do not consume v pass
  // through as {cost, 1}; the last one ends the sequence with rest = 0.
  std::map<VarId, Affine> acc;
  std::set<VarId> vars;
  for (const ConjunctInfo& p : parts) {
    for (const auto& [v, a] : p.consumes) vars.insert(v);
  }
  VarSet internal;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (const auto& [v, a] : parts[i].consumes) {
      for (std::size_t j = 0; j < i; ++j) {
        if (parts[j].produces.count(v)) internal.insert(v);
      }
    }
  }
  for (VarId v : vars) {
    if (internal.count(v)) continue;
    Affine a{0.0, 1.0};
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
      auto c = it->consumes.find(v);
      a = compose(c != it->consumes.end() ? c->second : Affine{it->cost, 1.0}, a);
    }
    out.consumes[v] = a;
  }
  return out;
}

TimingModel::TimingModel(const Program& program, const Profile& profile)
    : program_(program), profile_(profile) {
  for (const auto& [key, proc] : program_.procedures) {
    indexes_.emplace(key, GoalIndex(proc.body));
    for_each_goal(proc.body, [&](const Goal& g) {
      SiteId site{};
      if (const auto* c = std::get_if<Call>(&g.node)) {
        site = c->site;
      } else if (const auto* h = std::get_if<HigherOrderCall>(&g.node)) {
        site = h->site;
      } else {
        return;
      }
      owners_.emplace(site, &proc);
      site_goals_.emplace(site, g.id);
    });
  }
}

const Procedure* TimingModel::site_owner(SiteId site) const {
  auto it = owners_.find(site);
  return it == owners_.end() ? nullptr : it->second;
}

double TimingModel::production_time(const Goal& goal, VarId var) {
  if (!goal.produced.count(var)) {
    throw Error("goal " + std::to_string(to_int(goal.id)) + " does not produce " + var_str(var));
  }
  return production(goal, var, Context{});
}

double TimingModel::first_consumption_time(const Goal& goal, VarId var) {
  return consumption(goal, var).base;
}

Affine TimingModel::consumption(const Goal& goal, VarId var) {
  return consume(goal, var, Context{});
}

TimingModel::Context TimingModel::enter(const Call& call, const Context& ctx) {
  Context inner;
  inner.stack = ctx.stack;
  inner.stack.push_back(call.callee);
  const Procedure* owner = site_owner(call.site);
  if (owner != nullptr && owner->key == call.callee) {
    auto it = steady_paths_.find(call.site);
    if (it == steady_paths_.end()) {
      const GoalIndex& index = indexes_.at(owner->key);
      it = steady_paths_.emplace(call.site, index.path_to_root(site_goals_.at(call.site))).first;
    }
    inner.steady = &it->second;
  }
  return inner;
}

std::vector<double> TimingModel::arm_weights(const Goal& switch_goal, const Context& ctx) const {
  const auto& sw = std::get<Switch>(switch_goal.node);
  if (ctx.steady != nullptr) {
    for (std::size_t i = 0; i < sw.arms.size(); ++i) {
      if (contains(ctx.steady, sw.arms[i].goal->id)) {
        std::vector<double> w(sw.arms.size(), 0.0);
        w[i] = 1.0;
        return w;
      }
    }
  }
  return branch_weights(switch_goal, profile_);
}

std::optional<double> TimingModel::then_weight(const Goal& ite_goal, const Context& ctx) const {
  const auto& ite = std::get<IfThenElse>(ite_goal.node);
  if (contains(ctx.steady, ite.cond->id) || contains(ctx.steady, ite.then_goal->id)) return 1.0;
  if (contains(ctx.steady, ite.else_goal->id)) return 0.0;
  return then_probability(ite_goal, profile_);
}

double TimingModel::production(const Goal& goal, VarId var, const Context& ctx) {
  return std::visit(
      overloaded{
          [](const Unify&) { return 0.0; },
          [&](const HigherOrderCall&) { return cost(goal); },
          [&](const Call& c) { return call_production(goal, c, var, ctx); },
          [&](const Conj& c) {
            double prefix = 0.0;
            for (const Goal& g : c.goals) {
              if (g.produced.count(var)) return prefix + production(g, var, ctx);
              prefix += cost(g);
            }
            throw Error("no conjunct of goal " + std::to_string(to_int(goal.id)) +
                        " produces " + var_str(var));
          },
          [&](const Switch& s) {
            std::vector<double> w = arm_weights(goal, ctx);
            double t = 0.0;
            for (std::size_t i = 0; i < s.arms.size(); ++i) {
              if (w[i] > 0.0) t += w[i] * production(*s.arms[i].goal, var, ctx);
            }
            return t;
          },
          [&](const IfThenElse& ite) {
            auto p = then_weight(goal, ctx);
            if (!p) return 0.0;
            double t = 0.0;
            if (*p > 0.0) {
              double then_t = ite.cond->produced.count(var)
                                  ? production(*ite.cond, var, ctx)
                                  : cost(*ite.cond) + production(*ite.then_goal, var, ctx);
              t += *p * then_t;
            }
            if (*p < 1.0) {
              t += (1.0 - *p) *
                   (expected_cost_on_failure(goal) + production(*ite.else_goal, var, ctx));
            }
            return t;
          },
          [&](const Quantification& q) { return production(*q.inner, var, ctx); },
          [&](const Negation&) -> double {
            throw InvariantViolation("negated goal " + std::to_string(to_int(goal.id)) +
                                     " cannot produce " + var_str(var));
          },
          [&](const Disjunction&) -> double {
            throw InvariantViolation("disjunction " + std::to_string(to_int(goal.id)) +
                                     " cannot produce " + var_str(var));
          },
      },
      goal.node);
}

double TimingModel::call_production(const Goal& goal, const Call& call, VarId var,
                                    const Context& ctx) {
  double total = cost(goal);
  const Procedure* callee = program_.find(call.callee);
  bool recursive = std::find(ctx.stack.begin(), ctx.stack.end(), call.callee) != ctx.stack.end();
  if (callee == nullptr || recursive || total == 0.0) return total;
  int pos = -1;
  for (std::size_t i = 0; i < call.args.size() && i < callee->head.size(); ++i) {
    if (call.args[i] == var && callee->head[i].mode == ArgMode::out) pos = static_cast<int>(i);
  }
  if (pos < 0) return total;
  Context inner = enter(call, ctx);
  MemoKey key{call.callee, pos, 0, inner.steady ? to_int(call.site) : -1, ctx.stack};
  auto it = memo_.find(key);
  if (it == memo_.end()) {
    double t = production(callee->body, callee->head[pos].var, inner);
    it = memo_.emplace(key, Affine{t, 0.0}).first;
  }
  // One unit for the call itself, then the callee body.
  return std::min(1.0 + it->second.base, total);
}

Affine TimingModel::consume(const Goal& goal, VarId var, const Context& ctx) {
  if (!goal.nonlocals.count(var) || goal.produced.count(var)) return {cost(goal), 1.0};
  return std::visit(
      overloaded{
          [](const Unify&) { return Affine{0.0, 0.0}; },
          [](const HigherOrderCall&) { return Affine{0.0, 0.0}; },
          [&](const Call& c) { return call_consumption(goal, c, var, ctx); },
          [&](const Conj& c) {
            Affine a{0.0, 1.0};
            for (auto it = c.goals.rbegin(); it != c.goals.rend(); ++it) {
              a = compose(consume(*it, var, ctx), a);
            }
            return a;
          },
          [&](const Switch& s) {
            if (s.var == var) return Affine{0.0, 0.0};
            std::vector<double> w = arm_weights(goal, ctx);
            Affine a;
            for (std::size_t i = 0; i < s.arms.size(); ++i) {
              if (w[i] > 0.0) a = plus(a, scale(consume(*s.arms[i].goal, var, ctx), w[i]));
            }
            return a;
          },
          [&](const IfThenElse& ite) {
            auto p = then_weight(goal, ctx);
            if (!p) return Affine{0.0, 1.0};
            Affine branches;
            Affine cond = consume(*ite.cond, var, ctx);
            bool cond_consumes = ite.cond->nonlocals.count(var) && !ite.cond->produced.count(var);
            if (cond_consumes) {
              // The wait happens whenever the condition runs.
              if (*p > 0.0) branches = plus(branches, scale(consume(*ite.then_goal, var, ctx), *p));
              if (*p < 1.0) {
                branches = plus(branches, scale(consume(*ite.else_goal, var, ctx), 1.0 - *p));
              }
              return compose(cond, branches);
            }
            if (*p > 0.0) {
              branches = plus(branches, scale(compose(Affine{cost(*ite.cond), 1.0},
                                                      consume(*ite.then_goal, var, ctx)),
                                              *p));
            }
            if (*p < 1.0) {
              branches = plus(branches,
                              scale(compose(Affine{expected_cost_on_failure(goal), 1.0},
                                            consume(*ite.else_goal, var, ctx)),
                                    1.0 - *p));
            }
            return branches;
          },
          [&](const Negation& n) { return consume(*n.inner, var, ctx); },
          [&](const Quantification& q) { return consume(*q.inner, var, ctx); },
          [&](const Disjunction& d) {
            if (d.goals.empty()) return Affine{0.0, 1.0};
            return consume(d.goals.front(), var, ctx);
          },
      },
      goal.node);
}

Affine TimingModel::call_consumption(const Goal& goal, const Call& call, VarId var,
                                     const Context& ctx) {
  double total = cost(goal);
  const Procedure* callee = program_.find(call.callee);
  bool recursive = std::find(ctx.stack.begin(), ctx.stack.end(), call.callee) != ctx.stack.end();
  if (callee == nullptr || recursive || total == 0.0) return {0.0, 0.0};
  Context inner = enter(call, ctx);
  std::optional<Affine> best;
  for (std::size_t i = 0; i < call.args.size() && i < callee->head.size(); ++i) {
    if (call.args[i] != var || callee->head[i].mode != ArgMode::in) continue;
    MemoKey key{call.callee, static_cast<int>(i), 1, inner.steady ? to_int(call.site) : -1,
                ctx.stack};
    auto it = memo_.find(key);
    if (it == memo_.end()) {
      it = memo_.emplace(key, consume(callee->body, callee->head[i].var, inner)).first;
    }
    if (!best || it->second.base < best->base) best = it->second;
  }
  if (!best) return {0.0, 0.0};
  return {std::min(1.0 + best->base, total), best->slope};
}

double TimingModel::expected_cost_on_failure(const Goal& cond, std::uint64_t failures) const {
  if (failures == 0) {
    throw Error("condition " + std::to_string(to_int(cond.id)) + " never fails");
  }
  auto entries = entry_count(cond, profile_);
  if (!entries) {
    throw MissingProfileEntry("no entry count for condition goal " +
                              std::to_string(to_int(cond.id)));
  }
  std::uint64_t f = std::min(failures, *entries);
  if (f == 0) throw Error("condition " + std::to_string(to_int(cond.id)) + " never runs");
  double successes = static_cast<double>(*entries - f);
  std::vector<const Goal*> steps;
  if (const auto* c = std::get_if<Conj>(&cond.node)) {
    for (const Goal& g : c->goals) steps.push_back(&g);
  } else {
    steps.push_back(&cond);
  }
  // Executions of a step beyond the successful ones belong to failing paths.
  double sum = 0.0;
  for (const Goal* step : steps) {
    double n = static_cast<double>(entry_count(*step, profile_).value_or(*entries));
    double on_failure = std::max(0.0, n - successes);
    if (on_failure > 0.0) sum += on_failure * goal_cost(*step, profile_);
  }
  return sum / static_cast<double>(f);
}

double TimingModel::expected_cost_on_failure(const Goal& ite_goal) const {
  const auto& ite = std::get<IfThenElse>(ite_goal.node);
  std::uint64_t failures = 0;
  auto it = profile_.cond_failures.find(ite_goal.id);
  if (it != profile_.cond_failures.end()) {
    failures = it->second;
  } else if (auto n = profile_.goal_count(ite.else_goal->id)) {
    failures = *n;
  }
  return expected_cost_on_failure(*ite.cond, failures);
}

std::vector<ConjunctInfo> TimingModel::conjunct_infos(const std::vector<const Goal*>& conjuncts) {
  std::vector<ConjunctInfo> infos(conjuncts.size());
  for (std::size_t i = 0; i < conjuncts.size(); ++i) infos[i].cost = cost(*conjuncts[i]);
  for (std::size_t i = 0; i < conjuncts.size(); ++i) {
    for (VarId v : conjuncts[i]->produced) {
      for (std::size_t j = i + 1; j < conjuncts.size(); ++j) {
        VarSet consumed = consumed_vars(*conjuncts[j]);
        if (!consumed.count(v)) continue;
        if (!infos[i].produces.count(v)) {
          infos[i].produces[v] = production_time(*conjuncts[i], v);
        }
        if (!infos[j].consumes.count(v)) infos[j].consumes[v] = consumption(*conjuncts[j], v);
      }
    }
  }
  return infos;
}

std::vector<ConjunctTimeline> TimingModel::shared_var_timeline(
    const std::vector<const Goal*>& conjuncts) {
  std::vector<ConjunctTimeline> out;
  for (const ConjunctInfo& info : conjunct_infos(conjuncts)) {
    ConjunctTimeline t;
    t.seq_cost = info.cost;
    for (const auto& [v, time] : info.produces) t.events.push_back({v, time, EventKind::produce});
    for (const auto& [v, a] : info.consumes) t.events.push_back({v, a.base, EventKind::consume});
    std::sort(t.events.begin(), t.events.end(), event_less);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace depar
