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

#include "depar/fixtures.hpp"

#include <algorithm>

namespace depar {

namespace {

// Hands out program-wide goal and site ids and records profile data.
class Builder {
 public:
  GoalId goal_id() { return GoalId{next_goal_++}; }
  SiteId site_id() { return SiteId{next_site_++}; }

  Goal unify(VarId lhs, std::string functor, std::vector<VarId> args, VarSet produces) {
    Goal g;
    g.id = goal_id();
    g.node = Unify{lhs, std::move(functor), std::move(args)};
    g.declared_produces = std::move(produces);
    return g;
  }

  // Call with its own fresh site, run `count` times at `cost` each.
  Goal call(const ProcKey& callee, std::vector<VarId> args, std::uint64_t count, double cost,
            std::optional<VarSet> produces = std::nullopt) {
    Goal g;
    g.id = goal_id();
    SiteId site = site_id();
    g.node = Call{callee, std::move(args), site};
    g.declared_produces = std::move(produces);
    profile.sites[site] = SiteStats{count, cost * static_cast<double>(count)};
    return g;
  }

  Goal ho_call(VarId closure, std::vector<VarId> args, std::uint64_t count, double cost,
               VarSet produces) {
    Goal g;
    g.id = goal_id();
    SiteId site = site_id();
    g.node = HigherOrderCall{closure, std::move(args), site};
    g.declared_produces = std::move(produces);
    profile.sites[site] = SiteStats{count, cost * static_cast<double>(count)};
    return g;
  }

  Goal conj(std::vector<Goal> goals) {
    Goal g;
    g.id = goal_id();
    g.node = Conj{std::move(goals), false};
    return g;
  }

  Goal switch_on(VarId var, std::vector<SwitchArm> arms, std::vector<std::uint64_t> counts) {
    Goal g;
    g.id = goal_id();
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < arms.size(); ++i) {
      profile.goal_counts[arms[i].goal->id] = counts[i];
      total += counts[i];
    }
    profile.goal_counts[g.id] = total;
    g.node = Switch{var, std::move(arms)};
    return g;
  }

  static SwitchArm arm(std::string functor, std::vector<VarId> binds, Goal goal) {
    SwitchArm a;
    a.functor = std::move(functor);
    a.binds = std::move(binds);
    a.goal = std::move(goal);
    return a;
  }

  Procedure& procedure(const ProcKey& key, std::vector<std::string> var_names,
                       std::vector<HeadArg> head) {
    Procedure proc;
    proc.key = key;
    for (std::size_t i = 0; i < var_names.size(); ++i) {
      proc.vars.push_back(Variable{VarId{static_cast<std::int32_t>(i + 1)}, var_names[i]});
    }
    proc.head = std::move(head);
    return program.procedures[key] = std::move(proc);
  }

  Fixture finish(std::string name, const ProcKey& entry, const ProcKey& conj_proc,
                 GoalId conj_goal) {
    program.entry = entry;
    program.finalize();
    return Fixture{std::move(name), std::move(program), std::move(profile), conj_proc, conj_goal};
  }

  Program program;
  Profile profile;

 private:
  std::int32_t next_goal_ = 1;
  std::int32_t next_site_ = 1;
};

VarId v(int id) { return VarId{id}; }
HeadArg in(int id) { return HeadArg{VarId{id}, ArgMode::in}; }
HeadArg out(int id) { return HeadArg{VarId{id}, ArgMode::out}; }

const ProcKey kMain{"main", 0, 0};

ProcKey ext(const std::string& name, int arity) { return ProcKey{name, arity, 0}; }

// main calls p(A) then q(A); both bodies are sequences of external calls.
Fixture fig1(bool right) {
  Builder b;
  const ProcKey p{"p", 1, 0};
  const ProcKey q{"q", 1, 0};
  for (const char* name : {"work_p1", "work_p2", "work_q1"}) b.program.externals.insert(ext(name, 0));
  b.program.externals.insert(ext("use", 1));

  Goal p_body = right ? b.conj([&] {
    std::vector<Goal> g;
    g.push_back(b.call(ext("work_p1", 0), {}, 1, 3));
    g.push_back(b.unify(v(1), "a", {}, {v(1)}));
    g.push_back(b.call(ext("work_p2", 0), {}, 1, 1));
    return g;
  }())
                      : b.conj([&] {
                          std::vector<Goal> g;
                          g.push_back(b.unify(v(1), "a", {}, {v(1)}));
                          g.push_back(b.call(ext("work_p1", 0), {}, 1, 4));
                          return g;
                        }());
  b.procedure(p, {"A"}, {out(1)}).body = std::move(p_body);

  Goal q_body = right ? b.call(ext("use", 1), {v(1)}, 1, 3, VarSet{})
                      : b.conj([&] {
                          std::vector<Goal> g;
                          g.push_back(b.call(ext("work_q1", 0), {}, 1, 1));
                          g.push_back(b.call(ext("use", 1), {v(1)}, 1, 2, VarSet{}));
                          return g;
                        }());
  b.procedure(q, {"A"}, {in(1)}).body = std::move(q_body);

  std::vector<Goal> main_goals;
  main_goals.push_back(b.call(p, {v(1)}, 1, 5));
  main_goals.push_back(b.call(q, {v(1)}, 1, 4));
  Goal main_body = b.conj(std::move(main_goals));
  GoalId conj_id = main_body.id;
  b.procedure(kMain, {"A"}, {}).body = std::move(main_body);
  return b.finish(right ? "fig1-right" : "fig1-left", kMain, kMain, conj_id);
}

}  // namespace

Fixture fig1_left() { return fig1(false); }
Fixture fig1_right() { return fig1(true); }

Fixture map_foldl(std::uint64_t list_length, std::uint64_t entries) {
  constexpr double kM = 1625050;
  constexpr double kF = 3;
  constexpr double kRec = 1625054;
  Builder b;
  const ProcKey mf{"map_foldl", 5, 0};
  const std::uint64_t iterations = list_length * entries;

  // Vars: M F L Acc0 Acc X Xs Y Acc1.
  std::vector<Goal> step;
  step.push_back(b.ho_call(v(1), {v(6), v(8)}, iterations, kM, {v(8)}));
  step.push_back(b.ho_call(v(2), {v(8), v(4), v(9)}, iterations, kF, {v(9)}));
  step.push_back(b.call(mf, {v(1), v(2), v(7), v(9), v(5)}, iterations, kRec));
  Goal rec_conj = b.conj(std::move(step));
  GoalId conj_id = rec_conj.id;
  std::vector<SwitchArm> arms;
  arms.push_back(Builder::arm("[]", {}, b.unify(v(5), "", {v(4)}, {v(5)})));
  arms.push_back(Builder::arm("[|]", {v(6), v(7)}, std::move(rec_conj)));
  Goal body = b.switch_on(v(3), std::move(arms), {entries, iterations});
  b.procedure(mf, {"M", "F", "L", "Acc0", "Acc", "X", "Xs", "Y", "Acc1"},
              {in(1), in(2), in(3), in(4), out(5)})
      .body = std::move(body);

  std::vector<Goal> main_goals;
  main_goals.push_back(b.unify(v(1), "m", {}, {v(1)}));
  main_goals.push_back(b.unify(v(2), "f", {}, {v(2)}));
  main_goals.push_back(b.unify(v(3), "list", {}, {v(3)}));
  main_goals.push_back(b.unify(v(4), "zero", {}, {v(4)}));
  // Each outside call runs the whole recursion.
  double whole = 1.0 + static_cast<double>(list_length) * kRec;
  main_goals.push_back(b.call(mf, {v(1), v(2), v(3), v(4), v(5)}, entries, whole));
  b.procedure(kMain, {"M", "F", "L", "Acc0", "Acc"}, {}).body = b.conj(std::move(main_goals));
  return b.finish("map-foldl", kMain, mf, conj_id);
}

Fixture two_level() {
  Builder b;
  const ProcKey p{"p", 0, 0};
  const ProcKey q{"q", 0, 0};
  for (const char* name : {"left", "right", "other"}) b.program.externals.insert(ext(name, 0));
  std::vector<Goal> p_goals;
  p_goals.push_back(b.call(ext("left", 0), {}, 1, 50000, VarSet{}));
  p_goals.push_back(b.call(ext("right", 0), {}, 1, 50000, VarSet{}));
  b.procedure(p, {}, {}).body = b.conj(std::move(p_goals));
  b.procedure(q, {}, {}).body = b.call(ext("other", 0), {}, 1, 100000, VarSet{});
  std::vector<Goal> main_goals;
  main_goals.push_back(b.call(p, {}, 1, 100001));
  main_goals.push_back(b.call(q, {}, 1, 100001));
  Goal main_body = b.conj(std::move(main_goals));
  GoalId conj_id = main_body.id;
  b.procedure(kMain, {}, {}).body = std::move(main_body);
  return b.finish("two-level", kMain, kMain, conj_id);
}

Fixture quicksort_like(std::uint64_t entries, std::uint64_t calls_per_site) {
  Builder b;
  const ProcKey qs{"qs", 2, 0};
  b.program.externals.insert(ext("split", 4));
  b.program.externals.insert(ext("join", 4));
  const std::uint64_t r = calls_per_site;
  // Every non-empty list makes two recursive calls.
  const std::uint64_t nonempty = r;
  const std::uint64_t empty = entries + 2 * r - nonempty;

  // Vars: L S H T Lo Hi SLo SHi.
  std::vector<Goal> step;
  step.push_back(b.call(ext("split", 4), {v(3), v(4), v(5), v(6)}, nonempty, 2000,
                        VarSet{v(5), v(6)}));
  step.push_back(b.call(qs, {v(5), v(7)}, r, 60000));
  step.push_back(b.call(qs, {v(6), v(8)}, r, 60000));
  step.push_back(b.call(ext("join", 4), {v(7), v(3), v(8), v(2)}, nonempty, 1000, VarSet{v(2)}));
  Goal rec_conj = b.conj(std::move(step));
  GoalId conj_id = rec_conj.id;
  std::vector<SwitchArm> arms;
  arms.push_back(Builder::arm("[]", {}, b.unify(v(2), "[]", {}, {v(2)})));
  arms.push_back(Builder::arm("[|]", {v(3), v(4)}, std::move(rec_conj)));
  b.procedure(qs, {"L", "S", "H", "T", "Lo", "Hi", "SLo", "SHi"}, {in(1), out(2)}).body =
      b.switch_on(v(1), std::move(arms), {empty, nonempty});

  std::vector<Goal> main_goals;
  main_goals.push_back(b.unify(v(1), "list", {}, {v(1)}));
  main_goals.push_back(b.call(qs, {v(1), v(2)}, entries, 1000000));
  b.procedure(kMain, {"L", "S"}, {}).body = b.conj(std::move(main_goals));
  return b.finish("quicksort", kMain, qs, conj_id);
}

Fixture multi_clause(std::uint64_t entries, std::uint64_t r1, std::uint64_t r2) {
  Builder b;
  const ProcKey mc{"mc", 2, 0};
  for (const char* name : {"heavy_a", "heavy_b"}) b.program.externals.insert(ext(name, 1));
  b.program.externals.insert(ext("combine", 3));

  // Vars: L R T W R0.
  auto clause = [&](const char* heavy, std::uint64_t count) {
    std::vector<Goal> g;
    g.push_back(b.call(ext(heavy, 1), {v(4)}, count, 40000, VarSet{v(4)}));
    g.push_back(b.call(mc, {v(3), v(5)}, count, 50000));
    g.push_back(b.call(ext("combine", 3), {v(4), v(5), v(2)}, count, 10, VarSet{v(2)}));
    return b.conj(std::move(g));
  };
  Goal a = clause("heavy_a", r1);
  GoalId conj_id = a.id;
  Goal bb = clause("heavy_b", r2);
  std::vector<SwitchArm> arms;
  arms.push_back(Builder::arm("a", {v(3)}, std::move(a)));
  arms.push_back(Builder::arm("b", {v(3)}, std::move(bb)));
  arms.push_back(Builder::arm("nil", {}, b.unify(v(2), "zero", {}, {v(2)})));
  b.procedure(mc, {"L", "R", "T", "W", "R0"}, {in(1), out(2)}).body =
      b.switch_on(v(1), std::move(arms), {r1, r2, entries});

  std::vector<Goal> main_goals;
  main_goals.push_back(b.unify(v(1), "list", {}, {v(1)}));
  main_goals.push_back(b.call(mc, {v(1), v(2)}, entries, 1000000));
  b.procedure(kMain, {"L", "R"}, {}).body = b.conj(std::move(main_goals));
  return b.finish("multi-clause", kMain, mc, conj_id);
}

Fixture irregular_recursion() {
  Builder b;
  const ProcKey ir{"ir", 2, 0};
  b.program.externals.insert(ext("heavy", 1));
  b.program.externals.insert(ext("combine", 3));

  // Vars: L R T U W R1 R2.
  std::vector<Goal> one;
  one.push_back(b.call(ext("heavy", 1), {v(5)}, 10, 40000, VarSet{v(5)}));
  one.push_back(b.call(ir, {v(3), v(6)}, 10, 50000));
  one.push_back(b.call(ext("combine", 3), {v(5), v(6), v(2)}, 10, 10, VarSet{v(2)}));
  std::vector<Goal> two;
  two.push_back(b.call(ir, {v(3), v(6)}, 10, 50000));
  two.push_back(b.call(ir, {v(4), v(7)}, 10, 50000));
  two.push_back(b.call(ext("combine", 3), {v(6), v(7), v(2)}, 10, 10, VarSet{v(2)}));
  Goal two_conj = b.conj(std::move(two));
  GoalId conj_id = two_conj.id;
  std::vector<SwitchArm> arms;
  arms.push_back(Builder::arm("one", {v(3)}, b.conj(std::move(one))));
  arms.push_back(Builder::arm("two", {v(3), v(4)}, std::move(two_conj)));
  arms.push_back(Builder::arm("nil", {}, b.unify(v(2), "zero", {}, {v(2)})));
  b.procedure(ir, {"L", "R", "T", "U", "W", "R1", "R2"}, {in(1), out(2)}).body =
      b.switch_on(v(1), std::move(arms), {10, 10, 22});

  std::vector<Goal> main_goals;
  main_goals.push_back(b.unify(v(1), "tree", {}, {v(1)}));
  main_goals.push_back(b.call(ir, {v(1), v(2)}, 2, 1000000));
  b.procedure(kMain, {"L", "R"}, {}).body = b.conj(std::move(main_goals));
  return b.finish("irregular", kMain, ir, conj_id);
}

Fixture cheap_program() {
  Builder b;
  b.program.externals.insert(ext("small_a", 0));
  b.program.externals.insert(ext("small_b", 0));
  std::vector<Goal> goals;
  goals.push_back(b.call(ext("small_a", 0), {}, 1, 3000, VarSet{}));
  goals.push_back(b.call(ext("small_b", 0), {}, 1, 4000, VarSet{}));
  Goal body = b.conj(std::move(goals));
  GoalId conj_id = body.id;
  b.procedure(kMain, {}, {}).body = std::move(body);
  return b.finish("cheap", kMain, kMain, conj_id);
}

std::int64_t uniform(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) return lo;
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(rng() % span);
}

Fixture random_fixture(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Builder b;
  const ProcKey work{"work", 2, 0};

  const int n = static_cast<int>(uniform(rng, 2, 6));
  // Main's variables: one per conjunct, V1..Vn, each optionally produced.
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("V" + std::to_string(i));
  std::vector<int> produced;
  std::vector<Goal> goals;
  std::uint64_t work_calls = 0;
  double work_a = static_cast<double>(uniform(rng, 1000, 40000));
  double work_b = static_cast<double>(uniform(rng, 1000, 40000));
  for (int i = 1; i <= n; ++i) {
    std::vector<VarId> args;
    if (!produced.empty() && uniform(rng, 0, 1) == 1) {
      args.push_back(v(produced[static_cast<std::size_t>(uniform(rng, 0, static_cast<std::int64_t>(produced.size()) - 1))]));
    }
    bool produce = uniform(rng, 0, 2) != 0;
    if (!args.empty() && uniform(rng, 0, 2) == 0) {
      // Two-stage helper: consumes its input, produces its output.
      args.push_back(v(i));
      goals.push_back(b.call(work, args, 1, 1 + work_a + work_b));
      ++work_calls;
      produced.push_back(i);
      continue;
    }
    ProcKey callee = ext("op" + std::to_string(i), static_cast<int>(args.size()) + (produce ? 1 : 0));
    b.program.externals.insert(callee);
    VarSet out_vars;
    if (produce) {
      args.push_back(v(i));
      out_vars.insert(v(i));
      produced.push_back(i);
    }
    double cost = static_cast<double>(uniform(rng, 0, 3) == 0 ? uniform(rng, 10, 900)
                                                              : uniform(rng, 1000, 60000));
    goals.push_back(b.call(callee, args, 1, cost, out_vars));
  }
  b.procedure(kMain, names, {}).body = b.conj(std::move(goals));

  if (work_calls > 0) {
    // Vars: In Out T.
    std::vector<Goal> stages;
    stages.push_back(b.call(ext("stage_a", 2), {v(1), v(3)}, work_calls, work_a, VarSet{v(3)}));
    stages.push_back(b.call(ext("stage_b", 2), {v(3), v(2)}, work_calls, work_b, VarSet{v(2)}));
    b.procedure(work, {"In", "Out", "T"}, {in(1), out(2)}).body = b.conj(std::move(stages));
    b.program.externals.insert(ext("stage_a", 2));
    b.program.externals.insert(ext("stage_b", 2));
  }
  GoalId conj_id = b.program.procedures.at(kMain).body.id;
  return b.finish("random", kMain, kMain, conj_id);
}

std::vector<std::string> fixture_names() {
  return {"fig1-left", "fig1-right", "map-foldl", "two-level", "quicksort",
          "multi-clause", "irregular", "cheap", "random"};
}

Fixture make_fixture(const std::string& name, std::uint64_t seed) {
  if (name == "fig1-left") return fig1_left();
  if (name == "fig1-right") return fig1_right();
  if (name == "map-foldl") return map_foldl();
  if (name == "two-level") return two_level();
  if (name == "quicksort") return quicksort_like();
  if (name == "multi-clause") return multi_clause();
  if (name == "irregular") return irregular_recursion();
  if (name == "cheap") return cheap_program();
  if (name == "random") return random_fixture(seed);
  throw Error("unknown fixture template '" + name + "'");
}

std::vector<ConjunctTimeline> random_timelines(std::mt19937_64& rng, const RandomShape& shape) {
  const int n = static_cast<int>(uniform(rng, 1, shape.max_conjuncts));
  std::vector<ConjunctTimeline> out(static_cast<std::size_t>(n));
  for (auto& c : out) c.seq_cost = static_cast<double>(uniform(rng, 0, shape.max_cost));
  if (n >= 2) {
    const int shared = static_cast<int>(uniform(rng, 0, shape.max_shared));
    for (int s = 0; s < shared; ++s) {
      const int producer = static_cast<int>(uniform(rng, 0, n - 2));
      VarId var{s + 1};
      auto& p = out[static_cast<std::size_t>(producer)];
      p.events.push_back({var, static_cast<double>(uniform(rng, 0, static_cast<std::int64_t>(p.seq_cost))),
                          EventKind::produce});
      const int consumers = static_cast<int>(uniform(rng, 1, n - 1 - producer));
      std::vector<int> candidates;
      for (int j = producer + 1; j < n; ++j) candidates.push_back(j);
      for (int k = 0; k < consumers; ++k) {
        std::size_t pick = static_cast<std::size_t>(
            uniform(rng, 0, static_cast<std::int64_t>(candidates.size()) - 1));
        auto& c = out[static_cast<std::size_t>(candidates[pick])];
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
        c.events.push_back({var, static_cast<double>(uniform(rng, 0, static_cast<std::int64_t>(c.seq_cost))),
                            EventKind::consume});
      }
    }
  }
  for (auto& c : out) std::sort(c.events.begin(), c.events.end(), event_less);
  return out;
}

std::vector<ConjunctInfo> random_infos(std::mt19937_64& rng, const RandomShape& shape) {
  std::vector<ConjunctTimeline> t = random_timelines(rng, shape);
  std::vector<ConjunctInfo> out;
  for (const ConjunctTimeline& c : t) {
    ConjunctInfo info;
    info.cost = c.seq_cost;
    for (const ProdConsEvent& e : c.events) {
      if (e.kind == EventKind::produce) {
        info.produces[e.var] = e.time;
      } else {
        info.consumes[e.var] = Affine{e.time, 0.0};
      }
    }
    out.push_back(std::move(info));
  }
  return out;
}

OverheadParams random_overheads(std::mt19937_64& rng, int max_value) {
  OverheadParams o;
  for (double* f : {&o.spark_cost, &o.spark_delay, &o.signal_cost, &o.wait_cost,
                    &o.context_wakeup_delay, &o.barrier_cost}) {
    *f = static_cast<double>(uniform(rng, 0, max_value));
  }
  return o;
}

}  // namespace depar
