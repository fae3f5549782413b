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

#include <random>

#include "depar/fixtures.hpp"
#include "depar/ir_json.hpp"
#include "depar/timing.hpp"
#include "doctest.h"

using namespace depar;

namespace {

const Goal& find_goal(const Program& program, int id) {
  for (const auto& [key, proc] : program.procedures) {
    GoalIndex index(proc.body);
    if (const Goal* g = index.find(GoalId{id})) return *g;
  }
  throw Error("no goal " + std::to_string(id));
}

// p(S, A): switch on S; arm a runs 10 units then binds A, arm b runs 20.
const char* kSwitchProgram = R"({
  "format_version": 1,
  "entry": "p/2/0",
  "externals": ["ten/0/0", "twenty/0/0"],
  "procedures": [{
    "name": "p", "arity": 2, "mode": 0,
    "vars": [{"id": 1, "name": "S"}, {"id": 2, "name": "A"}],
    "head": [{"var": 1, "mode": "in"}, {"var": 2, "mode": "out"}],
    "body": {"id": 1, "kind": "switch", "var": 1, "arms": [
      {"functor": "a", "goal": {"id": 2, "kind": "conj", "goals": [
        {"id": 3, "kind": "call", "callee": "ten/0/0", "args": [], "site": 1},
        {"id": 4, "kind": "unify", "lhs": 2, "functor": "x", "produces": [2]}]}},
      {"functor": "b", "goal": {"id": 5, "kind": "conj", "goals": [
        {"id": 6, "kind": "call", "callee": "twenty/0/0", "args": [], "site": 2},
        {"id": 7, "kind": "unify", "lhs": 2, "functor": "y", "produces": [2]}]}}
    ]}
  }]
})";

const char* kSwitchProfile = R"({
  "format_version": 1,
  "sites": [{"site": 1, "count": 3, "total_cost": 30},
            {"site": 2, "count": 1, "total_cost": 20}],
  "goals": [{"goal": 1, "count": 4}, {"goal": 2, "count": 3}, {"goal": 5, "count": 1}]
})";

// c(S, A): a switch where only arm a consumes A, then a goal that consumes
// A two units in.
const char* kConsumeProgram = R"({
  "format_version": 1,
  "entry": "c/2/0",
  "externals": ["five/0/0", "eight/0/0", "two/0/0", "use/1/0", "idle/0/0"],
  "procedures": [{
    "name": "c", "arity": 2, "mode": 0,
    "vars": [{"id": 1, "name": "S"}, {"id": 2, "name": "A"}],
    "head": [{"var": 1, "mode": "in"}, {"var": 2, "mode": "in"}],
    "body": {"id": 10, "kind": "conj", "goals": [
      {"id": 11, "kind": "switch", "var": 1, "arms": [
        {"functor": "a", "goal": {"id": 12, "kind": "conj", "goals": [
          {"id": 13, "kind": "call", "callee": "five/0/0", "args": [], "site": 1},
          {"id": 14, "kind": "call", "callee": "use/1/0", "args": [2], "site": 2}]}},
        {"functor": "b", "goal": {"id": 15, "kind": "call", "callee": "eight/0/0", "args": [], "site": 3}}
      ]},
      {"id": 16, "kind": "conj", "goals": [
        {"id": 17, "kind": "call", "callee": "two/0/0", "args": [], "site": 4},
        {"id": 18, "kind": "call", "callee": "use/1/0", "args": [2], "site": 5}]},
      {"id": 19, "kind": "call", "callee": "idle/0/0", "args": [], "site": 6}
    ]}
  }]
})";

const char* kConsumeProfile = R"({
  "format_version": 1,
  "sites": [{"site": 1, "count": 1, "total_cost": 5},
            {"site": 2, "count": 1, "total_cost": 1},
            {"site": 3, "count": 1, "total_cost": 8},
            {"site": 4, "count": 2, "total_cost": 4},
            {"site": 5, "count": 2, "total_cost": 2},
            {"site": 6, "count": 2, "total_cost": 84}],
  "goals": [{"goal": 12, "count": 1}, {"goal": 15, "count": 1}]
})";

// t(X): if (cheap, dear) then ... else ...; also a single-test condition.
const char* kCondProgram = R"({
  "format_version": 1,
  "entry": "t/1/0",
  "externals": ["cheap/1/0", "dear/1/0", "yes/0/0", "no/0/0", "test/1/0"],
  "procedures": [{
    "name": "t", "arity": 1, "mode": 0,
    "vars": [{"id": 1, "name": "X"}],
    "head": [{"var": 1, "mode": "in"}],
    "body": {"id": 1, "kind": "conj", "goals": [
      {"id": 2, "kind": "ite",
       "cond": {"id": 3, "kind": "conj", "det": "semidet", "goals": [
         {"id": 4, "kind": "call", "callee": "cheap/1/0", "args": [1], "site": 1, "det": "semidet"},
         {"id": 5, "kind": "call", "callee": "dear/1/0", "args": [1], "site": 2, "det": "semidet"}]},
       "then": {"id": 6, "kind": "call", "callee": "yes/0/0", "args": [], "site": 3},
       "else": {"id": 7, "kind": "call", "callee": "no/0/0", "args": [], "site": 4}},
      {"id": 8, "kind": "ite",
       "cond": {"id": 9, "kind": "call", "callee": "test/1/0", "args": [1], "site": 5, "det": "semidet"},
       "then": {"id": 10, "kind": "call", "callee": "yes/0/0", "args": [], "site": 6},
       "else": {"id": 11, "kind": "call", "callee": "no/0/0", "args": [], "site": 7}}
    ]}
  }]
})";

const char* kCondProfile = R"({
  "format_version": 1,
  "sites": [{"site": 1, "count": 100, "total_cost": 100},
            {"site": 2, "count": 10, "total_cost": 500},
            {"site": 3, "count": 0, "total_cost": 0},
            {"site": 4, "count": 100, "total_cost": 100},
            {"site": 5, "count": 2, "total_cost": 2},
            {"site": 6, "count": 1, "total_cost": 1},
            {"site": 7, "count": 1, "total_cost": 1}],
  "goals": [{"goal": 6, "count": 0}, {"goal": 7, "count": 100},
            {"goal": 10, "count": 1}, {"goal": 11, "count": 1}],
  "conditions": [{"goal": 2, "failures": 100}, {"goal": 8, "failures": 1}]
})";

}  // namespace

TEST_CASE("unification produces at time zero") {
  Fixture f = fig1_left();
  TimingModel tm(f.program, f.profile);
  const Procedure* p = f.program.find(ProcKey{"p", 1, 0});
  const auto& body = std::get<Conj>(p->body.node);
  CHECK(tm.production_time(body.goals[0], VarId{1}) == 0.0);
  CHECK(goal_cost(body.goals[0], f.profile) == 0.0);
}

TEST_CASE("production inside the map_foldl step") {
  Fixture f = map_foldl();
  TimingModel tm(f.program, f.profile);
  const Goal& conj = find_goal(f.program, to_int(f.conj_goal));
  const auto& goals = std::get<Conj>(conj.node).goals;
  CHECK(goal_cost(goals[0], f.profile) == 1625050.0);
  CHECK(goal_cost(goals[1], f.profile) == 3.0);
  CHECK(goal_cost(goals[2], f.profile) == 1625054.0);
  // M then F: F's own production of Acc1 is at 3.
  CHECK(tm.production_time(goals[1], VarId{9}) == 3.0);
  std::vector<ConjunctInfo> infos = tm.conjunct_infos({&goals[0], &goals[1], &goals[2]});
  ConjunctInfo first_two = sequence({infos[0], infos[1]});
  CHECK(first_two.produces.at(VarId{9}) == 1625053.0);
}

TEST_CASE("recursive call consumes the accumulator one unit after M") {
  Fixture f = map_foldl();
  TimingModel tm(f.program, f.profile);
  const auto& goals = std::get<Conj>(find_goal(f.program, to_int(f.conj_goal)).node).goals;
  CHECK(tm.first_consumption_time(goals[2], VarId{9}) == 1625051.0);
}

TEST_CASE("consumed variables of the map_foldl recursive call") {
  Fixture f = map_foldl();
  const auto& goals = std::get<Conj>(find_goal(f.program, to_int(f.conj_goal)).node).goals;
  CHECK(consumed_vars(goals[2]) == VarSet{VarId{1}, VarId{2}, VarId{7}, VarId{9}});
}

TEST_CASE("switch production is the count-weighted average of its arms") {
  Program program = parse_program(kSwitchProgram);
  Profile profile = parse_profile(kSwitchProfile);
  TimingModel tm(program, profile);
  CHECK(tm.production_time(find_goal(program, 1), VarId{2}) == doctest::Approx(12.5).epsilon(1e-12));
}

TEST_CASE("partial consumption inside a switch falls through to the next conjunct") {
  Program program = parse_program(kConsumeProgram);
  Profile profile = parse_profile(kConsumeProfile);
  TimingModel tm(program, profile);
  // Arm a consumes at 5; arm b (cost 8) does not, and the next conjunct
  // consumes 2 units in: 0.5 * 5 + 0.5 * (8 + 2).
  CHECK(tm.first_consumption_time(find_goal(program, 10), VarId{2}) ==
        doctest::Approx(7.5).epsilon(1e-12));
}

TEST_CASE("a goal that never consumes the variable consumes it at its end") {
  Program program = parse_program(kConsumeProgram);
  Profile profile = parse_profile(kConsumeProfile);
  TimingModel tm(program, profile);
  const Goal& idle = find_goal(program, 19);
  CHECK(goal_cost(idle, profile) == 42.0);
  CHECK(tm.first_consumption_time(idle, VarId{2}) == 42.0);
}

TEST_CASE("expected cost on failure") {
  Program program = parse_program(kCondProgram);
  Profile profile = parse_profile(kCondProfile);
  TimingModel tm(program, profile);
  SUBCASE("single test") { CHECK(tm.expected_cost_on_failure(find_goal(program, 8)) == 1.0); }
  SUBCASE("cheap test then expensive test") {
    CHECK(tm.expected_cost_on_failure(find_goal(program, 2)) == doctest::Approx(6.0));
  }
  SUBCASE("a condition that never fails is an error") {
    CHECK_THROWS_AS(tm.expected_cost_on_failure(find_goal(program, 9), 0), Error);
  }
}

TEST_CASE("shared variable timelines") {
  SUBCASE("fig1 left") {
    Fixture f = fig1_left();
    TimingModel tm(f.program, f.profile);
    const auto& goals = std::get<Conj>(find_goal(f.program, to_int(f.conj_goal)).node).goals;
    auto t = tm.shared_var_timeline({&goals[0], &goals[1]});
    REQUIRE(t.size() == 2);
    CHECK(t[0].seq_cost == 5.0);
    CHECK(t[0].events == std::vector<ProdConsEvent>{{VarId{1}, 1.0, EventKind::produce}});
    CHECK(t[1].seq_cost == 4.0);
    CHECK(t[1].events == std::vector<ProdConsEvent>{{VarId{1}, 2.0, EventKind::consume}});
  }
  SUBCASE("fig1 right") {
    Fixture f = fig1_right();
    TimingModel tm(f.program, f.profile);
    const auto& goals = std::get<Conj>(find_goal(f.program, to_int(f.conj_goal)).node).goals;
    auto t = tm.shared_var_timeline({&goals[0], &goals[1]});
    CHECK(t[0].events == std::vector<ProdConsEvent>{{VarId{1}, 4.0, EventKind::produce}});
    CHECK(t[1].events == std::vector<ProdConsEvent>{{VarId{1}, 1.0, EventKind::consume}});
  }
  SUBCASE("independent conjuncts have empty lists") {
    Fixture f = two_level();
    TimingModel tm(f.program, f.profile);
    const auto& goals = std::get<Conj>(find_goal(f.program, to_int(f.conj_goal)).node).goals;
    auto t = tm.shared_var_timeline({&goals[0], &goals[1]});
    CHECK(t[0].events.empty());
    CHECK(t[1].events.empty());
  }
  SUBCASE("map_foldl groups") {
    Fixture f = map_foldl();
    TimingModel tm(f.program, f.profile);
    const auto& goals = std::get<Conj>(find_goal(f.program, to_int(f.conj_goal)).node).goals;
    auto infos = tm.conjunct_infos({&goals[0], &goals[1], &goals[2]});
    ConjunctInfo mf = sequence({infos[0], infos[1]});
    CHECK(mf.produces.at(VarId{9}) == 1625053.0);
    CHECK(infos[2].consumes.at(VarId{9}).base == 1625051.0);
  }
}

TEST_CASE("properties over fixtures") {
  for (const std::string& name : fixture_names()) {
    CAPTURE(name);
    Fixture f = make_fixture(name, 7);
    TimingModel tm(f.program, f.profile);
    for (const auto& [key, proc] : f.program.procedures) {
      for_each_goal(proc.body, [&](const Goal& g) {
        double cost = goal_cost(g, f.profile);
        CHECK(cost >= 0.0);
        for (VarId v : g.produced) {
          double t = tm.production_time(g, v);
          CHECK(t >= 0.0);
          CHECK(t <= cost + 1e-9);
        }
        for (VarId v : consumed_vars(g)) {
          double t = tm.first_consumption_time(g, v);
          CHECK(t >= 0.0);
          CHECK(t <= cost + 1e-9);
        }
      });
    }
  }
}

TEST_CASE("branch weights sum to one") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Fixture f = map_foldl(static_cast<std::uint64_t>(uniform(rng, 1, 1000)),
                          static_cast<std::uint64_t>(uniform(rng, 1, 50)));
    const Procedure* p = f.program.find(ProcKey{"map_foldl", 5, 0});
    std::vector<double> w = branch_weights(p->body, f.profile);
    double sum = 0.0;
    for (double x : w) sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("prepending a goal shifts both times by its cost") {
  Fixture f = fig1_left();
  TimingModel tm(f.program, f.profile);
  const auto& goals = std::get<Conj>(find_goal(f.program, to_int(f.conj_goal)).node).goals;
  // c = (q, q'): q's consumption time measured from a conjunction starting
  // with p (cost 5, does not consume A).
  Affine q = tm.consumption(goals[1], VarId{1});
  Affine shifted = compose(Affine{5.0, 1.0}, q);
  CHECK(shifted.base == q.base + 5.0);
  ConjunctInfo seq = sequence({ConjunctInfo{5.0, {}, {}}, ConjunctInfo{4.0, {{VarId{1}, 1.0}}, {}}});
  CHECK(seq.produces.at(VarId{1}) == 6.0);
}

TEST_CASE("branch collapse: equal arm times give that time") {
  Program program = parse_program(kSwitchProgram);
  Profile profile = parse_profile(R"({
    "format_version": 1,
    "sites": [{"site": 1, "count": 3, "total_cost": 30},
              {"site": 2, "count": 1, "total_cost": 10}],
    "goals": [{"goal": 1, "count": 4}, {"goal": 2, "count": 3}, {"goal": 5, "count": 1}]
  })");
  TimingModel tm(program, profile);
  CHECK(tm.production_time(find_goal(program, 1), VarId{2}) == 10.0);
}

TEST_CASE("timing is deterministic") {
  Fixture f = map_foldl();
  TimingModel a(f.program, f.profile);
  TimingModel b(f.program, f.profile);
  const auto& goals = std::get<Conj>(find_goal(f.program, to_int(f.conj_goal)).node).goals;
  CHECK(a.first_consumption_time(goals[2], VarId{9}) == b.first_consumption_time(goals[2], VarId{9}));
}

TEST_CASE("asking for a variable the goal does not produce is an error") {
  Fixture f = fig1_left();
  TimingModel tm(f.program, f.profile);
  const Procedure* q = f.program.find(ProcKey{"q", 1, 0});
  CHECK_THROWS_AS(tm.production_time(q->body, VarId{1}), Error);
}
