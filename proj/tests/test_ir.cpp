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

#include <algorithm>

#include "depar/fixtures.hpp"
#include "depar/ir_json.hpp"
#include "doctest.h"

using namespace depar;

namespace {

// main: X = a, use(X). Conjunct order is swapped by the tests that need a
// violation.
std::string two_goal_program(bool swapped, const std::string& extra_field = "") {
  std::string produce = R"({"id": 2, "kind": "unify", "lhs": 1, "functor": "a", "produces": [1]})";
  std::string consume = R"({"id": 3, "kind": "call", "callee": "use/1/0", "args": [1], "site": 1})";
  return std::string(R"({
  "format_version": 1,
  "entry": "main/0/0",
  "externals": ["use/1/0"],
  "procedures": [{
    "name": "main", "arity": 0, "mode": 0,)") +
         extra_field + R"(
    "vars": [{"id": 1, "name": "X"}],
    "head": [],
    "body": {"id": 1, "kind": "conj", "goals": [)" +
         (swapped ? consume + ", " + produce : produce + ", " + consume) + R"(]}
  }]
})";
}

const char* kProfile = R"({"format_version": 1, "sites": [{"site": 1, "count": 3, "total_cost": 12}]})";

bool has_rule(const std::vector<Diagnostic>& d, const std::string& rule) {
  return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.rule == rule; });
}

}  // namespace

TEST_CASE("program parses and validates") {
  Program p = parse_program(two_goal_program(false));
  Profile prof = parse_profile(kProfile);
  CHECK(validate(p, prof).empty());
  const Procedure* main = p.find(ProcKey{"main", 0, 0});
  REQUIRE(main != nullptr);
  const auto& goals = std::get<Conj>(main->body.node).goals;
  CHECK(goals[0].produced == VarSet{VarId{1}});
  CHECK(consumed_vars(goals[1]) == VarSet{VarId{1}});
  // X is local to the body, so the body as a whole produces nothing.
  CHECK(main->body.produced.empty());
  CHECK(goal_cost(main->body, prof) == 4.0);
}

TEST_CASE("syntax errors carry a line and column") {
  try {
    parse_program("{\n  \"format_version\": 1,\n  oops\n}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() >= 3);
  }
}

TEST_CASE("unknown fields are rejected with their path") {
  try {
    parse_program(two_goal_program(false, R"( "colour": "blue",)"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    std::string what = e.what();
    CHECK(what.find("/procedures/0") != std::string::npos);
    CHECK(what.find("colour") != std::string::npos);
  }
}

TEST_CASE("format version mismatch is rejected") {
  CHECK_THROWS_AS(parse_profile(R"({"format_version": 2, "sites": []})"), ParseError);
  CHECK_THROWS_AS(parse_profile(R"({"sites": []})"), ParseError);
}

TEST_CASE("profile values are checked") {
  CHECK_THROWS_AS(parse_profile(R"({"format_version": 1, "sites": [{"site": 1, "count": 1, "total_cost": -1}]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_profile(R"({"format_version": 1, "sites": [{"site": 1, "count": 1, "total_cost": 1},
                                   {"site": 1, "count": 2, "total_cost": 1}]})"),
                  ParseError);
}

TEST_CASE("producer order violation is reported") {
  Program p = parse_program(two_goal_program(true));
  auto d = validate(p, parse_profile(kProfile));
  REQUIRE(has_rule(d, "producer-order"));
  CHECK(d.front().str().find("goal-id 1") != std::string::npos);
}

TEST_CASE("missing and zero-count sites") {
  Program p = parse_program(two_goal_program(false));
  CHECK(has_rule(validate(p, parse_profile(R"({"format_version": 1, "sites": []})")),
                 "missing-profile-entry"));
  auto d = validate(p, parse_profile(R"({"format_version": 1, "sites": [{"site": 1, "count": 0, "total_cost": 0}]})"));
  CHECK(has_rule(d, "zero-count-site"));
}

TEST_CASE("switch arm counts must add up") {
  Fixture f = map_foldl(600, 1);
  const Procedure* mf = f.program.find(f.conj_proc);
  f.profile.goal_counts[mf->body.id] = 7;
  CHECK(has_rule(validate(f.program, f.profile), "count-mismatch"));
}

TEST_CASE("built-in fixtures validate cleanly") {
  for (const std::string& name : fixture_names()) {
    CAPTURE(name);
    Fixture f = make_fixture(name, 7);
    auto d = validate(f.program, f.profile);
    for (const auto& x : d) CAPTURE(x.str());
    CHECK(d.empty());
  }
  CHECK_THROWS_AS(make_fixture("nope"), Error);
}

TEST_CASE("json round trip") {
  for (const std::string& name : fixture_names()) {
    CAPTURE(name);
    Fixture f = make_fixture(name, 3);
    std::string prog = json_io::dump(program_to_json(f.program));
    std::string prof = json_io::dump(profile_to_json(f.profile));
    Program p2 = parse_program(prog);
    Profile q2 = parse_profile(prof);
    CHECK(json_io::dump(program_to_json(p2)) == prog);
    CHECK(json_io::dump(profile_to_json(q2)) == prof);
  }
}

TEST_CASE("map_foldl costs") {
  Fixture f = map_foldl();
  const Procedure* mf = f.program.find(f.conj_proc);
  GoalIndex index(mf->body);
  const Goal* conj = index.find(f.conj_goal);
  const auto& goals = std::get<Conj>(conj->node).goals;
  CHECK(goal_cost(goals[0], f.profile) == 1625050.0);
  CHECK(goal_cost(goals[1], f.profile) == 3.0);
  CHECK(goal_cost(goals[2], f.profile) == 1625054.0);
  CHECK(goal_cost(goals[0], f.profile) + goal_cost(goals[1], f.profile) == 1625053.0);
  // Acc1, M, F and Xs.
  CHECK(consumed_vars(goals[2]) == VarSet{VarId{1}, VarId{2}, VarId{7}, VarId{9}});
  auto w = branch_weights(mf->body, f.profile);
  CHECK(w.size() == 2);
  CHECK(w[0] + w[1] == doctest::Approx(1.0));
}

TEST_CASE("procedure keys") {
  auto k = ProcKey::parse("map_foldl/5/0");
  REQUIRE(k);
  CHECK(k->name == "map_foldl");
  CHECK(k->arity == 5);
  CHECK(k->str() == "map_foldl/5/0");
  CHECK_FALSE(ProcKey::parse("bad"));
  CHECK_FALSE(ProcKey::parse("x/-1/0"));
}
