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

// Built-in programs with profiles, and random generators for tests.

#ifndef DEPAR_FIXTURES_HPP_
#define DEPAR_FIXTURES_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "depar/ir.hpp"
#include "depar/overlap.hpp"
#include "depar/timing.hpp"

namespace depar {

struct Fixture {
  std::string name;
  Program program;
  Profile profile;
  // The conjunction the fixture is about.
  ProcKey conj_proc;
  GoalId conj_goal{};
};

// p produces A at 1 (cost 5); q consumes A at 2 (cost 4).
Fixture fig1_left();
// p produces A at 4 (cost 5); q consumes A at 1 (cost 4).
Fixture fig1_right();
// map_foldl over a list; per iteration M costs 1,625,050, F costs 3 and
// the recursive call 1,625,054 on average.
Fixture map_foldl(std::uint64_t list_length = 600, std::uint64_t entries = 1);
// main runs p and q in parallel; p's body is itself parallelisable.
Fixture two_level();
// Two recursive calls on every recursive path.
Fixture quicksort_like(std::uint64_t entries = 2, std::uint64_t calls_per_site = 20);
// Two recursive clauses with one recursive call each.
Fixture multi_clause(std::uint64_t entries = 2, std::uint64_t r1 = 30, std::uint64_t r2 = 10);
// Paths with one and with two recursive calls.
Fixture irregular_recursion();
// Everything below the call cost threshold.
Fixture cheap_program();
Fixture random_fixture(std::uint64_t seed);

std::vector<std::string> fixture_names();
// Throws Error for an unknown name; seed is used by "random".
Fixture make_fixture(const std::string& name, std::uint64_t seed = 1);

// Deterministic integer in [lo, hi] that does not depend on the standard
// library's distribution implementations.
std::int64_t uniform(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi);

struct RandomShape {
  int max_conjuncts = 6;
  int max_shared = 3;
  int max_cost = 100;
};

// Conjunct timelines with integer costs and times; every consumed variable
// is produced by an earlier conjunct.
std::vector<ConjunctTimeline> random_timelines(std::mt19937_64& rng, const RandomShape& shape);
std::vector<ConjunctInfo> random_infos(std::mt19937_64& rng, const RandomShape& shape);
OverheadParams random_overheads(std::mt19937_64& rng, int max_value);

}  // namespace depar

#endif  // DEPAR_FIXTURES_HPP_
