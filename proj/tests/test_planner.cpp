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
#include "depar/oracle.hpp"
#include "depar/planner.hpp"
#include "doctest.h"

using namespace depar;

namespace {

const VarId kA{1};

Partition part(std::vector<Group> groups) { return Partition{std::move(groups)}; }

struct Planned {
  Fixture fixture;
  std::optional<Advice> advice;
  PlanTrace trace;
};

Planned plan(Fixture f, const PlannerParams& params) {
  Planned out{std::move(f), std::nullopt, {}};
  TimingModel timing(out.fixture.program, out.fixture.profile);
  CallGraph graph(out.fixture.program);
  const Procedure* proc = out.fixture.program.find(out.fixture.conj_proc);
  REQUIRE(proc != nullptr);
  GoalIndex index(proc->body);
  const Goal* conj = index.find(out.fixture.conj_goal);
  REQUIRE(conj != nullptr);
  out.advice = best_parallelisation(timing, graph, *proc, *conj, params, &out.trace);
  return out;
}

PlannerParams zero_overheads() {
  PlannerParams p;
  p.overheads = OverheadParams::ZERO;
  return p;
}

std::vector<ConjunctInfo> map_foldl_infos() {
  Fixture f = map_foldl();
  TimingModel timing(f.program, f.profile);
  const Procedure* proc = f.program.find(f.conj_proc);
  GoalIndex index(proc->body);
  return ConjunctionModel(timing, *index.find(f.conj_goal)).infos();
}

}  // namespace

TEST_CASE("select_middle") {
  CHECK(select_middle({1, 100, 5, 200, 1}, 50) == Group{1, 4});
  CHECK(select_middle({100, 200}, 50) == Group{0, 2});
  CHECK_THROWS_AS(select_middle({100, 1, 1}, 50), NotACandidate);
  CHECK(select_middle({50, 50}, 50) == Group{0, 2});
}

TEST_CASE("partition text") {
  CHECK(parse_partition("1,2|3") == part({{0, 2}, {2, 3}}));
  CHECK(part({{0, 2}, {2, 3}}).str() == "(c1, c2) & c3");
  CHECK(part({{0, 1}, {1, 2}, {2, 3}}).str() == "c1 & c2 & c3");
  CHECK_THROWS_AS(parse_partition("1,3|2"), Error);
  CHECK_THROWS_AS(parse_partition(""), Error);
  CHECK_THROWS_AS(parse_partition("1,,2"), Error);
}

TEST_CASE("search over two conjuncts evaluates both shapes") {
  std::vector<ConjunctInfo> infos{{5.0, {}, {}}, {5.0, {}, {}}};
  SearchBudget budget;
  SearchResult r = find_best_partition(infos, {0, 2}, OverheadParams::ZERO, budget);
  CHECK(budget.num_evals == 2);
  CHECK(r.time == 5.0);
  CHECK(r.partitions == std::set<Partition>{part({{0, 1}, {1, 2}})});
}

TEST_CASE("map_foldl search picks (M, F) & Rec") {
  std::vector<ConjunctInfo> infos = map_foldl_infos();
  REQUIRE(infos.size() == 3);
  SearchBudget budget;
  SearchResult r = find_best_partition(infos, {0, 3}, OverheadParams::ZERO, budget);
  CHECK(r.time == 1625056.0);
  CHECK(preferred_partition(r.partitions) == part({{0, 2}, {2, 3}}));
  SearchResult brute = brute_force_best(infos, {0, 3}, OverheadParams::ZERO);
  CHECK(brute.time == r.time);
  CHECK(brute.partitions == r.partitions);
  CHECK(partition_time(infos, part({{0, 3}}), OverheadParams::ZERO) == 3250107.0);
}

TEST_CASE("map_foldl with default overheads") {
  std::vector<ConjunctInfo> infos = map_foldl_infos();
  OverheadParams o = OverheadParams::defaults();
  double best = partition_time(infos, part({{0, 2}, {2, 3}}), o);
  CHECK(best == 1625319.0);
  CHECK(partition_time(infos, part({{0, 1}, {1, 2}, {2, 3}}), o) == 1625469.0);
  CHECK(partition_time(infos, part({{0, 3}}), o) > best);
  SearchBudget budget;
  SearchResult r = find_best_partition(infos, {0, 3}, o, budget);
  CHECK(r.partitions == std::set<Partition>{part({{0, 2}, {2, 3}})});
}

TEST_CASE("search equals brute force with an unlimited budget") {
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 300; ++trial) {
    RandomShape shape;
    shape.max_conjuncts = 10;
    auto infos = random_infos(rng, shape);
    OverheadParams o = trial % 2 == 0 ? OverheadParams::ZERO : random_overheads(rng, 20);
    Group span{0, infos.size()};
    SearchBudget budget{std::numeric_limits<std::uint64_t>::max(), 0};
    SearchResult r = find_best_partition(infos, span, o, budget);
    SearchResult b = brute_force_best(infos, span, o);
    CAPTURE(trial);
    CHECK(r.time == b.time);
    CHECK(r.partitions == b.partitions);
    for (const Partition& p : r.partitions) CHECK(partition_time(infos, p, o) == r.time);
  }
}

TEST_CASE("pruning and incremental evaluation do not change results") {
  std::mt19937_64 rng(707);
  for (int trial = 0; trial < 300; ++trial) {
    RandomShape shape;
    shape.max_conjuncts = 8;
    auto infos = random_infos(rng, shape);
    OverheadParams o = random_overheads(rng, 15);
    Group span{0, infos.size()};
    SearchBudget b1{std::numeric_limits<std::uint64_t>::max(), 0};
    SearchBudget b2 = b1;
    SearchResult fast = find_best_partition(infos, span, o, b1, {true, true});
    SearchResult slow = find_best_partition(infos, span, o, b2, {false, false});
    CAPTURE(trial);
    CHECK(fast.time == slow.time);
    CHECK(fast.partitions == slow.partitions);
  }
}

TEST_CASE("budget counts evaluation pairs") {
  std::mt19937_64 rng(808);
  RandomShape shape;
  shape.max_conjuncts = 10;
  for (int trial = 0; trial < 50; ++trial) {
    auto infos = random_infos(rng, shape);
    SearchBudget budget{1, 0};
    find_best_partition(infos, {0, infos.size()}, OverheadParams::ZERO, budget);
    CHECK(budget.num_evals == 2 * (infos.size() - 1));
  }
}

TEST_CASE("shrink_edges") {
  OverheadParams o = OverheadParams::defaults();
  SUBCASE("a group that produces at its very end is moved out") {
    std::vector<ConjunctInfo> infos{{10.0, {{kA, 10.0}}, {}}, {10.0, {}, {{kA, {0.0, 0.0}}}}};
    CHECK(shrink_edges(infos, part({{0, 1}, {1, 2}}), o) == part({{1, 2}}));
  }
  SUBCASE("independent equal groups stay") {
    std::vector<ConjunctInfo> infos{{10000.0, {}, {}}, {10000.0, {}, {}}};
    CHECK(shrink_edges(infos, part({{0, 1}, {1, 2}}), o) == part({{0, 1}, {1, 2}}));
  }
}

TEST_CASE("expand_edges") {
  OverheadParams o = OverheadParams::ZERO;
  SUBCASE("a cheap follower of the earliest finisher is free") {
    // Groups (c2) & (c3) with c3 finishing first; c4 is absorbed into c3.
    std::vector<ConjunctInfo> infos{{1.0, {}, {}}, {100.0, {}, {}}, {50.0, {}, {}}, {5.0, {}, {}}};
    Partition p = part({{1, 2}, {2, 3}});
    Partition e = expand_edges(infos, p, 0, 4, o);
    CHECK(e.groups.back() == Group{2, 4});
    CHECK(partition_time(infos, e, o) == partition_time(infos, p, o));
  }
  SUBCASE("a producer that another group waits on is not absorbed") {
    std::vector<ConjunctInfo> infos{{5.0, {{kA, 5.0}}, {}},
                                    {100.0, {}, {}},
                                    {100.0, {}, {{kA, {0.0, 0.0}}}}};
    Partition p = part({{1, 2}, {2, 3}});
    CHECK(expand_edges(infos, p, 0, 3, o) == p);
  }
}

TEST_CASE("property: shrink and expand never increase the predicted time") {
  std::mt19937_64 rng(909);
  for (int trial = 0; trial < 300; ++trial) {
    RandomShape shape;
    shape.max_conjuncts = 8;
    auto infos = random_infos(rng, shape);
    if (infos.size() < 3) continue;
    OverheadParams o = random_overheads(rng, 20);
    std::size_t n = infos.size();
    std::size_t lo = static_cast<std::size_t>(uniform(rng, 0, static_cast<std::int64_t>(n) - 2));
    std::size_t hi = static_cast<std::size_t>(uniform(rng, static_cast<std::int64_t>(lo) + 2,
                                                      static_cast<std::int64_t>(n)));
    std::vector<Group> groups;
    std::size_t b = lo;
    while (b < hi) {
      std::size_t e = static_cast<std::size_t>(uniform(rng, static_cast<std::int64_t>(b) + 1,
                                                       static_cast<std::int64_t>(hi)));
      groups.push_back({b, e});
      b = e;
    }
    Partition p = part(groups);
    double before = conjunction_time(infos, p, o);
    Partition s = shrink_edges(infos, p, o);
    double shrunk = conjunction_time(infos, s, o);
    CAPTURE(trial);
    CHECK(shrunk <= before);
    Partition x = expand_edges(infos, s, 0, n, o);
    CHECK(conjunction_time(infos, x, o) <= shrunk);
  }
}

TEST_CASE("recursion formulas") {
  RecursionInfo single{RecursionClass::single, 2, {SiteId{1}}, {20}};
  CHECK(recursion_depth(single) == 10.0);
  CHECK(extrapolated_saving(4, single) == 40.0);
  RecursionInfo twice{RecursionClass::doubly, 2, {SiteId{1}, SiteId{2}}, {20, 20}};
  CHECK(extrapolated_saving(4, twice) == 20.0);
  RecursionInfo multi{RecursionClass::multi_clause, 2, {SiteId{1}, SiteId{2}}, {30, 10}};
  CHECK(extrapolated_saving(4, multi, 0) == 4.0 * 15.0 * 0.75);
  CHECK(extrapolated_saving(4, multi, 1) == 4.0 * 5.0 * 0.25);
  RecursionInfo none_seen{RecursionClass::single, 0, {SiteId{1}}, {0}};
  CHECK_THROWS_AS(extrapolated_saving(4, none_seen), Error);
  RecursionInfo irregular{RecursionClass::irregular, 2, {SiteId{1}}, {20}};
  CHECK_THROWS_AS(extrapolated_saving(4, irregular), Unsupported);
  CHECK(extrapolated_saving(4, RecursionInfo{}) == 4.0);
}

TEST_CASE("classify_recursion on fixtures") {
  auto classify = [](const Fixture& f) {
    return classify_recursion(f.program, f.profile, CallGraph(f.program), f.conj_proc);
  };
  SUBCASE("map_foldl") {
    Fixture f = map_foldl(600, 1);
    RecursionInfo r = classify(f);
    CHECK(r.cls == RecursionClass::single);
    CHECK(r.entries == 1.0);
    CHECK(r.counts == std::vector<double>{600.0});
    CHECK(recursion_depth(r) == 600.0);
  }
  SUBCASE("quicksort") {
    RecursionInfo r = classify(quicksort_like(2, 20));
    CHECK(r.cls == RecursionClass::doubly);
    CHECK(r.entries == 2.0);
    CHECK(recursion_depth(r) == 10.0);
  }
  SUBCASE("multi-clause") {
    RecursionInfo r = classify(multi_clause(2, 30, 10));
    CHECK(r.cls == RecursionClass::multi_clause);
    CHECK(r.counts == std::vector<double>{30.0, 10.0});
  }
  SUBCASE("irregular") { CHECK(classify(irregular_recursion()).cls == RecursionClass::irregular); }
  SUBCASE("not recursive") { CHECK(classify(two_level()).cls == RecursionClass::none); }
  CHECK(parse_recursion_class("multi_clause_single") == RecursionClass::multi_clause);
  CHECK(to_string(RecursionClass::doubly) == "double");
}

TEST_CASE("throttling condition") {
  CHECK(throttling_condition(4) == 32);
  CHECK(throttling_condition(1) == 8);
  CHECK(throttling_condition(4, 16) == 16);
  CHECK_THROWS_AS(throttling_condition(0), Error);
}

TEST_CASE("best_parallelisation") {
  SUBCASE("map_foldl with zero overheads") {
    Planned p = plan(map_foldl(), zero_overheads());
    REQUIRE(p.advice);
    CHECK(p.advice->form() == "(c1, c2) & c3");
    CHECK(p.advice->seq_time == 3250107.0);
    CHECK(p.advice->par_time == 1625056.0);
    CHECK(p.advice->speedup > 1.01);
    CHECK(p.advice->recursion == RecursionClass::single);
    CHECK(p.advice->throttle);
    REQUIRE(p.advice->extrapolated_saving);
    CHECK(*p.advice->extrapolated_saving == (3250107.0 - 1625056.0) * 600.0);
  }
  SUBCASE("fig1 right with overheads") {
    CHECK_FALSE(plan(fig1_right(), PlannerParams{}).advice);
  }
  SUBCASE("independent pair") {
    PlannerParams params = zero_overheads();
    Planned p = plan(two_level(), params);
    REQUIRE(p.advice);
    CHECK(p.advice->speedup == 2.0);
    CHECK(p.advice->form() == "c1 & c2");
    CHECK_FALSE(p.advice->throttle);
    CHECK_FALSE(p.advice->extrapolated_saving);
  }
  SUBCASE("irregular recursion gives no advice") {
    Planned p = plan(irregular_recursion(), zero_overheads());
    CHECK_FALSE(p.advice);
    CHECK(p.trace.rejection.find("irregular") != std::string::npos);
  }
  SUBCASE("cheap conjunction is not a candidate") {
    PlannerParams params = zero_overheads();
    params.expensive_threshold = 5000;
    CHECK_FALSE(plan(cheap_program(), params).advice);
  }
}

TEST_CASE("property: emitted advice meets the speedup threshold") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    PlannerParams params;
    std::mt19937_64 rng(seed);
    params.overheads = random_overheads(rng, 200);
    params.expensive_threshold = 100;
    Planned p = plan(random_fixture(seed), params);
    if (p.advice) {
      CAPTURE(seed);
      CHECK(p.advice->speedup >= 1.01);
      CHECK(p.advice->speedup == p.advice->seq_time / p.advice->par_time);
    }
  }
}

TEST_CASE("budget monotonicity") {
  std::mt19937_64 rng(1212);
  int violations = 0;
  for (int trial = 0; trial < 300; ++trial) {
    RandomShape shape;
    shape.max_conjuncts = 10;
    auto infos = random_infos(rng, shape);
    OverheadParams o = random_overheads(rng, 20);
    Group span{0, infos.size()};
    double previous = std::numeric_limits<double>::infinity();
    for (std::uint64_t b : {1, 4, 16, 64, 256, 1024}) {
      SearchBudget budget{b, 0};
      double t = find_best_partition(infos, span, o, budget).time;
      if (t > previous) ++violations;
      previous = t;
    }
  }
  CHECK(violations == 0);
}
