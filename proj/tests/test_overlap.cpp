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
#include <numeric>
#include <random>

#include "depar/fixtures.hpp"
#include "depar/overlap.hpp"
#include "doctest.h"

using namespace depar;

namespace {

const VarId kA{1};

std::vector<ConjunctTimeline> fig1_left_timelines() {
  return {{5.0, {{kA, 1.0, EventKind::produce}}}, {4.0, {{kA, 2.0, EventKind::consume}}}};
}

std::vector<ConjunctTimeline> fig1_right_timelines() {
  return {{5.0, {{kA, 4.0, EventKind::produce}}}, {4.0, {{kA, 1.0, EventKind::consume}}}};
}

double seq_sum(const std::vector<ConjunctTimeline>& c) {
  double s = 0.0;
  for (const auto& t : c) s += t.seq_cost;
  return s;
}

double max_cost(const std::vector<ConjunctTimeline>& c) {
  double m = 0.0;
  for (const auto& t : c) m = std::max(m, t.seq_cost);
  return m;
}

}  // namespace

TEST_CASE("fig1 with zero overheads") {
  SUBCASE("left") {
    ParTimeDetail d = find_par_time_simple_detail(fig1_left_timelines());
    CHECK(d.total == 5.0);
    CHECK(d.conjunct_end[0] == 5.0);
    CHECK(d.conjunct_end[1] == 4.0);
  }
  SUBCASE("right") {
    ParTimeDetail d = find_par_time_simple_detail(fig1_right_timelines());
    CHECK(d.total == 7.0);
    CHECK(d.conjunct_end[1] == 7.0);
    CHECK(d.blocked[1]);
  }
  SUBCASE("independent") {
    CHECK(find_par_time_simple({{5.0, {}}, {4.0, {}}}) == 5.0);
  }
}

TEST_CASE("fig1 right with overheads") {
  OverheadParams o;
  o.spark_cost = 1;
  o.spark_delay = 2;
  o.signal_cost = 1;
  o.wait_cost = 1;
  o.context_wakeup_delay = 3;
  o.barrier_cost = 1;
  ParTimeDetail d = find_par_time_detail(fig1_right_timelines(), o);
  CHECK(d.prod_time.at(kA) == 6.0);
  CHECK(d.conjunct_end[0] == 8.0);
  CHECK(d.conjunct_end[1] == 14.0);
  CHECK(d.first_conj_time == 8.0);
  CHECK(d.total == 17.0);
}

TEST_CASE("single conjunct pays only the barrier") {
  OverheadParams o{3, 4, 5, 6, 7, 8};
  CHECK(find_par_time({{9.0, {}}}, o) == 17.0);
}

TEST_CASE("speedup") {
  CHECK(speedup(fig1_left_timelines(), OverheadParams::ZERO) == 1.8);
  CHECK(speedup(fig1_right_timelines(), OverheadParams::ZERO) == doctest::Approx(9.0 / 7.0));
  CHECK(speedup({{50.0, {}}, {50.0, {}}}, OverheadParams::ZERO) == 2.0);
  CHECK_THROWS_WITH_AS(speedup({{0.0, {}}, {0.0, {}}}, OverheadParams::ZERO),
                       "empty/zero-cost conjunction", Error);
  CHECK_THROWS_AS(speedup({}, OverheadParams::ZERO), Error);
}

TEST_CASE("consuming an unrecorded variable is an invariant violation") {
  std::vector<ConjunctTimeline> c{{4.0, {{kA, 1.0, EventKind::consume}}}, {5.0, {{kA, 2.0, EventKind::produce}}}};
  CHECK_THROWS_AS(find_par_time_simple(c), InvariantViolation);
}

TEST_CASE("negative overheads are rejected") {
  OverheadParams o;
  o.wait_cost = -1;
  CHECK_THROWS_AS(find_par_time(fig1_left_timelines(), o), Error);
}

TEST_CASE("property: zero overheads match the simple predictor") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 500; ++trial) {
    auto c = random_timelines(rng, RandomShape{});
    CAPTURE(trial);
    CHECK(find_par_time(c, OverheadParams::ZERO) == find_par_time_simple(c));
  }
}

TEST_CASE("property: no super-linear prediction and no worse than sequential") {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 500; ++trial) {
    auto c = random_timelines(rng, RandomShape{});
    CAPTURE(trial);
    double t = find_par_time_simple(c);
    CHECK(max_cost(c) <= t);
    CHECK(t <= seq_sum(c));
  }
}

TEST_CASE("property: chunk accounting") {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 300; ++trial) {
    for (const auto& t : random_timelines(rng, RandomShape{})) {
      double last = 0.0;
      for (const auto& e : t.events) {
        CHECK(e.time >= last);
        last = e.time;
      }
      CHECK(last <= t.seq_cost);
    }
  }
}

TEST_CASE("property: increasing any overhead never decreases the prediction") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 300; ++trial) {
    auto c = random_timelines(rng, RandomShape{});
    OverheadParams o = random_overheads(rng, 20);
    double before = find_par_time(c, o);
    for (auto field : {&OverheadParams::spark_cost, &OverheadParams::spark_delay,
                       &OverheadParams::signal_cost, &OverheadParams::wait_cost,
                       &OverheadParams::context_wakeup_delay, &OverheadParams::barrier_cost}) {
      OverheadParams bigger = o;
      bigger.*field += static_cast<double>(uniform(rng, 1, 10));
      CAPTURE(trial);
      CHECK(find_par_time(c, bigger) >= before);
    }
  }
}

TEST_CASE("property: barrier cost is monotone") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 300; ++trial) {
    auto c = random_timelines(rng, RandomShape{});
    OverheadParams o = random_overheads(rng, 20);
    double before = find_par_time(c, o);
    o.barrier_cost += static_cast<double>(uniform(rng, 1, 10));
    CHECK(find_par_time(c, o) >= before);
  }
}

TEST_CASE("blocking penalty makes the prediction non-monotone in delays") {
  // The consumer wants A at 4, one unit before it is signalled, and pays the
  // wakeup; starting it one unit later avoids the block.
  std::vector<ConjunctTimeline> c{{10.0, {{kA, 5.0, EventKind::produce}}},
                                  {10.0, {{kA, 4.0, EventKind::consume}}}};
  OverheadParams o;
  o.context_wakeup_delay = 100;
  CHECK(find_par_time(c, o) == 211.0);
  o.spark_delay = 1;
  CHECK(find_par_time(c, o) == 111.0);
}

TEST_CASE("property: accumulator matches a from-scratch prediction") {
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 500; ++trial) {
    auto c = random_timelines(rng, RandomShape{});
    OverheadParams o = random_overheads(rng, 10);
    ParTimeAccumulator acc(o);
    for (std::size_t i = 0; i + 1 < c.size(); ++i) acc.close(c[i]);
    CAPTURE(trial);
    CHECK(acc.size() == c.size() - 1);
    CHECK(acc.finish(c.back()) == find_par_time(c, o));
  }
}

TEST_CASE("default overheads are valid and nonzero") {
  OverheadParams d = OverheadParams::defaults();
  CHECK_NOTHROW(d.check());
  CHECK_FALSE(d == OverheadParams::ZERO);
}
