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

#include "depar/overlap.hpp"

#include <algorithm>
#include <cmath>

namespace depar {

const OverheadParams OverheadParams::ZERO{};

OverheadParams OverheadParams::defaults() {
  OverheadParams p;
  p.spark_cost = 50;
  p.spark_delay = 100;
  p.signal_cost = 5;
  p.wait_cost = 5;
  p.context_wakeup_delay = 100;
  p.barrier_cost = 10;
  return p;
}

void OverheadParams::check() const {
  for (double v : {spark_cost, spark_delay, signal_cost, wait_cost, context_wakeup_delay,
                   barrier_cost}) {
    if (!std::isfinite(v) || v < 0.0) throw Error("overheads must be finite and nonnegative");
  }
}

namespace {

struct Walk {
  double end = 0.0;
  bool blocked = false;
};

// One conjunct of the complete algorithm, starting at `start`.
Walk walk_conjunct(const ConjunctTimeline& conj, double start, bool is_last,
                   const OverheadParams& o, std::map<VarId, double>& prod) {
  Walk w;
  double par = start;
  if (!is_last) par += o.spark_cost;
  double seq = 0.0;
  std::vector<ProdConsEvent> events = conj.events;
  std::stable_sort(events.begin(), events.end(), event_less);
  for (const ProdConsEvent& e : events) {
    double duration = e.time - seq;
    seq += duration;
    if (e.kind == EventKind::produce) {
      par += duration + o.signal_cost;
      prod[e.var] = par;
    } else {
      auto it = prod.find(e.var);
      if (it == prod.end()) {
        throw InvariantViolation("V" + std::to_string(to_int(e.var)) +
                                 " is consumed before any earlier conjunct produces it");
      }
      double want = par + duration;
      par = std::max(want, it->second) + o.wait_cost;
      if (want < it->second) {
        par += o.context_wakeup_delay;
        w.blocked = true;
      }
    }
  }
  par += (conj.seq_cost - seq) + o.barrier_cost;
  w.end = par;
  return w;
}

}  // namespace

ParTimeDetail find_par_time_detail(const std::vector<ConjunctTimeline>& conjuncts,
                                   const OverheadParams& o) {
  o.check();
  ParTimeDetail d;
  const std::size_t n = conjuncts.size();
  for (std::size_t i = 0; i < n; ++i) {
    double start = (o.spark_cost + o.spark_delay) * static_cast<double>(i);
    Walk w = walk_conjunct(conjuncts[i], start, i + 1 == n, o, d.prod_time);
    d.conjunct_end.push_back(w.end);
    d.blocked.push_back(w.blocked);
    if (i == 0) d.first_conj_time = w.end;
    d.total = std::max(d.total, w.end);
  }
  if (d.total > d.first_conj_time) d.total += o.context_wakeup_delay;
  return d;
}

double find_par_time(const std::vector<ConjunctTimeline>& conjuncts, const OverheadParams& o) {
  return find_par_time_detail(conjuncts, o).total;
}

ParTimeDetail find_par_time_simple_detail(const std::vector<ConjunctTimeline>& conjuncts) {
  ParTimeDetail d;
  for (std::size_t i = 0; i < conjuncts.size(); ++i) {
    const ConjunctTimeline& conj = conjuncts[i];
    double par = 0.0;
    double seq = 0.0;
    bool blocked = false;
    std::vector<ProdConsEvent> events = conj.events;
    std::stable_sort(events.begin(), events.end(), event_less);
    for (const ProdConsEvent& e : events) {
      double duration = e.time - seq;
      seq += duration;
      if (e.kind == EventKind::produce) {
        par += duration;
        d.prod_time[e.var] = par;
      } else {
        auto it = d.prod_time.find(e.var);
        if (it == d.prod_time.end()) {
          throw InvariantViolation("V" + std::to_string(to_int(e.var)) +
                                   " is consumed before any earlier conjunct produces it");
        }
        double want = par + duration;
        blocked = blocked || want < it->second;
        par = std::max(want, it->second);
      }
    }
    par += conj.seq_cost - seq;
    d.conjunct_end.push_back(par);
    d.blocked.push_back(blocked);
    if (i == 0) d.first_conj_time = par;
    d.total = std::max(d.total, par);
  }
  return d;
}

double find_par_time_simple(const std::vector<ConjunctTimeline>& conjuncts) {
  return find_par_time_simple_detail(conjuncts).total;
}

double speedup(const std::vector<ConjunctTimeline>& conjuncts, const OverheadParams& o) {
  double seq = 0.0;
  for (const ConjunctTimeline& c : conjuncts) seq += c.seq_cost;
  if (seq <= 0.0) throw Error("empty/zero-cost conjunction");
  return seq / find_par_time(conjuncts, o);
}

double ParTimeAccumulator::run(const ConjunctTimeline& conjunct, bool is_last,
                               std::map<VarId, double>& prod) const {
  double start = (overheads_.spark_cost + overheads_.spark_delay) * static_cast<double>(count_);
  return walk_conjunct(conjunct, start, is_last, overheads_, prod).end;
}

void ParTimeAccumulator::close(const ConjunctTimeline& conjunct) {
  double end = run(conjunct, false, prod_time_);
  if (count_ == 0) first_end_ = end;
  max_end_ = std::max(max_end_, end);
  ++count_;
}

double ParTimeAccumulator::finish(const ConjunctTimeline& last) const {
  std::map<VarId, double> prod = prod_time_;
  double end = run(last, true, prod);
  double first = count_ == 0 ? end : first_end_;
  double total = std::max(max_end_, end);
  if (total > first) total += overheads_.context_wakeup_delay;
  return total;
}

}  // namespace depar
