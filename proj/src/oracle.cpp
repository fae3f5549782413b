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

#include "depar/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace depar {

std::vector<Partition> enumerate_partitions(std::size_t n) {
  if (n < 1 || n > 20) throw Error("enumerate_partitions: n must be in [1, 20]");
  std::vector<Partition> out;
  const std::uint32_t limit = 1u << (n - 1);
  out.reserve(limit);
  // Bit k set means a group boundary between conjunct k and k+1.
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    Partition p;
    std::size_t begin = 0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (mask & (1u << k)) {
        p.groups.push_back(Group{begin, k + 1});
        begin = k + 1;
      }
    }
    p.groups.push_back(Group{begin, n});
    out.push_back(std::move(p));
  }
  return out;
}

SearchResult brute_force_best(const std::vector<ConjunctInfo>& infos, Group span,
                              const OverheadParams& overheads) {
  if (span.begin >= span.end || span.end > infos.size()) {
    throw Error("brute_force_best: empty or out-of-range span");
  }
  SearchResult best;
  best.time = std::numeric_limits<double>::infinity();
  for (Partition p : enumerate_partitions(span.size())) {
    for (Group& g : p.groups) {
      g.begin += span.begin;
      g.end += span.begin;
    }
    double t = partition_time(infos, p, overheads);
    if (t < best.time) {
      best.time = t;
      best.partitions.clear();
    }
    if (t == best.time) best.partitions.insert(std::move(p));
  }
  return best;
}

std::string_view to_string(SimEventKind kind) {
  switch (kind) {
    case SimEventKind::spawn_spark: return "spawn_spark";
    case SimEventKind::start_conjunct: return "start_conjunct";
    case SimEventKind::signal: return "signal";
    case SimEventKind::wait: return "wait";
    case SimEventKind::wake: return "wake";
    case SimEventKind::barrier_arrive: return "barrier_arrive";
    case SimEventKind::finish: return "finish";
  }
  return "?";
}

std::string format_cost(double value) {
  if (std::isfinite(value) && value == std::floor(value) && std::fabs(value) < 9.0e15) {
    return std::to_string(static_cast<long long>(value));
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string SimResult::trace_text() const {
  std::ostringstream out;
  for (const SimEvent& e : trace) {
    out << format_cost(e.time) << ' ' << to_string(e.kind);
    if (e.conjunct > 0) out << " c" << e.conjunct;
    if (e.var) out << " V" << to_int(*e.var);
    if (e.engine >= 0) out << " e" << e.engine;
    out << '\n';
  }
  return out.str();
}

namespace {

enum class OpKind { work, spawn, signal, wait, barrier };

struct Op {
  OpKind kind;
  double duration = 0.0;
  VarId var{};
};

enum class Action { start, step, spawn_done, signal_done, wait_check, barrier_done };

struct Pending {
  double time;
  int priority;  // signals, then ordinary steps, then wait checks
  int sub;       // wait checks of earlier conjuncts first
  std::uint64_t seq;
  Action action;
  int ctx;
  VarId var{};

  bool operator>(const Pending& o) const {
    if (time != o.time) return time > o.time;
    if (priority != o.priority) return priority > o.priority;
    if (sub != o.sub) return sub > o.sub;
    return seq > o.seq;
  }
};

class Simulator {
 public:
  Simulator(const std::vector<ConjunctTimeline>& conjuncts, const OverheadParams& o,
            int engines)
      : o_(o), n_(static_cast<int>(conjuncts.size())), ctx_(conjuncts.size()) {
    for (int i = 0; i < n_; ++i) {
      std::vector<Op>& ops = ctx_[i].ops;
      if (i + 1 < n_) ops.push_back({OpKind::spawn});
      std::vector<ProdConsEvent> events = conjuncts[i].events;
      std::stable_sort(events.begin(), events.end(), event_less);
      double seq = 0.0;
      for (const ProdConsEvent& e : events) {
        double d = e.time - seq;
        seq += d;
        if (d != 0.0) ops.push_back({OpKind::work, d});
        ops.push_back({e.kind == EventKind::produce ? OpKind::signal : OpKind::wait, 0.0, e.var});
      }
      double rest = conjuncts[i].seq_cost - seq;
      if (rest != 0.0) ops.push_back({OpKind::work, rest});
      ops.push_back({OpKind::barrier});
    }
    for (int e = 1; e < engines; ++e) idle_.insert(e);
  }

  SimResult run() {
    if (n_ == 0) return {};
    ctx_[0].engine = 0;
    push(0.0, Action::start, 0);
    while (!queue_.empty()) {
      Pending p = queue_.top();
      queue_.pop();
      handle(p);
    }
    if (finished_ != n_) {
      throw InvariantViolation("simulation deadlocked: a consumer waits on a variable "
                               "that is never signalled");
    }
    SimResult r;
    double first = ctx_[0].end;
    for (const Context& c : ctx_) {
      r.conjunct_end.push_back(c.end);
      r.makespan = std::max(r.makespan, c.end);
    }
    // The entering context resumes after the barrier.
    if (r.makespan > first) r.makespan += o_.context_wakeup_delay;
    trace_.push_back({r.makespan, SimEventKind::finish, 0, std::nullopt, -1});
    r.trace = std::move(trace_);
    return r;
  }

 private:
  struct Context {
    std::vector<Op> ops;
    std::size_t pc = 0;
    int engine = -1;
    double end = 0.0;
  };

  void push(double t, Action a, int ctx, VarId var = VarId{}) {
    int priority = a == Action::signal_done ? 0 : a == Action::wait_check ? 2 : 1;
    int sub = a == Action::wait_check ? ctx : 0;
    queue_.push(Pending{t, priority, sub, seq_++, a, ctx, var});
  }

  void record(double t, SimEventKind kind, int ctx, std::optional<VarId> var = std::nullopt) {
    trace_.push_back({t, kind, ctx + 1, var, ctx_[ctx].engine});
  }

  void advance(int i, double t) {
    Context& c = ctx_[i];
    const Op& op = c.ops[c.pc];
    switch (op.kind) {
      case OpKind::work:
        ++c.pc;
        push(t + op.duration, Action::step, i);
        break;
      case OpKind::spawn:
        ++c.pc;
        push(t + o_.spark_cost, Action::spawn_done, i);
        break;
      case OpKind::signal:
        ++c.pc;
        push(t + o_.signal_cost, Action::signal_done, i, op.var);
        break;
      case OpKind::wait:
        push(t, Action::wait_check, i, op.var);
        break;
      case OpKind::barrier:
        ++c.pc;
        push(t + o_.barrier_cost, Action::barrier_done, i);
        break;
    }
  }

  void handle(const Pending& p) {
    const double t = p.time;
    const int i = p.ctx;
    Context& c = ctx_[i];
    switch (p.action) {
      case Action::start:
        record(t, SimEventKind::start_conjunct, i);
        advance(i, t);
        break;
      case Action::step:
        advance(i, t);
        break;
      case Action::spawn_done:
        record(t, SimEventKind::spawn_spark, i);
        sparks_.push_back(i + 1);
        dispatch(t);
        advance(i, t);
        break;
      case Action::signal_done: {
        record(t, SimEventKind::signal, i, p.var);
        futures_[p.var] = t;
        auto it = waiters_.find(p.var);
        if (it != waiters_.end()) {
          for (int w : it->second) runnable_.push_back(w);
          waiters_.erase(it);
        }
        dispatch(t);
        advance(i, t);
        break;
      }
      case Action::wait_check:
        record(t, SimEventKind::wait, i, p.var);
        if (futures_.count(p.var)) {
          ++c.pc;
          push(t + o_.wait_cost, Action::step, i);
        } else {
          waiters_[p.var].push_back(i);
          release(i);
          dispatch(t);
        }
        break;
      case Action::barrier_done:
        record(t, SimEventKind::barrier_arrive, i);
        c.end = t;
        ++finished_;
        release(i);
        dispatch(t);
        break;
    }
  }

  void release(int i) {
    idle_.insert(ctx_[i].engine);
    ctx_[i].engine = -1;
  }

  void dispatch(double t) {
    while (!idle_.empty() && (!runnable_.empty() || !sparks_.empty())) {
      int engine = *idle_.begin();
      idle_.erase(idle_.begin());
      if (!runnable_.empty()) {
        int i = runnable_.front();
        runnable_.pop_front();
        ctx_[i].engine = engine;
        record(t, SimEventKind::wake, i);
        ++ctx_[i].pc;  // past the wait
        push(t + o_.wait_cost + o_.context_wakeup_delay, Action::step, i);
      } else {
        int i = sparks_.front();
        sparks_.pop_front();
        ctx_[i].engine = engine;
        push(t + o_.spark_delay, Action::start, i);
      }
    }
  }

  OverheadParams o_;
  int n_;
  std::vector<Context> ctx_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<Pending>> queue_;
  std::uint64_t seq_ = 0;
  std::set<int> idle_;
  std::deque<int> sparks_;
  std::deque<int> runnable_;
  std::map<VarId, double> futures_;
  std::map<VarId, std::vector<int>> waiters_;
  std::vector<SimEvent> trace_;
  int finished_ = 0;
};

}  // namespace

SimResult simulate_execution(const std::vector<ConjunctTimeline>& conjuncts,
                             const OverheadParams& overheads, std::optional<int> num_engines) {
  overheads.check();
  if (num_engines && *num_engines < 1) throw Error("need at least one engine");
  int engines = num_engines ? *num_engines : static_cast<int>(conjuncts.size());
  return Simulator(conjuncts, overheads, std::max(engines, 1)).run();
}

}  // namespace depar
