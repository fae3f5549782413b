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

#include "depar/planner.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace depar {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string group_str(const Group& g) {
  std::string s;
  for (std::size_t i = g.begin; i < g.end; ++i) {
    if (i > g.begin) s += ", ";
    s += "c" + std::to_string(i + 1);
  }
  return g.size() > 1 ? "(" + s + ")" : s;
}

double cost_sum(const std::vector<ConjunctInfo>& infos, std::size_t begin, std::size_t end) {
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) sum += infos[i].cost;
  return sum;
}

ConjunctInfo group_info(const std::vector<ConjunctInfo>& infos, const Group& g) {
  return sequence(std::vector<ConjunctInfo>(infos.begin() + static_cast<std::ptrdiff_t>(g.begin),
                                            infos.begin() + static_cast<std::ptrdiff_t>(g.end)));
}

ConjunctTimeline group_timeline(const std::vector<ConjunctInfo>& infos, const Group& g,
                                std::size_t partition_begin, std::size_t horizon, bool last) {
  ConjunctInfo info = group_info(infos, g);
  ConjunctTimeline t;
  t.seq_cost = info.cost;
  if (!last) {
    for (const auto& [v, time] : info.produces) {
      for (std::size_t k = g.end; k < horizon; ++k) {
        if (infos[k].consumes.count(v)) {
          t.events.push_back({v, time, EventKind::produce});
          break;
        }
      }
    }
  }
  for (const auto& [v, a] : info.consumes) {
    for (std::size_t k = partition_begin; k < g.begin; ++k) {
      if (infos[k].produces.count(v)) {
        t.events.push_back({v, a.base, EventKind::consume});
        break;
      }
    }
  }
  std::sort(t.events.begin(), t.events.end(), event_less);
  return t;
}

}  // namespace

std::string Partition::str() const {
  std::string s;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (i > 0) s += " & ";
    s += group_str(groups[i]);
  }
  return s;
}

void Partition::check() const {
  if (groups.empty()) throw InvariantViolation("partition has no groups");
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].begin >= groups[i].end) throw InvariantViolation("empty group in partition");
    if (i > 0 && groups[i].begin != groups[i - 1].end) {
      throw InvariantViolation("partition groups are not contiguous");
    }
  }
}

Partition parse_partition(std::string_view text) {
  Partition p;
  std::size_t expected = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t bar = text.find('|', pos);
    std::string_view group = text.substr(pos, bar == std::string_view::npos ? text.size() - pos
                                                                            : bar - pos);
    Group g{expected, expected};
    std::size_t start = 0;
    while (start <= group.size()) {
      std::size_t comma = group.find(',', start);
      std::string_view item = group.substr(
          start, comma == std::string_view::npos ? group.size() - start : comma - start);
      while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
      while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
      std::size_t n = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), n);
      if (ec != std::errc() || ptr != item.data() + item.size() || n != expected + 1) {
        throw ParseError("bad partition '" + std::string(text) +
                         "': expected conjunct " + std::to_string(expected + 1));
      }
      ++expected;
      g.end = expected;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    p.groups.push_back(g);
    if (bar == std::string_view::npos) break;
    pos = bar + 1;
  }
  return p;
}

Group select_middle(const std::vector<double>& costs, double expensive_threshold) {
  std::optional<std::size_t> first;
  std::size_t last = 0;
  int expensive = 0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (costs[i] >= expensive_threshold) {
      if (!first) first = i;
      last = i;
      ++expensive;
    }
  }
  if (expensive < 2) {
    std::ostringstream msg;
    msg << "fewer than two conjuncts cost at least " << expensive_threshold;
    throw NotACandidate(msg.str());
  }
  return {*first, last + 1};
}

std::vector<ConjunctTimeline> partition_timelines(const std::vector<ConjunctInfo>& infos,
                                                  const Partition& partition,
                                                  std::size_t horizon) {
  std::vector<ConjunctTimeline> out;
  for (std::size_t i = 0; i < partition.groups.size(); ++i) {
    out.push_back(group_timeline(infos, partition.groups[i], partition.begin(), horizon,
                                 i + 1 == partition.groups.size()));
  }
  return out;
}

double partition_time(const std::vector<ConjunctInfo>& infos, const Partition& partition,
                      const OverheadParams& overheads) {
  return find_par_time(partition_timelines(infos, partition, partition.end()), overheads);
}

double conjunction_time(const std::vector<ConjunctInfo>& infos, const Partition& partition,
                        const OverheadParams& overheads) {
  return cost_sum(infos, 0, partition.begin()) + partition_time(infos, partition, overheads) +
         cost_sum(infos, partition.end(), infos.size());
}

namespace {

class Searcher {
 public:
  Searcher(const std::vector<ConjunctInfo>& infos, Group span, const OverheadParams& overheads,
           SearchBudget& budget, SearchOptions options)
      : infos_(infos),
        span_(span),
        overheads_(overheads),
        bound_overheads_(without_wakeup(overheads)),
        budget_(budget),
        options_(options) {}

  struct Node {
    Partition partition;
    ParTimeAccumulator closed;  // all groups but the last
    ParTimeAccumulator closed_bound;
    double time = 0.0;
    // Time without wakeup delays. Partial times can drop when a later start
    // avoids a block, but this bound never decreases as the partition grows
    // and never exceeds the time of any completion.
    double bound = 0.0;
  };

  SearchResult run() {
    Partition init{{Group{span_.begin, span_.begin + 1}}};
    Node root{init, ParTimeAccumulator(overheads_), ParTimeAccumulator(bound_overheads_)};
    score(root);
    auto result = search(root, span_.begin + 1);
    return *result;  // the first branch is never pruned at the root
  }

 private:
  double evaluate(const Partition& p, const ParTimeAccumulator& closed,
                  const OverheadParams& o) const {
    if (!options_.incremental) {
      return find_par_time(partition_timelines(infos_, p, span_.end), o);
    }
    return closed.finish(group_timeline(infos_, p.groups.back(), p.begin(), span_.end, true));
  }

  void score(Node& node) const {
    node.time = evaluate(node.partition, node.closed, overheads_);
    node.bound = overheads_.context_wakeup_delay == 0.0
                     ? node.time
                     : evaluate(node.partition, node.closed_bound, bound_overheads_);
  }

  static OverheadParams without_wakeup(OverheadParams o) {
    o.context_wakeup_delay = 0.0;
    return o;
  }

  std::optional<SearchResult> search(const Node& node, std::size_t next) {
    if (next == span_.end) {
      best_complete_ = std::min(best_complete_, node.time);
      return SearchResult{node.time, {node.partition}};
    }
    Node extend = node;
    extend.partition.groups.back().end = next + 1;
    score(extend);

    Node add_new = node;
    if (options_.incremental) {
      ConjunctTimeline closing = group_timeline(infos_, node.partition.groups.back(),
                                                node.partition.begin(), span_.end, false);
      add_new.closed.close(closing);
      add_new.closed_bound.close(closing);
    }
    add_new.partition.groups.push_back(Group{next, next + 1});
    score(add_new);
    budget_.num_evals += 2;

    const Node& first = extend.time < add_new.time ? extend : add_new;
    const Node& second = extend.time < add_new.time ? add_new : extend;
    std::optional<SearchResult> a = explore(first, next + 1);
    if (budget_.num_evals < budget_.prefer_linear_evals) {
      std::optional<SearchResult> b = explore(second, next + 1);
      if (!a) return b;
      if (!b) return a;
      if (a->time < b->time) return a;
      if (b->time < a->time) return b;
      a->partitions.insert(b->partitions.begin(), b->partitions.end());
      return a;
    }
    return a;
  }

  std::optional<SearchResult> explore(const Node& node, std::size_t next) {
    if (options_.prune && node.bound > best_complete_) return std::nullopt;
    return search(node, next);
  }

  const std::vector<ConjunctInfo>& infos_;
  Group span_;
  OverheadParams overheads_;
  OverheadParams bound_overheads_;
  SearchBudget& budget_;
  SearchOptions options_;
  double best_complete_ = std::numeric_limits<double>::infinity();
};

}  // namespace

SearchResult find_best_partition(const std::vector<ConjunctInfo>& infos, Group span,
                                 const OverheadParams& overheads, SearchBudget& budget,
                                 SearchOptions options) {
  if (span.begin >= span.end || span.end > infos.size()) {
    throw Error("find_best_partition: empty or out-of-range span");
  }
  if (budget.prefer_linear_evals < 1) throw Error("evaluation budget must be at least 1");
  return Searcher(infos, span, overheads, budget, options).run();
}

const Partition& preferred_partition(const std::set<Partition>& partitions) {
  if (partitions.empty()) throw Error("no partitions to choose from");
  const Partition* best = &*partitions.begin();
  for (const Partition& p : partitions) {
    // std::set order is lexicographic on groups: leftmost boundaries first.
    if (p.groups.size() < best->groups.size()) best = &p;
  }
  return *best;
}

Partition shrink_edges(const std::vector<ConjunctInfo>& infos, const Partition& partition,
                       const OverheadParams& overheads, bool left, bool right) {
  Partition p = partition;
  while (left && p.groups.size() >= 2) {
    Partition rest{std::vector<Group>(p.groups.begin() + 1, p.groups.end())};
    double kept = partition_time(infos, p, overheads);
    double moved = cost_sum(infos, p.groups.front().begin, p.groups.front().end) +
                   partition_time(infos, rest, overheads);
    if (!(kept > moved)) break;
    p = rest;
  }
  while (right && p.groups.size() >= 2) {
    Partition rest{std::vector<Group>(p.groups.begin(), p.groups.end() - 1)};
    double kept = partition_time(infos, p, overheads);
    double moved = partition_time(infos, rest, overheads) +
                   cost_sum(infos, p.groups.back().begin, p.groups.back().end);
    if (!(kept > moved)) break;
    p = rest;
  }
  return p;
}

Partition expand_edges(const std::vector<ConjunctInfo>& infos, const Partition& partition,
                       std::size_t lo, std::size_t hi, const OverheadParams& overheads,
                       bool left, bool right) {
  auto total = [&](const Partition& p) {
    return cost_sum(infos, lo, p.begin()) + partition_time(infos, p, overheads) +
           cost_sum(infos, p.end(), hi);
  };
  Partition p = partition;
  double current = total(p);
  while (left && p.begin() > lo) {
    Partition candidate = p;
    candidate.groups.front().begin -= 1;
    double t = total(candidate);
    if (!(t < current)) break;
    p = candidate;
    current = t;
  }
  while (right && p.end() < hi) {
    Partition candidate = p;
    candidate.groups.back().end += 1;
    double t = total(candidate);
    if (!(t < current)) break;
    p = candidate;
    current = t;
  }
  return p;
}

CallGraph::CallGraph(const Program& program) {
  std::map<ProcKey, std::vector<ProcKey>> edges;
  for (const auto& [key, proc] : program.procedures) {
    auto& out = edges[key];
    for_each_goal(proc.body, [&](const Goal& g) {
      if (const auto* c = std::get_if<Call>(&g.node)) {
        if (program.find(c->callee) != nullptr) out.push_back(c->callee);
      }
    });
  }
  // Tarjan's algorithm; components come out callees-first.
  std::map<ProcKey, int> index;
  std::map<ProcKey, int> low;
  std::set<ProcKey> on_stack;
  std::vector<ProcKey> stack;
  int counter = 0;
  std::function<void(const ProcKey&)> connect = [&](const ProcKey& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const ProcKey& w : edges[v]) {
      if (!index.count(w)) {
        connect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.count(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<ProcKey> comp;
      ProcKey w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        component_of_[w] = static_cast<int>(components_.size());
        comp.push_back(w);
      } while (!(w == v));
      std::sort(comp.begin(), comp.end());
      components_.push_back(std::move(comp));
    }
  };
  for (const auto& [key, proc] : program.procedures) {
    if (!index.count(key)) connect(key);
  }
}

int CallGraph::component(const ProcKey& key) const {
  auto it = component_of_.find(key);
  return it == component_of_.end() ? -1 : it->second;
}

bool CallGraph::same_component(const ProcKey& a, const ProcKey& b) const {
  int ca = component(a);
  return ca >= 0 && ca == component(b);
}

std::string_view to_string(RecursionClass c) {
  switch (c) {
    case RecursionClass::none: return "none";
    case RecursionClass::single: return "single";
    case RecursionClass::multi_clause: return "multi_clause_single";
    case RecursionClass::doubly: return "double";
    case RecursionClass::irregular: return "irregular";
  }
  return "?";
}

std::optional<RecursionClass> parse_recursion_class(std::string_view s) {
  for (RecursionClass c : {RecursionClass::none, RecursionClass::single,
                           RecursionClass::multi_clause, RecursionClass::doubly,
                           RecursionClass::irregular}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

namespace {

constexpr int kPathCountCap = 3;

// Numbers of recursive calls along the execution paths through goal,
// capped at kPathCountCap.
std::set<int> path_counts(const Goal& goal, const std::function<bool(const Call&)>& recursive) {
  auto add = [](const std::set<int>& a, const std::set<int>& b) {
    std::set<int> out;
    for (int x : a) {
      for (int y : b) out.insert(std::min(x + y, kPathCountCap));
    }
    return out;
  };
  return std::visit(
      overloaded{
          [](const Unify&) { return std::set<int>{0}; },
          [](const HigherOrderCall&) { return std::set<int>{0}; },
          [&](const Call& c) { return std::set<int>{recursive(c) ? 1 : 0}; },
          [&](const Conj& c) {
            std::set<int> acc{0};
            for (const Goal& g : c.goals) acc = add(acc, path_counts(g, recursive));
            return acc;
          },
          [&](const Switch& s) {
            std::set<int> out;
            for (const SwitchArm& arm : s.arms) {
              if (arm.goal->det == Determinism::erroneous) continue;
              std::set<int> a = path_counts(*arm.goal, recursive);
              out.insert(a.begin(), a.end());
            }
            if (out.empty()) out.insert(0);
            return out;
          },
          [&](const IfThenElse& ite) {
            std::set<int> cond = path_counts(*ite.cond, recursive);
            std::set<int> out = add(cond, path_counts(*ite.then_goal, recursive));
            std::set<int> other = add(cond, path_counts(*ite.else_goal, recursive));
            out.insert(other.begin(), other.end());
            return out;
          },
          [&](const Negation& n) { return path_counts(*n.inner, recursive); },
          [&](const Quantification& q) { return path_counts(*q.inner, recursive); },
          [&](const Disjunction& d) {
            std::set<int> out;
            for (const Goal& g : d.goals) {
              std::set<int> a = path_counts(g, recursive);
              out.insert(a.begin(), a.end());
            }
            if (out.empty()) out.insert(0);
            return out;
          },
      },
      goal.node);
}

}  // namespace

RecursionInfo classify_recursion(const Program& program, const Profile& profile,
                                 const CallGraph& graph, const ProcKey& key) {
  RecursionInfo info;
  const Procedure* proc = program.find(key);
  if (proc == nullptr) throw Error("unknown procedure " + key.str());
  auto recursive = [&](const Call& c) { return graph.same_component(key, c.callee); };
  for_each_goal(proc->body, [&](const Goal& g) {
    if (const auto* c = std::get_if<Call>(&g.node); c && recursive(*c)) {
      info.sites.push_back(c->site);
      const SiteStats* s = profile.site(c->site);
      info.counts.push_back(s ? static_cast<double>(s->count) : 0.0);
    }
  });
  // Entries from outside the clique.
  bool called = false;
  for (const auto& [caller_key, caller] : program.procedures) {
    if (graph.same_component(caller_key, key)) continue;
    for_each_goal(caller.body, [&](const Goal& g) {
      if (const auto* c = std::get_if<Call>(&g.node); c && graph.same_component(c->callee, key)) {
        called = true;
        if (const SiteStats* s = profile.site(c->site)) {
          info.entries += static_cast<double>(s->count);
        }
      }
    });
  }
  if (!called && key == program.entry) {
    info.entries = static_cast<double>(entry_count(proc->body, profile).value_or(1));
  }
  if (info.sites.empty()) return info;

  std::set<int> counts = path_counts(proc->body, recursive);
  counts.erase(0);
  if (counts == std::set<int>{1}) {
    info.cls = info.sites.size() == 1 ? RecursionClass::single : RecursionClass::multi_clause;
  } else if (counts == std::set<int>{2} && info.sites.size() == 2) {
    info.cls = RecursionClass::doubly;
  } else {
    info.cls = RecursionClass::irregular;
  }
  return info;
}

double recursion_depth(const RecursionInfo& info) {
  if (info.entries <= 0.0 || info.counts.empty()) throw Error("no recursion observed");
  return info.counts.front() / info.entries;
}

double extrapolated_saving(double seq_saving, const RecursionInfo& info, std::size_t site_index) {
  switch (info.cls) {
    case RecursionClass::irregular:
      throw Unsupported("irregular recursion: different paths make different numbers of "
                        "recursive calls");
    case RecursionClass::none:
      return seq_saving;
    default:
      break;
  }
  double total_r = std::accumulate(info.counts.begin(), info.counts.end(), 0.0);
  if (info.entries <= 0.0 || total_r <= 0.0) throw Error("no recursion observed");
  const double e = info.entries;
  switch (info.cls) {
    case RecursionClass::single:
      return seq_saving * info.counts.front() / e;
    case RecursionClass::multi_clause: {
      if (site_index >= info.counts.size()) throw Error("recursive site index out of range");
      double r = info.counts[site_index];
      return seq_saving * (r / e) * (r / total_r);
    }
    case RecursionClass::doubly:
      return seq_saving * info.counts.front() / (2.0 * e);
    default:
      return seq_saving;
  }
}

int throttling_condition(int num_cpus, std::optional<int> override_m) {
  if (num_cpus < 1) throw Error("need at least one CPU");
  if (override_m) return *override_m;
  return 8 * num_cpus;
}

std::string Advice::form() const {
  std::string par;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (i > 0) par += " & ";
    par += group_str(groups[i]);
  }
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < before_end; ++i) parts.push_back("c" + std::to_string(i + 1));
  bool alone = before_end == 0 && after_begin == conjunct_count;
  parts.push_back(alone ? par : "(" + par + ")");
  for (std::size_t i = after_begin; i < conjunct_count; ++i) {
    parts.push_back("c" + std::to_string(i + 1));
  }
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) s += ", ";
    s += parts[i];
  }
  return s;
}

ConjunctionModel::ConjunctionModel(TimingModel& timing, const Goal& conj_goal) {
  const auto* conj = std::get_if<Conj>(&conj_goal.node);
  if (conj == nullptr) throw Error("goal " + std::to_string(to_int(conj_goal.id)) +
                                   " is not a conjunction");
  for (const Goal& g : conj->goals) goals_.push_back(&g);
  std::vector<ConjunctInfo> raw = timing.conjunct_infos(goals_);

  // Zero-cost unifications are never worth a parallel conjunct of their own.
  auto trivial = [&](std::size_t i) {
    return std::holds_alternative<Unify>(goals_[i]->node) && raw[i].cost == 0.0;
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < goals_.size(); ++i) {
    if (trivial(i) && i + 1 < goals_.size()) continue;
    fused_.push_back(Group{start, i + 1});
    start = i + 1;
  }
  // A trailing run joins the previous conjunct.
  if (fused_.size() >= 2) {
    const Group& last = fused_.back();
    bool all_trivial = true;
    for (std::size_t i = last.begin; i < last.end; ++i) all_trivial = all_trivial && trivial(i);
    if (all_trivial) {
      fused_[fused_.size() - 2].end = last.end;
      fused_.pop_back();
    }
  }
  for (const Group& g : fused_) {
    infos_.push_back(sequence(std::vector<ConjunctInfo>(
        raw.begin() + static_cast<std::ptrdiff_t>(g.begin),
        raw.begin() + static_cast<std::ptrdiff_t>(g.end))));
  }
}

std::vector<double> ConjunctionModel::costs() const {
  std::vector<double> out;
  for (const ConjunctInfo& i : infos_) out.push_back(i.cost);
  return out;
}

Partition ConjunctionModel::to_original(const Partition& fused_partition) const {
  Partition p;
  for (const Group& g : fused_partition.groups) {
    p.groups.push_back(Group{fused_[g.begin].begin, fused_[g.end - 1].end});
  }
  return p;
}

std::optional<Advice> best_parallelisation(TimingModel& timing, const CallGraph& graph,
                                           const Procedure& proc, const Goal& conj_goal,
                                           const PlannerParams& params, PlanTrace* trace) {
  PlanTrace local;
  PlanTrace& t = trace != nullptr ? *trace : local;
  const auto* conj = std::get_if<Conj>(&conj_goal.node);
  if (conj == nullptr || conj->parallel) {
    t.rejection = "not a sequential conjunction";
    return std::nullopt;
  }
  if (conj->goals.size() < 2) {
    t.rejection = "fewer than two conjuncts";
    return std::nullopt;
  }
  ConjunctionModel model(timing, conj_goal);
  const auto& infos = model.infos();
  t.costs = model.costs();
  Group middle;
  try {
    middle = select_middle(t.costs, params.expensive_threshold);
  } catch (const NotACandidate& e) {
    t.rejection = e.what();
    return std::nullopt;
  }
  t.middle = middle;

  SearchBudget budget{params.eval_budget, 0};
  t.search = find_best_partition(infos, middle, params.overheads, budget, params.search);
  t.evals = budget.num_evals;
  Partition chosen = preferred_partition(t.search.partitions);
  t.chosen = chosen;

  Partition shrunk = shrink_edges(infos, chosen, params.overheads);
  t.shrunk = shrunk;
  bool shrunk_left = shrunk.begin() != chosen.begin();
  bool shrunk_right = shrunk.end() != chosen.end();
  Partition expanded = expand_edges(infos, shrunk, 0, infos.size(), params.overheads,
                                    !shrunk_left, !shrunk_right);
  t.expanded = expanded;
  if (expanded.groups.size() < 2) {
    t.rejection = "best partition is sequential";
    return std::nullopt;
  }

  double seq = cost_sum(infos, 0, infos.size());
  double par = conjunction_time(infos, expanded, params.overheads);
  if (seq <= 0.0 || par <= 0.0) {
    t.rejection = "zero-cost conjunction";
    return std::nullopt;
  }
  Advice advice;
  advice.procedure = proc.key;
  advice.goal_id = conj_goal.id;
  advice.conjunct_count = conj->goals.size();
  Partition original = model.to_original(expanded);
  advice.groups = original.groups;
  advice.before_end = original.begin();
  advice.after_begin = original.end();
  advice.seq_time = seq;
  advice.par_time = par;
  advice.speedup = seq / par;
  if (advice.speedup < params.speedup_threshold) {
    std::ostringstream msg;
    msg << "speedup " << advice.speedup << " below threshold " << params.speedup_threshold;
    t.rejection = msg.str();
    return std::nullopt;
  }

  RecursionInfo rec = classify_recursion(timing.program(), timing.profile(), graph, proc.key);
  advice.recursion = rec.cls;
  std::optional<std::size_t> site_index;
  for (std::size_t i = advice.before_end; i < advice.after_begin; ++i) {
    for_each_goal(conj->goals[i], [&](const Goal& g) {
      const auto* c = std::get_if<Call>(&g.node);
      if (c == nullptr || !graph.same_component(proc.key, c->callee)) return;
      advice.throttle = true;
      auto it = std::find(rec.sites.begin(), rec.sites.end(), c->site);
      if (!site_index && it != rec.sites.end()) {
        site_index = static_cast<std::size_t>(it - rec.sites.begin());
      }
    });
  }
  if (rec.cls != RecursionClass::none) {
    try {
      advice.extrapolated_saving = extrapolated_saving(seq - par, rec, site_index.value_or(0));
    } catch (const Unsupported& e) {
      t.rejection = e.what();
      return std::nullopt;
    } catch (const Error&) {
      // Recursion never ran; nothing to extrapolate.
    }
  }
  return advice;
}

}  // namespace depar
