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

#include "depar/driver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <set>
#include <sstream>
#include <thread>

#include "depar/ir_json.hpp"
#include "depar/oracle.hpp"

namespace depar {

using nlohmann::json;

void ExploreParams::check() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(call_cost_threshold)) throw Error("call cost threshold must be positive");
  if (!positive(parallelism_saturation_threshold)) {
    throw Error("parallelism saturation threshold must be positive");
  }
  if (!positive(planner.expensive_threshold)) throw Error("expensive threshold must be positive");
  if (!std::isfinite(planner.speedup_threshold) || planner.speedup_threshold < 1.0) {
    throw Error("speedup threshold must be at least 1");
  }
  if (planner.eval_budget < 1) throw Error("evaluation budget must be at least 1");
  if (jobs < 1) throw Error("jobs must be at least 1");
  if (num_cpus < 1) throw Error("num_cpus must be at least 1");
  if (throttle_limit && *throttle_limit < 1) throw Error("throttle limit must be at least 1");
  planner.overheads.check();
}

double accumulated_parallelism(const std::vector<double>& speedups) {
  double p = 1.0;
  for (double s : speedups) p *= s;
  return p;
}

namespace {

struct ProcAnalysis {
  std::vector<Advice> advice;
  std::vector<std::string> log;

  bool operator==(const ProcAnalysis&) const = default;
};

ProcAnalysis analyze(const Program& program, const Profile& profile, const CallGraph& graph,
                     const Procedure& proc, const PlannerParams& params) {
  ProcAnalysis out;
  TimingModel timing(program, profile);
  for_each_goal(proc.body, [&](const Goal& g) {
    const auto* conj = std::get_if<Conj>(&g.node);
    if (conj == nullptr || conj->goals.size() < 2) return;
    std::string where = proc.key.str() + ":" + std::to_string(to_int(g.id));
    if (conj->parallel) {
      out.log.push_back(where + ": already parallel, left alone");
      return;
    }
    PlanTrace trace;
    std::optional<Advice> a = best_parallelisation(timing, graph, proc, g, params, &trace);
    if (a) {
      std::ostringstream line;
      line << where << ": advise " << a->form() << " speedup " << a->speedup;
      out.log.push_back(line.str());
      out.advice.push_back(std::move(*a));
    } else {
      out.log.push_back(where + ": no advice (" + trace.rejection + ")");
    }
  });
  return out;
}

// Goal ids inside the parallel part of an advised conjunction.
std::set<GoalId> parallel_part(const Goal& conj_goal, const Advice& a) {
  std::set<GoalId> ids;
  const auto& goals = std::get<Conj>(conj_goal.node).goals;
  for (std::size_t i = a.before_end; i < a.after_begin && i < goals.size(); ++i) {
    for_each_goal(goals[i], [&](const Goal& g) { ids.insert(g.id); });
  }
  return ids;
}

class Explorer {
 public:
  Explorer(const Program& program, const Profile& profile, const ExploreParams& params)
      : program_(program), profile_(profile), params_(params), graph_(program) {}

  ExploreReport run() {
    const Procedure* entry = program_.find(program_.entry);
    if (entry == nullptr) throw Error("unresolved entry point " + program_.entry.str());
    if (params_.jobs > 1) precompute();
    dfs(*entry, goal_cost(entry->body, profile_), 1.0);
    revisit();

    ExploreReport report;
    report.log = std::move(log_);
    for (const auto& [key, analysis] : current_) {
      report.advice.insert(report.advice.end(), analysis.advice.begin(), analysis.advice.end());
    }
    std::sort(report.advice.begin(), report.advice.end(), [](const Advice& a, const Advice& b) {
      if (a.procedure != b.procedure) return a.procedure < b.procedure;
      return a.goal_id < b.goal_id;
    });
    return report;
  }

 private:
  const ProcAnalysis& initial(const Procedure& proc) {
    auto it = initial_.find(proc.key);
    if (it == initial_.end()) {
      it = initial_.emplace(proc.key, analyze(program_, profile_, graph_, proc, params_.planner))
               .first;
    }
    return it->second;
  }

  // Analyses every procedure up front on a worker pool. Each worker owns its
  // timing model; results land in fixed slots so the output does not depend
  // on scheduling.
  void precompute() {
    std::vector<const Procedure*> procs;
    for (const auto& [key, proc] : program_.procedures) procs.push_back(&proc);
    std::vector<ProcAnalysis> results(procs.size());
    std::vector<std::exception_ptr> errors(procs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < procs.size(); i = next++) {
        try {
          results[i] = analyze(program_, profile_, graph_, *procs[i], params_.planner);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(params_.jobs), procs.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    for (std::size_t i = 0; i < procs.size(); ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      initial_.emplace(procs[i]->key, std::move(results[i]));
    }
  }

  void dfs(const Procedure& proc, double call_cost, double acc) {
    if (current_.count(proc.key)) return;
    std::ostringstream gate;
    if (call_cost < params_.call_cost_threshold) {
      gate << "skip " << proc.key.str() << ": call cost " << format_cost(call_cost)
           << " below threshold";
      log_.push_back(gate.str());
      return;
    }
    if (acc >= params_.parallelism_saturation_threshold) {
      gate << "skip " << proc.key.str() << ": accumulated parallelism " << acc
           << " at saturation";
      log_.push_back(gate.str());
      return;
    }
    const ProcAnalysis& analysis = initial(proc);
    current_[proc.key] = analysis;
    log_.push_back("analyse " + proc.key.str());
    log_.insert(log_.end(), analysis.log.begin(), analysis.log.end());

    GoalIndex index(proc.body);
    std::vector<std::pair<std::set<GoalId>, double>> advised;
    for (const Advice& a : analysis.advice) {
      advised.emplace_back(parallel_part(*index.find(a.goal_id), a), a.speedup);
    }
    std::vector<std::pair<const Goal*, const Call*>> calls;
    for_each_goal(proc.body, [&](const Goal& g) {
      if (const auto* c = std::get_if<Call>(&g.node)) calls.emplace_back(&g, c);
    });
    for (const auto& [goal, call] : calls) {
      const Procedure* callee = program_.find(call->callee);
      const SiteStats* site = profile_.site(call->site);
      if (callee == nullptr || site == nullptr || site->count == 0) continue;
      std::vector<double> speedups;
      for (const auto& [ids, s] : advised) {
        if (ids.count(goal->id)) speedups.push_back(s);
      }
      double cost = site->total_cost / static_cast<double>(site->count);
      dfs(*callee, cost, acc * accumulated_parallelism(speedups));
    }
  }

  // Re-analyses callers of parallelised procedures with the callees' costs
  // reduced by their savings, components callees-first so that one pass
  // suffices.
  void revisit() {
    Profile adjusted = profile_;
    std::map<int, double> saving_per_call;
    for (std::size_t ci = 0; ci < graph_.components().size(); ++ci) {
      const std::vector<ProcKey>& comp = graph_.components()[ci];
      const int id = graph_.component(comp.front());
      bool touched = false;
      for (const ProcKey& key : comp) {
        if (!current_.count(key)) continue;
        for_each_goal(program_.find(key)->body, [&](const Goal& g) {
          const auto* c = std::get_if<Call>(&g.node);
          if (c == nullptr || program_.find(c->callee) == nullptr) return;
          int callee = graph_.component(c->callee);
          if (callee != id && saving_per_call[callee] > 0.0) touched = true;
        });
      }
      if (touched) {
        for (const ProcKey& key : comp) {
          auto it = current_.find(key);
          if (it == current_.end()) continue;
          ProcAnalysis again =
              analyze(program_, adjusted, graph_, *program_.find(key), params_.planner);
          if (!(again == it->second)) {
            log_.push_back("revisit " + key.str() + " with parallelised callee costs");
            log_.insert(log_.end(), again.log.begin(), again.log.end());
            it->second = std::move(again);
          }
        }
      }

      double saving = 0.0;
      double entries = 0.0;
      bool called = false;
      for (const auto& [key, proc] : program_.procedures) {
        const bool inside = graph_.component(key) == id;
        for_each_goal(proc.body, [&](const Goal& g) {
          const auto* c = std::get_if<Call>(&g.node);
          if (c == nullptr || program_.find(c->callee) == nullptr) return;
          const SiteStats* s = adjusted.site(c->site);
          if (s == nullptr) return;
          const int callee = graph_.component(c->callee);
          if (!inside && callee == id) {
            called = true;
            entries += static_cast<double>(s->count);
          }
          if (inside && callee != id) {
            saving += static_cast<double>(s->count) * saving_per_call[callee];
          }
        });
        if (!inside) continue;
        auto it = current_.find(key);
        if (it == current_.end()) continue;
        GoalIndex index(proc.body);
        for (const Advice& a : it->second.advice) {
          auto n = entry_count(*index.find(a.goal_id), adjusted);
          saving += (a.seq_time - a.par_time) * static_cast<double>(n.value_or(0));
        }
      }
      if (!called) {
        const Procedure* entry = program_.find(program_.entry);
        entries = entry != nullptr && graph_.component(program_.entry) == id
                      ? static_cast<double>(entry_count(entry->body, adjusted).value_or(1))
                      : 1.0;
      }
      double per_call = entries > 0.0 ? std::max(0.0, saving / entries) : 0.0;
      saving_per_call[id] = per_call;
      if (per_call <= 0.0) continue;
      for (const auto& [key, proc] : program_.procedures) {
        if (graph_.component(key) == id) continue;
        for_each_goal(proc.body, [&](const Goal& g) {
          const auto* c = std::get_if<Call>(&g.node);
          if (c == nullptr || program_.find(c->callee) == nullptr) return;
          if (graph_.component(c->callee) != id) return;
          auto s = adjusted.sites.find(c->site);
          if (s == adjusted.sites.end()) return;
          s->second.total_cost = std::max(
              0.0, s->second.total_cost - static_cast<double>(s->second.count) * per_call);
        });
      }
    }
  }

  const Program& program_;
  const Profile& profile_;
  const ExploreParams& params_;
  CallGraph graph_;
  std::map<ProcKey, ProcAnalysis> initial_;
  std::map<ProcKey, ProcAnalysis> current_;  // analysed procedures
  std::vector<std::string> log_;
};

}  // namespace

ExploreReport explore_call_tree(const Program& program, const Profile& profile,
                                const ExploreParams& params) {
  params.check();
  return Explorer(program, profile, params).run();
}

std::string program_fingerprint(const Program& program) {
  const std::string text = json_io::dump(program_to_json(program));
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

json advice_to_json(const Advice& a) {
  json groups = json::array();
  for (const Group& g : a.groups) groups.push_back({g.begin + 1, g.end});
  json rec;
  rec["procedure"] = a.procedure.str();
  rec["goal_id"] = to_int(a.goal_id);
  rec["conjunct_count"] = a.conjunct_count;
  rec["before_end"] = a.before_end;
  rec["after_begin"] = a.after_begin;
  rec["groups"] = std::move(groups);
  rec["form"] = a.form();
  rec["predicted_seq"] = a.seq_time;
  rec["predicted_par"] = a.par_time;
  rec["speedup"] = a.speedup;
  rec["recursion"] = {{"class", std::string(to_string(a.recursion))},
                      {"extrapolated_saving", a.extrapolated_saving
                                                  ? json(*a.extrapolated_saving)
                                                  : json(nullptr)}};
  rec["throttle"] = a.throttle;
  return rec;
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) throw ParseError(path + ": missing field '" + key + "'");
  return obj.at(key);
}

std::size_t index_field(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number_unsigned()) throw ParseError(path + "/" + key + ": expected a nonnegative integer");
  return v.get<std::size_t>();
}

double number_field(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number()) throw ParseError(path + "/" + key + ": expected a number");
  double d = v.get<double>();
  if (!std::isfinite(d) || d < 0.0) throw ParseError(path + "/" + key + ": must be finite and nonnegative");
  return d;
}

Advice advice_from_json(const json& rec, const std::string& path) {
  json_io::check_keys(rec, path,
                      {"procedure", "goal_id", "conjunct_count", "before_end", "after_begin",
                       "groups", "form", "predicted_seq", "predicted_par", "speedup",
                       "recursion", "throttle"});
  Advice a;
  const json& proc = field(rec, "procedure", path);
  auto key = proc.is_string() ? ProcKey::parse(proc.get<std::string>()) : std::nullopt;
  if (!key) throw ParseError(path + "/procedure: expected name/arity/mode");
  a.procedure = *key;
  const json& id = field(rec, "goal_id", path);
  if (!id.is_number_integer()) throw ParseError(path + "/goal_id: expected an integer");
  a.goal_id = GoalId{id.get<std::int32_t>()};
  a.conjunct_count = index_field(rec, "conjunct_count", path);
  a.before_end = index_field(rec, "before_end", path);
  a.after_begin = index_field(rec, "after_begin", path);
  const json& groups = field(rec, "groups", path);
  if (!groups.is_array() || groups.size() < 2) {
    throw ParseError(path + "/groups: expected at least two groups");
  }
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const json& g = groups[i];
    std::string gp = path + "/groups/" + std::to_string(i);
    if (!g.is_array() || g.size() != 2 || !g[0].is_number_unsigned() || !g[1].is_number_unsigned()) {
      throw ParseError(gp + ": expected [first, last]");
    }
    std::size_t first = g[0].get<std::size_t>();
    std::size_t last = g[1].get<std::size_t>();
    if (first < 1 || last < first) throw ParseError(gp + ": bad conjunct range");
    a.groups.push_back(Group{first - 1, last});
  }
  for (std::size_t i = 1; i < a.groups.size(); ++i) {
    if (a.groups[i].begin != a.groups[i - 1].end) {
      throw ParseError(path + "/groups: groups are not contiguous");
    }
  }
  if (a.groups.front().begin != a.before_end || a.groups.back().end != a.after_begin ||
      a.after_begin > a.conjunct_count) {
    throw ParseError(path + ": groups disagree with before_end/after_begin/conjunct_count");
  }
  const json& form = field(rec, "form", path);
  if (!form.is_string() || form.get<std::string>() != a.form()) {
    throw ParseError(path + "/form: does not match groups (expected \"" + a.form() + "\")");
  }
  a.seq_time = number_field(rec, "predicted_seq", path);
  a.par_time = number_field(rec, "predicted_par", path);
  a.speedup = number_field(rec, "speedup", path);
  if (a.par_time <= 0.0 || std::fabs(a.speedup - a.seq_time / a.par_time) > 1e-9 * a.speedup) {
    throw ParseError(path + "/speedup: not predicted_seq / predicted_par");
  }
  const json& rec_j = field(rec, "recursion", path);
  json_io::check_keys(rec_j, path + "/recursion", {"class", "extrapolated_saving"});
  const json& cls = field(rec_j, "class", path + "/recursion");
  auto c = cls.is_string() ? parse_recursion_class(cls.get<std::string>()) : std::nullopt;
  if (!c) throw ParseError(path + "/recursion/class: unknown recursion class");
  a.recursion = *c;
  const json& saving = field(rec_j, "extrapolated_saving", path + "/recursion");
  if (!saving.is_null()) {
    if (!saving.is_number()) {
      throw ParseError(path + "/recursion/extrapolated_saving: expected a number or null");
    }
    a.extrapolated_saving = saving.get<double>();
  }
  const json& throttle = field(rec, "throttle", path);
  if (!throttle.is_boolean()) throw ParseError(path + "/throttle: expected a boolean");
  a.throttle = throttle.get<bool>();
  return a;
}

}  // namespace

std::string advice_file_text(const AdviceFile& file) {
  json doc;
  doc["format_version"] = file.format_version;
  doc["fingerprint"] = file.fingerprint;
  doc["throttle_limit"] = file.throttle_limit;
  json records = json::array();
  for (const Advice& a : file.records) records.push_back(advice_to_json(a));
  doc["records"] = std::move(records);
  return json_io::dump(doc);
}

AdviceFile parse_advice_file(std::string_view text) {
  json doc = json_io::parse_text(text);
  json_io::check_keys(doc, "", {"format_version", "fingerprint", "throttle_limit", "records"});
  json_io::check_version(doc, kAdviceFormatVersion, "advice file");
  AdviceFile file;
  const json& fp = field(doc, "fingerprint", "");
  if (!fp.is_string()) throw ParseError("/fingerprint: expected a string");
  file.fingerprint = fp.get<std::string>();
  const json& limit = field(doc, "throttle_limit", "");
  if (!limit.is_number_integer() || limit.get<int>() < 1) {
    throw ParseError("/throttle_limit: expected a positive integer");
  }
  file.throttle_limit = limit.get<int>();
  const json& records = field(doc, "records", "");
  if (!records.is_array()) throw ParseError("/records: expected an array");
  std::set<std::pair<ProcKey, GoalId>> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::string path = "/records/" + std::to_string(i);
    Advice a;
    try {
      a = advice_from_json(records[i], path);
    } catch (const ParseError& e) {
      throw ParseError("record " + std::to_string(i) + ": " + e.what());
    }
    if (!seen.insert({a.procedure, a.goal_id}).second) {
      throw ParseError("record " + std::to_string(i) + ": second record for " +
                       a.procedure.str() + ":" + std::to_string(to_int(a.goal_id)));
    }
    file.records.push_back(std::move(a));
  }
  return file;
}

void emit_advice_file(const AdviceFile& file, const std::string& path) {
  json_io::write_file(path, advice_file_text(file));
}

AdviceFile read_advice_file(const std::string& path) {
  return parse_advice_file(json_io::read_file(path));
}

}  // namespace depar
