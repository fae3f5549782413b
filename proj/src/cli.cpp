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

#include "depar/cli.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "depar/config.hpp"
#include "depar/driver.hpp"
#include "depar/fixtures.hpp"
#include "depar/ir_json.hpp"
#include "depar/oracle.hpp"

namespace depar::cli {

using nlohmann::json;

namespace {

// Bad input files and malformed arguments; exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Analysis-level problems; exit code 1.
class DiagnosticError : public Error {
 public:
  using Error::Error;
};

struct Common {
  std::string program;
  std::string profile;
  std::string format = "text";
  std::string config;
  std::string overheads_file;
  double expensive = 0.0;
  double call_cost = 0.0;
  double speedup = 0.0;
  std::uint64_t eval_budget = 0;
  int jobs = 1;
  int engines = 0;
  std::uint64_t seed = 1;
  CLI::Option* expensive_opt = nullptr;
  CLI::Option* call_cost_opt = nullptr;
  CLI::Option* speedup_opt = nullptr;
  CLI::Option* budget_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
  CLI::Option* engines_opt = nullptr;
};

void add_inputs(CLI::App* cmd, Common& c, bool required) {
  auto* p = cmd->add_option("--program", c.program, "Program file (JSON)");
  auto* q = cmd->add_option("--profile", c.profile, "Profile file (JSON)");
  if (required) {
    p->required();
    q->required();
  }
}

void add_format(CLI::App* cmd, Common& c) {
  cmd->add_option("--format", c.format, "Report format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
}

void add_params(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Config file (JSON)");
  cmd->add_option("--overheads-file", c.overheads_file, "Config file whose overheads section is used");
  c.expensive_opt = cmd->add_option("--expensive-threshold", c.expensive,
                                    "Per-call cost at which a conjunct counts as expensive");
  c.call_cost_opt = cmd->add_option("--call-cost-threshold", c.call_cost,
                                    "Call cost below which a subtree is not explored");
  c.speedup_opt = cmd->add_option("--speedup-threshold", c.speedup,
                                  "Minimum speedup for advice");
  c.budget_opt = cmd->add_option("--eval-budget", c.eval_budget,
                                 "Evaluations before the search turns greedy");
}

std::string read_input(const std::string& path) {
  try {
    return json_io::read_file(path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

ExploreParams resolve_params(const Common& c) {
  ExploreParams p;
  try {
    if (!c.config.empty()) apply_config(read_input(c.config), p);
    if (!c.overheads_file.empty()) apply_overheads(read_input(c.overheads_file), p.planner.overheads);
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (c.expensive_opt && c.expensive_opt->count()) p.planner.expensive_threshold = c.expensive;
  if (c.call_cost_opt && c.call_cost_opt->count()) p.call_cost_threshold = c.call_cost;
  if (c.speedup_opt && c.speedup_opt->count()) p.planner.speedup_threshold = c.speedup;
  if (c.budget_opt && c.budget_opt->count()) p.planner.eval_budget = c.eval_budget;
  if (c.jobs_opt && c.jobs_opt->count()) p.jobs = c.jobs;
  try {
    p.check();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return p;
}

struct Inputs {
  Program program;
  Profile profile;
  std::vector<Diagnostic> diagnostics;
};

// Zero-count sites are reported but do not stop the analysis.
bool is_warning(const Diagnostic& d) { return d.rule == "zero-count-site"; }

Inputs load_inputs(const Common& c, std::ostream& err) {
  Inputs in;
  std::string prog_text = read_input(c.program);
  std::string prof_text = read_input(c.profile);
  try {
    in.program = parse_program(prog_text);
  } catch (const ParseError& e) {
    throw UsageError(c.program + ": " + e.what());
  }
  try {
    in.profile = parse_profile(prof_text);
  } catch (const ParseError& e) {
    throw UsageError(c.profile + ": " + e.what());
  }
  in.diagnostics = validate(in.program, in.profile);
  for (const Diagnostic& d : in.diagnostics) {
    err << (is_warning(d) ? "warning: " : "error: ") << d.str() << "\n";
  }
  return in;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return !is_warning(d); });
}

json diagnostics_json(const std::vector<Diagnostic>& diags) {
  json arr = json::array();
  for (const Diagnostic& d : diags) {
    arr.push_back({{"rule", d.rule},
                   {"goal", d.goal ? json(to_int(*d.goal)) : json(nullptr)},
                   {"message", d.message},
                   {"severity", is_warning(d) ? "warning" : "error"}});
  }
  return arr;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

// "name/arity/mode:goal-id"
std::pair<ProcKey, GoalId> parse_conjunction(const std::string& text) {
  auto colon = text.rfind(':');
  if (colon == std::string::npos) throw UsageError("--conjunction: expected <proc>:<goal-id>");
  auto key = ProcKey::parse(text.substr(0, colon));
  if (!key) throw UsageError("--conjunction: bad procedure key '" + text.substr(0, colon) + "'");
  int id = 0;
  const std::string digits = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty()) {
    throw UsageError("--conjunction: bad goal id '" + digits + "'");
  }
  return {*key, GoalId{id}};
}

struct Located {
  const Procedure* proc;
  const Goal* goal;
};

Located locate(const Program& program, const std::string& text) {
  auto [key, id] = parse_conjunction(text);
  const Procedure* proc = program.find(key);
  if (proc == nullptr) throw UsageError("no procedure " + key.str());
  GoalIndex index(proc->body);
  const Goal* goal = index.find(id);
  if (goal == nullptr) throw UsageError("no goal " + std::to_string(to_int(id)) + " in " + key.str());
  const auto* conj = std::get_if<Conj>(&goal->node);
  if (conj == nullptr) throw UsageError("goal " + std::to_string(to_int(id)) + " is not a conjunction");
  return {proc, goal};
}

std::string var_list(const Procedure& proc, const std::map<VarId, double>& m) {
  std::string s;
  for (const auto& [v, t] : m) s += " " + proc.var_name(v) + "@" + format_cost(t);
  return s;
}

json record_json(const Advice& a) {
  AdviceFile f;
  f.records.push_back(a);
  return json::parse(advice_file_text(f))["records"][0];
}

// advise ---------------------------------------------------------------

struct AdviseArgs {
  Common common;
  std::string out;
  bool verbose = false;
};

int advise(const AdviseArgs& args, std::ostream& out, std::ostream& err) {
  ExploreParams params = resolve_params(args.common);
  Inputs in = load_inputs(args.common, err);
  if (has_errors(in.diagnostics)) {
    err << "input failed validation; no advice produced\n";
    return kExitDiagnostics;
  }
  ExploreReport report = explore_call_tree(in.program, in.profile, params);
  AdviceFile file;
  file.fingerprint = program_fingerprint(in.program);
  file.throttle_limit = throttling_condition(params.num_cpus, params.throttle_limit);
  file.records = report.advice;
  if (!args.out.empty()) {
    try {
      emit_advice_file(file, args.out);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  if (args.common.format == "json") {
    json doc;
    doc["command"] = "advise";
    doc["advice_file"] = json::parse(advice_file_text(file));
    doc["out"] = args.out.empty() ? json(nullptr) : json(args.out);
    doc["diagnostics"] = diagnostics_json(in.diagnostics);
    doc["log"] = report.log;
    out << json_io::dump(doc);
    return kExitOk;
  }
  if (args.verbose) {
    for (const std::string& line : report.log) out << "  " << line << "\n";
  }
  for (const Advice& a : report.advice) {
    out << a.procedure.str() << ":" << to_int(a.goal_id) << "  " << a.form() << "  seq "
        << format_cost(a.seq_time) << " par " << format_cost(a.par_time) << " speedup "
        << fmt(a.speedup) << "  recursion " << to_string(a.recursion);
    if (a.extrapolated_saving) out << " saving " << format_cost(*a.extrapolated_saving);
    if (a.throttle) out << "  throttle";
    out << "\n";
  }
  out << report.advice.size() << (report.advice.size() == 1 ? " conjunction" : " conjunctions")
      << " advised";
  if (!args.out.empty()) out << "; advice file written to " << args.out;
  out << "\n";
  return kExitOk;
}

// explain --------------------------------------------------------------

struct ExplainArgs {
  Common common;
  std::string conjunction;
  std::size_t max_candidates = 10;
};

int explain(const ExplainArgs& args, std::ostream& out, std::ostream& err) {
  ExploreParams params = resolve_params(args.common);
  Inputs in = load_inputs(args.common, err);
  if (has_errors(in.diagnostics)) return kExitDiagnostics;
  Located where = locate(in.program, args.conjunction);
  TimingModel timing(in.program, in.profile);
  CallGraph graph(in.program);
  ConjunctionModel model(timing, *where.goal);
  PlanTrace trace;
  std::optional<Advice> advice =
      best_parallelisation(timing, graph, *where.proc, *where.goal, params.planner, &trace);

  struct Candidate {
    double time;
    Partition partition;
  };
  std::vector<Candidate> candidates;
  if (trace.middle && trace.middle->size() <= 12) {
    for (Partition p : enumerate_partitions(trace.middle->size())) {
      for (Group& g : p.groups) {
        g.begin += trace.middle->begin;
        g.end += trace.middle->begin;
      }
      candidates.push_back({partition_time(model.infos(), p, params.planner.overheads), p});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.time != b.time) return a.time < b.time;
      return a.partition < b.partition;
    });
  }
  const std::size_t shown = std::min(candidates.size(), args.max_candidates);
  const Procedure& proc = *where.proc;
  const auto& goals = model.goals();

  if (args.common.format == "json") {
    json doc;
    doc["command"] = "explain";
    doc["conjunction"] = args.conjunction;
    json conjuncts = json::array();
    for (std::size_t i = 0; i < goals.size(); ++i) {
      conjuncts.push_back({{"index", i + 1},
                           {"goal_id", to_int(goals[i]->id)},
                           {"kind", std::string(goals[i]->kind_name())},
                           {"cost", goal_cost(*goals[i], in.profile)}});
    }
    doc["conjuncts"] = conjuncts;
    json fused = json::array();
    for (std::size_t i = 0; i < model.infos().size(); ++i) {
      const ConjunctInfo& info = model.infos()[i];
      json produces = json::object();
      for (const auto& [v, t] : info.produces) produces[proc.var_name(v)] = t;
      json consumes = json::object();
      for (const auto& [v, a] : info.consumes) {
        consumes[proc.var_name(v)] = {{"base", a.base}, {"slope", a.slope}};
      }
      fused.push_back({{"first", model.fused()[i].begin + 1},
                       {"last", model.fused()[i].end},
                       {"cost", info.cost},
                       {"produces", produces},
                       {"consumes", consumes}});
    }
    doc["fused"] = fused;
    doc["middle"] = trace.middle ? json::array({trace.middle->begin + 1, trace.middle->end})
                                 : json(nullptr);
    json cands = json::array();
    for (std::size_t i = 0; i < shown; ++i) {
      cands.push_back({{"partition", model.to_original(candidates[i].partition).str()},
                       {"time", candidates[i].time}});
    }
    doc["candidates"] = cands;
    doc["evaluations"] = trace.evals;
    auto shape = [&](const std::optional<Partition>& p) {
      return p ? json(model.to_original(*p).str()) : json(nullptr);
    };
    doc["chosen"] = shape(trace.chosen);
    doc["shrunk"] = shape(trace.shrunk);
    doc["expanded"] = shape(trace.expanded);
    doc["advice"] = advice ? record_json(*advice) : json(nullptr);
    doc["rejection"] = advice ? json(nullptr) : json(trace.rejection);
    out << json_io::dump(doc);
    return kExitOk;
  }

  out << "conjunction " << args.conjunction << " (" << goals.size() << " conjuncts)\n";
  for (std::size_t i = 0; i < goals.size(); ++i) {
    out << "  c" << i + 1 << "  goal " << to_int(goals[i]->id) << "  " << goals[i]->kind_name()
        << "  cost " << format_cost(goal_cost(*goals[i], in.profile)) << "\n";
  }
  out << "timelines (zero-cost unifications fused):\n";
  for (std::size_t i = 0; i < model.infos().size(); ++i) {
    const ConjunctInfo& info = model.infos()[i];
    Group g = model.fused()[i];
    out << "  c" << g.begin + 1;
    if (g.size() > 1) out << "..c" << g.end;
    out << "  cost " << format_cost(info.cost);
    if (!info.produces.empty()) out << "  produces" << var_list(proc, info.produces);
    if (!info.consumes.empty()) {
      out << "  consumes";
      for (const auto& [v, a] : info.consumes) out << " " << proc.var_name(v) << "@" << format_cost(a.base);
    }
    out << "\n";
  }
  if (!trace.middle) {
    out << "no advice: " << trace.rejection << "\n";
    return kExitOk;
  }
  Partition middle_p{{*trace.middle}};
  out << "middle: " << model.to_original(middle_p).str() << "\n";
  out << "search: best time " << format_cost(trace.search.time) << " after " << trace.evals
      << " evaluations\n";
  if (shown > 0) {
    out << "candidates (" << shown << " of " << candidates.size() << "):\n";
    for (std::size_t i = 0; i < shown; ++i) {
      out << "  " << format_cost(candidates[i].time) << "  "
          << model.to_original(candidates[i].partition).str() << "\n";
    }
  }
  if (trace.chosen) out << "chosen: " << model.to_original(*trace.chosen).str() << "\n";
  if (trace.shrunk) out << "after shrinking: " << model.to_original(*trace.shrunk).str() << "\n";
  if (trace.expanded) out << "after expanding: " << model.to_original(*trace.expanded).str() << "\n";
  if (advice) {
    out << "advice: " << advice->form() << "  seq " << format_cost(advice->seq_time) << " par "
        << format_cost(advice->par_time) << " speedup " << fmt(advice->speedup) << "\n";
  } else {
    out << "no advice: " << trace.rejection << "\n";
  }
  return kExitOk;
}

// simulate -------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::string conjunction;
  std::string partition;
  bool trace = false;
};

int simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  ExploreParams params = resolve_params(args.common);
  Inputs in = load_inputs(args.common, err);
  if (has_errors(in.diagnostics)) return kExitDiagnostics;
  Located where = locate(in.program, args.conjunction);
  Partition p;
  try {
    p = parse_partition(args.partition);
  } catch (const Error& e) {
    throw UsageError(std::string("--partition: ") + e.what());
  }
  const auto& goals = std::get<Conj>(where.goal->node).goals;
  if (p.end() > goals.size()) {
    throw UsageError("--partition: conjunction has only " + std::to_string(goals.size()) +
                     " conjuncts");
  }
  std::optional<int> engines;
  if (args.common.engines_opt && args.common.engines_opt->count()) {
    if (args.common.engines < 1) throw UsageError("--engines must be at least 1");
    engines = args.common.engines;
  }
  TimingModel timing(in.program, in.profile);
  std::vector<const Goal*> ptrs;
  for (const Goal& g : goals) ptrs.push_back(&g);
  std::vector<ConjunctInfo> infos = timing.conjunct_infos(ptrs);
  std::vector<ConjunctTimeline> timelines = partition_timelines(infos, p, p.end());
  const OverheadParams& o = params.planner.overheads;
  SimResult r = simulate_execution(timelines, o, engines);
  double predicted = find_par_time(timelines, o);
  double seq = 0.0;
  for (const ConjunctTimeline& t : timelines) seq += t.seq_cost;

  if (args.common.format == "json") {
    json doc;
    doc["command"] = "simulate";
    doc["conjunction"] = args.conjunction;
    doc["partition"] = p.str();
    doc["engines"] = engines ? json(*engines) : json(nullptr);
    doc["makespan"] = r.makespan;
    doc["predicted"] = predicted;
    doc["sequential"] = seq;
    json events = json::array();
    if (args.trace) {
      for (const SimEvent& e : r.trace) {
        events.push_back({{"time", e.time},
                          {"kind", std::string(to_string(e.kind))},
                          {"conjunct", e.conjunct > 0 ? json(e.conjunct) : json(nullptr)},
                          {"var", e.var ? json(where.proc->var_name(*e.var)) : json(nullptr)},
                          {"engine", e.engine >= 0 ? json(e.engine) : json(nullptr)}});
      }
    }
    doc["trace"] = events;
    out << json_io::dump(doc);
    return kExitOk;
  }
  out << "partition " << p.str() << "\n";
  out << "engines " << (engines ? std::to_string(*engines) : std::string("unlimited")) << "\n";
  out << "makespan " << format_cost(r.makespan) << "\n";
  out << "predicted " << format_cost(predicted) << "\n";
  out << "sequential " << format_cost(seq) << "\n";
  if (args.trace) out << r.trace_text();
  return kExitOk;
}

// validate -------------------------------------------------------------

struct Check {
  std::string name;
  std::uint64_t cases = 0;
  std::uint64_t failures = 0;
  std::string first_failure;

  void expect(bool ok, const std::function<std::string()>& what) {
    ++cases;
    if (ok) return;
    if (failures++ == 0) first_failure = what();
  }
};

// Search against enumeration and the simulator against the predictor on
// every candidate conjunction of a program.
void check_program(const std::string& label, const Program& program, const Profile& profile,
                   Check& search, Check& model) {
  TimingModel timing(program, profile);
  for (const auto& [key, proc] : program.procedures) {
    for_each_goal(proc.body, [&](const Goal& g) {
      const auto* conj = std::get_if<Conj>(&g.node);
      if (conj == nullptr || conj->goals.size() < 2) return;
      ConjunctionModel m(timing, g);
      const auto& infos = m.infos();
      if (infos.size() > 10) return;
      std::string where = label + " " + key.str() + ":" + std::to_string(to_int(g.id));
      for (const OverheadParams& o : {OverheadParams::ZERO, OverheadParams::defaults()}) {
        Group span{0, infos.size()};
        SearchBudget budget{std::numeric_limits<std::uint64_t>::max(), 0};
        SearchResult s = find_best_partition(infos, span, o, budget);
        SearchResult b = brute_force_best(infos, span, o);
        search.expect(s.time == b.time && s.partitions == b.partitions,
                      [&] { return where + ": search differs from enumeration"; });
        for (const Partition& p : enumerate_partitions(infos.size())) {
          auto t = partition_timelines(infos, p, p.end());
          double sim = simulate_execution(t, o).makespan;
          double pred = find_par_time(t, o);
          model.expect(sim == pred, [&] {
            return where + " " + p.str() + ": simulated " + format_cost(sim) + ", predicted " +
                   format_cost(pred);
          });
        }
      }
    });
  }
}

struct ValidateArgs {
  Common common;
  std::uint64_t random_cases = 1000;
};

int validate_cmd(const ValidateArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<Check> checks;
  Check inputs;
  inputs.name = "inputs validate";
  Check search;
  search.name = "search equals enumeration";
  Check model;
  model.name = "simulator equals predictor";
  bool given = !args.common.program.empty() || !args.common.profile.empty();
  if (given) {
    if (args.common.program.empty() || args.common.profile.empty()) {
      throw UsageError("validate needs both --program and --profile, or neither");
    }
    Inputs in = load_inputs(args.common, err);
    inputs.expect(!has_errors(in.diagnostics), [&] { return in.diagnostics.front().str(); });
    if (!has_errors(in.diagnostics)) check_program(args.common.program, in.program, in.profile, search, model);
  } else {
    for (const std::string& name : fixture_names()) {
      Fixture f = make_fixture(name, args.common.seed);
      auto d = validate(f.program, f.profile);
      inputs.expect(d.empty(), [&] { return name + ": " + d.front().str(); });
      check_program(name, f.program, f.profile, search, model);
    }
    std::mt19937_64 rng(args.common.seed);
    for (std::uint64_t i = 0; i < args.random_cases; ++i) {
      auto t = random_timelines(rng, RandomShape{});
      OverheadParams o = random_overheads(rng, 20);
      double sim = simulate_execution(t, o).makespan;
      double pred = find_par_time(t, o);
      model.expect(sim == pred, [&] { return "random case " + std::to_string(i); });
      RandomShape shape;
      shape.max_conjuncts = 8;
      auto infos = random_infos(rng, shape);
      Group span{0, infos.size()};
      SearchBudget budget{std::numeric_limits<std::uint64_t>::max(), 0};
      SearchResult s = find_best_partition(infos, span, o, budget);
      SearchResult b = brute_force_best(infos, span, o);
      search.expect(s.time == b.time && s.partitions == b.partitions,
                    [&] { return "random case " + std::to_string(i); });
    }
  }
  checks = {inputs, search, model};
  bool ok = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.failures == 0; });
  if (args.common.format == "json") {
    json doc;
    doc["command"] = "validate";
    json arr = json::array();
    for (const Check& c : checks) {
      arr.push_back({{"name", c.name},
                     {"cases", c.cases},
                     {"failures", c.failures},
                     {"first_failure", c.failures ? json(c.first_failure) : json(nullptr)}});
    }
    doc["checks"] = arr;
    doc["passed"] = ok;
    out << json_io::dump(doc);
  } else {
    for (const Check& c : checks) {
      out << (c.failures == 0 ? "ok    " : "FAIL  ") << c.name << " (" << c.cases << " cases";
      if (c.failures) out << ", " << c.failures << " failed; first: " << c.first_failure;
      out << ")\n";
    }
    out << (ok ? "all oracle checks passed\n" : "oracle checks FAILED\n");
  }
  return ok ? kExitOk : kExitDiagnostics;
}

// gen-fixture ----------------------------------------------------------

struct GenArgs {
  Common common;
  std::string name;
  std::string prefix;
};

int gen_fixture(const GenArgs& args, std::ostream& out) {
  Fixture f;
  try {
    f = make_fixture(args.name, args.common.seed);
  } catch (const Error& e) {
    throw UsageError(std::string(e.what()) + " (known: fig1-left, fig1-right, map-foldl, "
                     "two-level, quicksort, multi-clause, irregular, cheap, random)");
  }
  const std::string prog = args.prefix + ".prog";
  const std::string prof = args.prefix + ".prof";
  try {
    json_io::write_file(prog, json_io::dump(program_to_json(f.program)));
    json_io::write_file(prof, json_io::dump(profile_to_json(f.profile)));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  std::string conj = f.conj_proc.str() + ":" + std::to_string(to_int(f.conj_goal));
  if (args.common.format == "json") {
    json doc{{"command", "gen-fixture"},
             {"template", args.name},
             {"seed", args.common.seed},
             {"program", prog},
             {"profile", prof},
             {"conjunction", conj}};
    out << json_io::dump(doc);
  } else {
    out << "wrote " << prog << " and " << prof << "\n";
    out << "conjunction of interest: " << conj << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Profile-directed parallelisation advisor"};
  app.name("depar");
  app.require_subcommand(1);

  AdviseArgs advise_args;
  CLI::App* advise_cmd = app.add_subcommand("advise", "Explore the call tree and write advice");
  add_inputs(advise_cmd, advise_args.common, true);
  add_params(advise_cmd, advise_args.common);
  add_format(advise_cmd, advise_args.common);
  advise_cmd->add_option("--out", advise_args.out, "Advice file to write");
  advise_args.common.jobs_opt =
      advise_cmd->add_option("--jobs", advise_args.common.jobs, "Worker threads");
  advise_cmd->add_flag("--verbose", advise_args.verbose, "Print the exploration log");

  ExplainArgs explain_args;
  CLI::App* explain_cmd = app.add_subcommand("explain", "Show how one conjunction is planned");
  add_inputs(explain_cmd, explain_args.common, true);
  add_params(explain_cmd, explain_args.common);
  add_format(explain_cmd, explain_args.common);
  explain_cmd->add_option("--conjunction", explain_args.conjunction, "<name/arity/mode>:<goal-id>")
      ->required();
  explain_cmd->add_option("--candidates", explain_args.max_candidates,
                          "Number of candidate partitions to list")
      ->capture_default_str();

  SimulateArgs sim_args;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Simulate one partition of a conjunction");
  add_inputs(sim_cmd, sim_args.common, true);
  add_format(sim_cmd, sim_args.common);
  sim_cmd->add_option("--config", sim_args.common.config, "Config file (JSON)");
  sim_cmd->add_option("--overheads-file", sim_args.common.overheads_file,
                      "Config file whose overheads section is used");
  sim_cmd->add_option("--conjunction", sim_args.conjunction, "<name/arity/mode>:<goal-id>")
      ->required();
  sim_cmd->add_option("--partition", sim_args.partition, "Groups such as \"1,2|3\"")->required();
  sim_args.common.engines_opt =
      sim_cmd->add_option("--engines", sim_args.common.engines, "Engines (default: unlimited)");
  sim_cmd->add_flag("--trace", sim_args.trace, "Print the event trace");

  ValidateArgs val_args;
  CLI::App* val_cmd = app.add_subcommand("validate", "Check inputs and run the oracle cross-checks");
  add_inputs(val_cmd, val_args.common, false);
  add_format(val_cmd, val_args.common);
  val_cmd->add_option("--seed", val_args.common.seed, "Seed for random cases")->capture_default_str();
  val_cmd->add_option("--random-cases", val_args.random_cases, "Random conjunctions to check")
      ->capture_default_str();

  GenArgs gen_args;
  CLI::App* gen_cmd = app.add_subcommand("gen-fixture", "Write a built-in program and profile");
  gen_cmd->add_option("template", gen_args.name, "Fixture template")->required();
  gen_cmd->add_option("--seed", gen_args.common.seed, "Seed for the random template")
      ->capture_default_str();
  gen_cmd->add_option("--out-prefix", gen_args.prefix, "Writes <prefix>.prog and <prefix>.prof")
      ->required();
  add_format(gen_cmd, gen_args.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "depar: " << e.what() << "\n";
    CLI::App* failed = &app;
    for (CLI::App* sub : app.get_subcommands()) failed = sub;
    err << failed->help();
    return kExitUsage;
  }

  try {
    if (*advise_cmd) return advise(advise_args, out, err);
    if (*explain_cmd) return explain(explain_args, out, err);
    if (*sim_cmd) return simulate(sim_args, out, err);
    if (*val_cmd) return validate_cmd(val_args, out, err);
    if (*gen_cmd) return gen_fixture(gen_args, out);
  } catch (const UsageError& e) {
    err << "depar: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "depar: " << e.what() << "\n";
    return kExitDiagnostics;
  }
  return kExitUsage;
}

}  // namespace depar::cli
