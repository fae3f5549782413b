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

#include "depar/ir_json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace depar {

using nlohmann::json;

namespace json_io {

json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points one past the offending character.
    std::size_t offset = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
    int line = 1;
    int column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError("syntax error at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + e.what(),
                     line, column);
  }
}

void check_keys(const json& obj, std::string_view path,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) {
    throw ParseError(std::string(path) + ": expected an object");
  }
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (std::string_view a : allowed) ok = ok || a == key;
    if (!ok) throw ParseError(std::string(path) + ": unknown field '" + key + "'");
  }
}

void check_version(const json& doc, int expected, std::string_view what) {
  if (!doc.is_object() || !doc.contains("format_version")) {
    throw ParseError(std::string(what) + ": missing format_version");
  }
  const json& v = doc["format_version"];
  if (!v.is_number_integer() || v.get<int>() != expected) {
    throw ParseError(std::string(what) + ": unsupported format_version " + v.dump() +
                     " (expected " + std::to_string(expected) + ")");
  }
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << contents;
  if (!out) throw Error("error writing " + path);
}

}  // namespace json_io

namespace {

using json_io::check_keys;

template <typename T>
T get_field(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ParseError(path + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(path + "/" + key + ": wrong type");
  }
}

int get_int(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_number_integer()) {
    throw ParseError(path + "/" + key + ": expected an integer");
  }
  return obj.at(key).get<int>();
}

std::uint64_t get_count(const json& obj, const std::string& path, const char* key) {
  const json* v = obj.contains(key) ? &obj.at(key) : nullptr;
  if (v == nullptr || !v->is_number_integer() || v->get<std::int64_t>() < 0) {
    throw ParseError(path + "/" + key + ": expected a nonnegative integer");
  }
  return v->get<std::uint64_t>();
}

std::vector<VarId> get_vars(const json& obj, const std::string& path, const char* key) {
  std::vector<VarId> out;
  if (!obj.contains(key)) return out;
  const json& arr = obj.at(key);
  if (!arr.is_array()) throw ParseError(path + "/" + key + ": expected an array");
  for (const json& v : arr) {
    if (!v.is_number_integer()) throw ParseError(path + "/" + key + ": expected integers");
    out.push_back(VarId{v.get<std::int32_t>()});
  }
  return out;
}

ProcKey get_proc_key(const json& obj, const std::string& path, const char* key) {
  auto text = get_field<std::string>(obj, path, key);
  auto parsed = ProcKey::parse(text);
  if (!parsed) throw ParseError(path + "/" + key + ": bad procedure key '" + text + "'");
  return *parsed;
}

Goal parse_goal(const json& j, const std::string& path);

std::vector<Goal> parse_goal_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path + ": expected an array of goals");
  std::vector<Goal> goals;
  for (std::size_t i = 0; i < j.size(); ++i) {
    goals.push_back(parse_goal(j[i], path + "/" + std::to_string(i)));
  }
  return goals;
}

Goal parse_goal(const json& j, const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected a goal object");
  auto kind = get_field<std::string>(j, path, "kind");
  Goal goal;
  goal.id = GoalId{get_int(j, path, "id")};
  if (j.contains("det")) {
    auto d = parse_determinism(get_field<std::string>(j, path, "det"));
    if (!d) throw ParseError(path + "/det: unknown determinism");
    goal.det = *d;
  }
  if (j.contains("produces")) {
    auto vars = get_vars(j, path, "produces");
    goal.declared_produces = VarSet(vars.begin(), vars.end());
  }

  if (kind == "unify") {
    check_keys(j, path, {"kind", "id", "det", "produces", "lhs", "functor", "args"});
    Unify u;
    u.lhs = VarId{get_int(j, path, "lhs")};
    if (j.contains("functor")) u.functor = get_field<std::string>(j, path, "functor");
    u.args = get_vars(j, path, "args");
    goal.node = std::move(u);
  } else if (kind == "call") {
    check_keys(j, path, {"kind", "id", "det", "produces", "callee", "args", "site"});
    goal.node = Call{get_proc_key(j, path, "callee"), get_vars(j, path, "args"),
                     SiteId{get_int(j, path, "site")}};
  } else if (kind == "ho_call") {
    check_keys(j, path, {"kind", "id", "det", "produces", "closure", "args", "site"});
    goal.node = HigherOrderCall{VarId{get_int(j, path, "closure")},
                                get_vars(j, path, "args"), SiteId{get_int(j, path, "site")}};
  } else if (kind == "conj" || kind == "par_conj") {
    check_keys(j, path, {"kind", "id", "det", "produces", "goals"});
    if (!j.contains("goals")) throw ParseError(path + ": missing field 'goals'");
    goal.node = Conj{parse_goal_list(j.at("goals"), path + "/goals"), kind == "par_conj"};
  } else if (kind == "disj") {
    check_keys(j, path, {"kind", "id", "det", "produces", "goals"});
    if (!j.contains("goals")) throw ParseError(path + ": missing field 'goals'");
    goal.node = Disjunction{parse_goal_list(j.at("goals"), path + "/goals")};
  } else if (kind == "switch") {
    check_keys(j, path, {"kind", "id", "det", "produces", "var", "arms"});
    Switch s;
    s.var = VarId{get_int(j, path, "var")};
    if (!j.contains("arms") || !j.at("arms").is_array()) {
      throw ParseError(path + ": expected an 'arms' array");
    }
    const json& arms = j.at("arms");
    for (std::size_t i = 0; i < arms.size(); ++i) {
      std::string arm_path = path + "/arms/" + std::to_string(i);
      check_keys(arms[i], arm_path, {"functor", "binds", "goal"});
      SwitchArm arm;
      arm.functor = get_field<std::string>(arms[i], arm_path, "functor");
      arm.binds = get_vars(arms[i], arm_path, "binds");
      if (!arms[i].contains("goal")) throw ParseError(arm_path + ": missing field 'goal'");
      arm.goal = parse_goal(arms[i].at("goal"), arm_path + "/goal");
      s.arms.push_back(std::move(arm));
    }
    goal.node = std::move(s);
  } else if (kind == "ite") {
    check_keys(j, path, {"kind", "id", "det", "produces", "cond", "then", "else"});
    for (const char* k : {"cond", "then", "else"}) {
      if (!j.contains(k)) throw ParseError(path + ": missing field '" + k + "'");
    }
    goal.node = IfThenElse{parse_goal(j.at("cond"), path + "/cond"),
                           parse_goal(j.at("then"), path + "/then"),
                           parse_goal(j.at("else"), path + "/else")};
  } else if (kind == "not") {
    check_keys(j, path, {"kind", "id", "det", "produces", "goal"});
    if (!j.contains("goal")) throw ParseError(path + ": missing field 'goal'");
    goal.node = Negation{parse_goal(j.at("goal"), path + "/goal")};
  } else if (kind == "some") {
    check_keys(j, path, {"kind", "id", "det", "produces", "vars", "goal"});
    if (!j.contains("goal")) throw ParseError(path + ": missing field 'goal'");
    goal.node = Quantification{get_vars(j, path, "vars"), parse_goal(j.at("goal"), path + "/goal")};
  } else {
    throw ParseError(path + "/kind: unknown goal kind '" + kind + "'");
  }
  return goal;
}

json vars_json(const std::vector<VarId>& vars) {
  json arr = json::array();
  for (VarId v : vars) arr.push_back(to_int(v));
  return arr;
}

json vars_json(const VarSet& vars) {
  return vars_json(std::vector<VarId>(vars.begin(), vars.end()));
}

json goal_json(const Goal& g) {
  json j;
  j["id"] = to_int(g.id);
  j["kind"] = std::string(g.kind_name());
  if (g.det != Determinism::det) j["det"] = std::string(to_string(g.det));
  if (g.declared_produces) j["produces"] = vars_json(*g.declared_produces);
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Unify>) {
          j["lhs"] = to_int(node.lhs);
          if (!node.functor.empty()) j["functor"] = node.functor;
          if (!node.args.empty()) j["args"] = vars_json(node.args);
        } else if constexpr (std::is_same_v<T, Call>) {
          j["callee"] = node.callee.str();
          j["args"] = vars_json(node.args);
          j["site"] = to_int(node.site);
        } else if constexpr (std::is_same_v<T, HigherOrderCall>) {
          j["closure"] = to_int(node.closure);
          j["args"] = vars_json(node.args);
          j["site"] = to_int(node.site);
        } else if constexpr (std::is_same_v<T, Conj> || std::is_same_v<T, Disjunction>) {
          json goals = json::array();
          for (const Goal& c : node.goals) goals.push_back(goal_json(c));
          j["goals"] = std::move(goals);
        } else if constexpr (std::is_same_v<T, Switch>) {
          j["var"] = to_int(node.var);
          json arms = json::array();
          for (const SwitchArm& arm : node.arms) {
            json a;
            a["functor"] = arm.functor;
            if (!arm.binds.empty()) a["binds"] = vars_json(arm.binds);
            a["goal"] = goal_json(*arm.goal);
            arms.push_back(std::move(a));
          }
          j["arms"] = std::move(arms);
        } else if constexpr (std::is_same_v<T, IfThenElse>) {
          j["cond"] = goal_json(*node.cond);
          j["then"] = goal_json(*node.then_goal);
          j["else"] = goal_json(*node.else_goal);
        } else if constexpr (std::is_same_v<T, Negation>) {
          j["goal"] = goal_json(*node.inner);
        } else if constexpr (std::is_same_v<T, Quantification>) {
          j["vars"] = vars_json(node.vars);
          j["goal"] = goal_json(*node.inner);
        }
      },
      g.node);
  return j;
}

double get_cost(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    throw ParseError(path + "/" + key + ": expected a number");
  }
  double v = obj.at(key).get<double>();
  if (!std::isfinite(v) || v < 0.0) {
    throw ParseError(path + "/" + key + ": must be finite and nonnegative");
  }
  return v;
}

}  // namespace

Program parse_program(std::string_view text) {
  json doc = json_io::parse_text(text);
  json_io::check_version(doc, kProgramFormatVersion, "program");
  check_keys(doc, "", {"format_version", "entry", "externals", "procedures"});
  Program program;
  program.entry = get_proc_key(doc, "", "entry");
  if (doc.contains("externals")) {
    const json& ext = doc.at("externals");
    if (!ext.is_array()) throw ParseError("/externals: expected an array");
    for (std::size_t i = 0; i < ext.size(); ++i) {
      auto key = ext[i].is_string() ? ProcKey::parse(ext[i].get<std::string>()) : std::nullopt;
      if (!key) throw ParseError("/externals/" + std::to_string(i) + ": bad procedure key");
      program.externals.insert(*key);
    }
  }
  if (!doc.contains("procedures") || !doc.at("procedures").is_array()) {
    throw ParseError("/procedures: expected an array");
  }
  const json& procs = doc.at("procedures");
  for (std::size_t i = 0; i < procs.size(); ++i) {
    std::string path = "/procedures/" + std::to_string(i);
    const json& p = procs[i];
    check_keys(p, path, {"name", "arity", "mode", "det", "vars", "head", "body"});
    Procedure proc;
    proc.key.name = get_field<std::string>(p, path, "name");
    proc.key.arity = get_int(p, path, "arity");
    proc.key.mode = p.contains("mode") ? get_int(p, path, "mode") : 0;
    if (p.contains("det")) {
      auto d = parse_determinism(get_field<std::string>(p, path, "det"));
      if (!d) throw ParseError(path + "/det: unknown determinism");
      proc.det = *d;
    }
    if (p.contains("vars")) {
      const json& vars = p.at("vars");
      if (!vars.is_array()) throw ParseError(path + "/vars: expected an array");
      for (std::size_t k = 0; k < vars.size(); ++k) {
        std::string vpath = path + "/vars/" + std::to_string(k);
        check_keys(vars[k], vpath, {"id", "name"});
        proc.vars.push_back(Variable{VarId{get_int(vars[k], vpath, "id")},
                                     get_field<std::string>(vars[k], vpath, "name")});
      }
    }
    if (p.contains("head")) {
      const json& head = p.at("head");
      if (!head.is_array()) throw ParseError(path + "/head: expected an array");
      for (std::size_t k = 0; k < head.size(); ++k) {
        std::string hpath = path + "/head/" + std::to_string(k);
        check_keys(head[k], hpath, {"var", "mode"});
        auto mode = get_field<std::string>(head[k], hpath, "mode");
        if (mode != "in" && mode != "out") throw ParseError(hpath + "/mode: expected in|out");
        proc.head.push_back(HeadArg{VarId{get_int(head[k], hpath, "var")},
                                    mode == "in" ? ArgMode::in : ArgMode::out});
      }
    }
    if (static_cast<int>(proc.head.size()) != proc.key.arity) {
      throw ParseError(path + ": arity " + std::to_string(proc.key.arity) +
                       " does not match " + std::to_string(proc.head.size()) + " head args");
    }
    if (!p.contains("body")) throw ParseError(path + ": missing field 'body'");
    proc.body = parse_goal(p.at("body"), path + "/body");
    ProcKey key = proc.key;
    if (!program.procedures.emplace(key, std::move(proc)).second) {
      throw ParseError(path + ": duplicate procedure " + key.str());
    }
  }
  program.finalize();
  return program;
}

Profile parse_profile(std::string_view text) {
  json doc = json_io::parse_text(text);
  json_io::check_version(doc, kProfileFormatVersion, "profile");
  check_keys(doc, "", {"format_version", "sites", "goals", "conditions"});
  Profile profile;
  auto records = [&](const char* key) -> const json& {
    static const json empty = json::array();
    if (!doc.contains(key)) return empty;
    if (!doc.at(key).is_array()) throw ParseError(std::string("/") + key + ": expected an array");
    return doc.at(key);
  };
  const json& sites = records("sites");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    std::string path = "/sites/" + std::to_string(i);
    check_keys(sites[i], path, {"site", "count", "total_cost"});
    SiteId id{get_int(sites[i], path, "site")};
    SiteStats stats{get_count(sites[i], path, "count"), get_cost(sites[i], path, "total_cost")};
    if (!profile.sites.emplace(id, stats).second) throw ParseError(path + ": duplicate site");
  }
  const json& goals = records("goals");
  for (std::size_t i = 0; i < goals.size(); ++i) {
    std::string path = "/goals/" + std::to_string(i);
    check_keys(goals[i], path, {"goal", "count"});
    GoalId id{get_int(goals[i], path, "goal")};
    if (!profile.goal_counts.emplace(id, get_count(goals[i], path, "count")).second) {
      throw ParseError(path + ": duplicate goal");
    }
  }
  const json& conds = records("conditions");
  for (std::size_t i = 0; i < conds.size(); ++i) {
    std::string path = "/conditions/" + std::to_string(i);
    check_keys(conds[i], path, {"goal", "failures"});
    GoalId id{get_int(conds[i], path, "goal")};
    if (!profile.cond_failures.emplace(id, get_count(conds[i], path, "failures")).second) {
      throw ParseError(path + ": duplicate condition");
    }
  }
  return profile;
}

json program_to_json(const Program& program) {
  json doc;
  doc["format_version"] = kProgramFormatVersion;
  doc["entry"] = program.entry.str();
  json ext = json::array();
  for (const ProcKey& k : program.externals) ext.push_back(k.str());
  doc["externals"] = std::move(ext);
  json procs = json::array();
  for (const auto& [key, proc] : program.procedures) {
    json p;
    p["name"] = key.name;
    p["arity"] = key.arity;
    p["mode"] = key.mode;
    if (proc.det != Determinism::det) p["det"] = std::string(to_string(proc.det));
    json vars = json::array();
    for (const Variable& v : proc.vars) vars.push_back({{"id", to_int(v.id)}, {"name", v.name}});
    p["vars"] = std::move(vars);
    json head = json::array();
    for (const HeadArg& a : proc.head) {
      head.push_back({{"var", to_int(a.var)}, {"mode", a.mode == ArgMode::in ? "in" : "out"}});
    }
    p["head"] = std::move(head);
    p["body"] = goal_json(proc.body);
    procs.push_back(std::move(p));
  }
  doc["procedures"] = std::move(procs);
  return doc;
}

json profile_to_json(const Profile& profile) {
  json doc;
  doc["format_version"] = kProfileFormatVersion;
  json sites = json::array();
  for (const auto& [id, s] : profile.sites) {
    sites.push_back({{"site", to_int(id)}, {"count", s.count}, {"total_cost", s.total_cost}});
  }
  doc["sites"] = std::move(sites);
  json goals = json::array();
  for (const auto& [id, n] : profile.goal_counts) goals.push_back({{"goal", to_int(id)}, {"count", n}});
  doc["goals"] = std::move(goals);
  json conds = json::array();
  for (const auto& [id, n] : profile.cond_failures) {
    conds.push_back({{"goal", to_int(id)}, {"failures", n}});
  }
  doc["conditions"] = std::move(conds);
  return doc;
}

}  // namespace depar
