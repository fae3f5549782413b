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

#include "depar/config.hpp"

#include <cmath>

#include "depar/ir_json.hpp"

namespace depar {

using nlohmann::json;

namespace {

void read_number(const json& obj, const char* key, const std::string& path, double& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number() || !std::isfinite(v.get<double>()) || v.get<double>() < 0.0) {
    throw ParseError(path + "/" + key + ": expected a finite nonnegative number");
  }
  out = v.get<double>();
}

template <typename Int>
void read_count(const json& obj, const char* key, const std::string& path, Int& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() < 1) {
    throw ParseError(path + "/" + key + ": expected a positive integer");
  }
  out = static_cast<Int>(v.get<std::uint64_t>());
}

void read_bool(const json& obj, const char* key, const std::string& path, bool& out) {
  if (!obj.contains(key)) return;
  if (!obj.at(key).is_boolean()) throw ParseError(path + "/" + key + ": expected a boolean");
  out = obj.at(key).get<bool>();
}

void read_overheads(const json& o, OverheadParams& out) {
  json_io::check_keys(o, "/overheads",
                      {"spark_cost", "spark_delay", "signal_cost", "wait_cost",
                       "context_wakeup_delay", "barrier_cost"});
  read_number(o, "spark_cost", "/overheads", out.spark_cost);
  read_number(o, "spark_delay", "/overheads", out.spark_delay);
  read_number(o, "signal_cost", "/overheads", out.signal_cost);
  read_number(o, "wait_cost", "/overheads", out.wait_cost);
  read_number(o, "context_wakeup_delay", "/overheads", out.context_wakeup_delay);
  read_number(o, "barrier_cost", "/overheads", out.barrier_cost);
}

json parse_config(std::string_view text) {
  json doc = json_io::parse_text(text);
  json_io::check_keys(doc, "", {"format_version", "overheads", "thresholds", "search", "runtime"});
  json_io::check_version(doc, kConfigFormatVersion, "config");
  return doc;
}

}  // namespace

void apply_overheads(std::string_view text, OverheadParams& overheads) {
  json doc = parse_config(text);
  if (doc.contains("overheads")) read_overheads(doc["overheads"], overheads);
}

void apply_config(std::string_view text, ExploreParams& params) {
  json doc = parse_config(text);
  if (doc.contains("overheads")) read_overheads(doc["overheads"], params.planner.overheads);
  if (doc.contains("thresholds")) {
    const json& t = doc["thresholds"];
    json_io::check_keys(t, "/thresholds",
                        {"expensive", "call_cost", "speedup", "parallelism_saturation"});
    read_number(t, "expensive", "/thresholds", params.planner.expensive_threshold);
    read_number(t, "call_cost", "/thresholds", params.call_cost_threshold);
    read_number(t, "speedup", "/thresholds", params.planner.speedup_threshold);
    read_number(t, "parallelism_saturation", "/thresholds",
                params.parallelism_saturation_threshold);
  }
  if (doc.contains("search")) {
    const json& s = doc["search"];
    json_io::check_keys(s, "/search", {"eval_budget", "prune", "incremental"});
    read_count(s, "eval_budget", "/search", params.planner.eval_budget);
    read_bool(s, "prune", "/search", params.planner.search.prune);
    read_bool(s, "incremental", "/search", params.planner.search.incremental);
  }
  if (doc.contains("runtime")) {
    const json& r = doc["runtime"];
    json_io::check_keys(r, "/runtime", {"num_cpus", "throttle_limit", "jobs"});
    read_count(r, "num_cpus", "/runtime", params.num_cpus);
    read_count(r, "jobs", "/runtime", params.jobs);
    if (r.contains("throttle_limit") && !r["throttle_limit"].is_null()) {
      int limit = 0;
      read_count(r, "throttle_limit", "/runtime", limit);
      params.throttle_limit = limit;
    }
  }
  params.check();
}

json config_to_json(const ExploreParams& params) {
  const OverheadParams& o = params.planner.overheads;
  json doc;
  doc["format_version"] = kConfigFormatVersion;
  doc["overheads"] = {{"spark_cost", o.spark_cost},
                      {"spark_delay", o.spark_delay},
                      {"signal_cost", o.signal_cost},
                      {"wait_cost", o.wait_cost},
                      {"context_wakeup_delay", o.context_wakeup_delay},
                      {"barrier_cost", o.barrier_cost}};
  doc["thresholds"] = {{"expensive", params.planner.expensive_threshold},
                       {"call_cost", params.call_cost_threshold},
                       {"speedup", params.planner.speedup_threshold},
                       {"parallelism_saturation", params.parallelism_saturation_threshold}};
  doc["search"] = {{"eval_budget", params.planner.eval_budget},
                   {"prune", params.planner.search.prune},
                   {"incremental", params.planner.search.incremental}};
  doc["runtime"] = {{"num_cpus", params.num_cpus},
                    {"throttle_limit", params.throttle_limit ? json(*params.throttle_limit)
                                                             : json(nullptr)},
                    {"jobs", params.jobs}};
  return doc;
}

}  // namespace depar
