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

// Call-tree exploration and the advice file.

#ifndef DEPAR_DRIVER_HPP_
#define DEPAR_DRIVER_HPP_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depar/ir.hpp"
#include "depar/planner.hpp"

namespace depar {

struct ExploreParams {
  double call_cost_threshold = 10000.0;
  double parallelism_saturation_threshold = 8.0;
  PlannerParams planner;
  int jobs = 1;
  int num_cpus = 4;
  std::optional<int> throttle_limit;  // overrides 8 * num_cpus

  // Throws Error unless thresholds are positive and speedup_threshold >= 1.
  void check() const;
};

struct ExploreReport {
  // Sorted by (procedure, goal id); at most one record per conjunction.
  std::vector<Advice> advice;
  // One line per gate decision, revisit and rejected candidate, in DFS order.
  std::vector<std::string> log;
};

// Depth-first walk from the entry procedure. Throws Error when the entry
// point does not resolve to a procedure.
ExploreReport explore_call_tree(const Program& program, const Profile& profile,
                                const ExploreParams& params);

// Product of the speedups along a path; 1 for an empty path.
double accumulated_parallelism(const std::vector<double>& speedups);

inline constexpr int kAdviceFormatVersion = 1;

struct AdviceFile {
  int format_version = kAdviceFormatVersion;
  std::string fingerprint;
  int throttle_limit = 32;
  std::vector<Advice> records;

  bool operator==(const AdviceFile&) const = default;
};

// FNV-1a 64 of the canonical program serialisation, as 16 hex digits.
std::string program_fingerprint(const Program& program);

std::string advice_file_text(const AdviceFile& file);
// Throws ParseError; errors inside a record name the record index.
AdviceFile parse_advice_file(std::string_view text);
void emit_advice_file(const AdviceFile& file, const std::string& path);
AdviceFile read_advice_file(const std::string& path);

}  // namespace depar

#endif  // DEPAR_DRIVER_HPP_
