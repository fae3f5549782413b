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

// Config files: thresholds, search settings and overheads as JSON.
//
//   {"format_version": 1,
//    "overheads": {"spark_cost": 50, ...},
//    "thresholds": {"expensive": 1000, "call_cost": 10000, "speedup": 1.01,
//                   "parallelism_saturation": 8},
//    "search": {"eval_budget": 1000, "prune": true, "incremental": true},
//    "runtime": {"num_cpus": 4, "throttle_limit": 32, "jobs": 1}}
//
// Every section and key is optional; unknown keys are errors.

#ifndef DEPAR_CONFIG_HPP_
#define DEPAR_CONFIG_HPP_

#include <string>
#include <string_view>

#include "depar/driver.hpp"
#include "json.hpp"

namespace depar {

inline constexpr int kConfigFormatVersion = 1;

// Overlays the values present in text onto params. Throws ParseError.
void apply_config(std::string_view text, ExploreParams& params);
// Overlays only the "overheads" section.
void apply_overheads(std::string_view text, OverheadParams& overheads);

nlohmann::json config_to_json(const ExploreParams& params);

}  // namespace depar

#endif  // DEPAR_CONFIG_HPP_
