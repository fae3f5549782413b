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

// Predicted parallel execution time of a dependent parallel conjunction on
// unlimited CPUs.

#ifndef DEPAR_OVERLAP_HPP_
#define DEPAR_OVERLAP_HPP_

#include <map>
#include <vector>

#include "depar/timing.hpp"

namespace depar {

struct OverheadParams {
  double spark_cost = 0.0;
  double spark_delay = 0.0;
  double signal_cost = 0.0;
  double wait_cost = 0.0;
  double context_wakeup_delay = 0.0;
  double barrier_cost = 0.0;

  static const OverheadParams ZERO;
  // Synthetic placeholder values, not measurements.
  static OverheadParams defaults();

  // Throws Error unless every field is finite and nonnegative.
  void check() const;
  bool operator==(const OverheadParams&) const = default;
};

struct ParTimeDetail {
  double total = 0.0;
  std::vector<double> conjunct_end;  // per-conjunct finishing time
  std::vector<bool> blocked;         // per-conjunct: waited on some producer
  double first_conj_time = 0.0;
  std::map<VarId, double> prod_time;
};

// Zero-overhead prediction: max over conjuncts of their finishing time.
double find_par_time_simple(const std::vector<ConjunctTimeline>& conjuncts);
ParTimeDetail find_par_time_simple_detail(const std::vector<ConjunctTimeline>& conjuncts);

// Prediction including spawn, signal, wait, wakeup and barrier overheads.
double find_par_time(const std::vector<ConjunctTimeline>& conjuncts,
                     const OverheadParams& overheads);
ParTimeDetail find_par_time_detail(const std::vector<ConjunctTimeline>& conjuncts,
                                   const OverheadParams& overheads);

// Sum of seq-costs over max parallel time. Throws Error on zero SeqTime.
double speedup(const std::vector<ConjunctTimeline>& conjuncts, const OverheadParams& overheads);

// Incremental form of find_par_time for partitions built left to right.
// Closed conjuncts are final; the open one is the current last conjunct.
class ParTimeAccumulator {
 public:
  explicit ParTimeAccumulator(const OverheadParams& overheads) : overheads_(overheads) {}

  // Adds a conjunct that is known not to be the last one.
  void close(const ConjunctTimeline& conjunct);
  // Time of the whole conjunction if `last` is its final conjunct.
  double finish(const ConjunctTimeline& last) const;
  std::size_t size() const { return count_; }

 private:
  double run(const ConjunctTimeline& conjunct, bool is_last, std::map<VarId, double>& prod) const;

  OverheadParams overheads_;
  std::map<VarId, double> prod_time_;
  std::size_t count_ = 0;
  double first_end_ = 0.0;
  double max_end_ = 0.0;
};

}  // namespace depar

#endif  // DEPAR_OVERLAP_HPP_
