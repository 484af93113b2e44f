/*
 * Copyright 2026 The fabricsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fabricsim/metrics.hpp"
#include "fabricsim/scenario.hpp"

namespace fabricsim {

struct SweepSpec {
  ScenarioConfig base;  // template; nodes/coordination/seed are overridden
  std::vector<int> node_counts;
  int repeats = 1;
  bool run_baseline = true;
  bool run_coordination = true;
};

struct SweepRow {
  int nodes = 0;
  std::string variant;  // "baseline" or "coordination"
  int repeat = -1;      // -1: aggregate mean over repeats
  RunMetrics metrics;
  double efficiency = 0.0;  // throughput / (nodes * single-node reference)
};

struct SweepResult {
  double reference_throughput = 0.0;  // mean single-node baseline
  std::vector<SweepRow> rows;         // per-repeat rows then mean rows
};

/// Runs the grid. Baseline and coordination share the seed at each
/// (nodes, repeat) cell, so the comparison is paired: identical compute
/// draws and background phases, differing only in pacing delays. The
/// single-node reference for efficiency is run with coordination off.
SweepResult run_sweep(const SweepSpec& spec,
                      const std::function<void(const SweepRow&)>& on_row = {});

/// Columns: nodes,variant,repeat,mean_iter_s,throughput_sps,cv,p95_s,
/// p99_s,efficiency. Aggregate rows carry "mean" in the repeat column.
void write_sweep_csv(const SweepResult& result, std::ostream& out);
nlohmann::ordered_json sweep_to_json(const SweepResult& result);

}  // namespace fabricsim
