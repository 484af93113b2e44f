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

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "fabricsim/scenario.hpp"
#include "fabricsim/traffic.hpp"

namespace fabricsim {

/// One bulk-synchronous iteration. All per-rank vectors are indexed by
/// rank. Invariants: start <= compute_end <= entry <= first_send <= exit
/// <= start + iteration_time for every rank, with entry - compute_end ==
/// pacing_delay, and iteration_time == max_r(exit) - start.
struct IterationRecord {
  int64_t index = 0;
  bool warmup = false;
  double start = 0.0;
  double iteration_time = 0.0;
  double entry_spread = 0.0;
  std::vector<double> compute_end;
  std::vector<double> pacing_delay;
  std::vector<double> pacing_bound;
  std::vector<char> pacing_engaged;
  std::vector<double> entry;
  std::vector<double> first_send;
  std::vector<double> exit;
  std::vector<double> comm_busy;  // own-transfer drain time in the collective
};

struct LinkRecord {
  std::string name;
  LinkTier tier = LinkTier::Leaf;
  double capacity = 0.0;              // bytes/s per direction
  double shared_saturated_time = 0.0; // max over the two directions
  double collective_busy_time = 0.0;
};

struct RunResult {
  ScenarioConfig scenario;  // as executed (after CLI overrides)
  int ranks = 0;
  double idle_collective_cost = 0.0;  // synchronized entry, idle fabric
  std::vector<IterationRecord> iterations;
  std::vector<LinkRecord> links;  // stats cover non-warmup iterations only
};

/// Runs the scenario to completion. Deterministic: the same scenario and
/// seed produce a byte-identical serialized result.
RunResult run_simulation(const ScenarioConfig& scenario);

/// Stable serialization of a run (used by the determinism contract).
nlohmann::ordered_json result_to_json(const RunResult& result);

}  // namespace fabricsim
