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
#include <string>
#include <vector>

#include <json.hpp>

#include "fabricsim/collectives.hpp"
#include "fabricsim/coordination.hpp"
#include "fabricsim/topology.hpp"
#include "fabricsim/workload.hpp"

namespace fabricsim {

struct CollectiveConfig {
  CollectiveAlgorithm algorithm = CollectiveAlgorithm::Ring;
  double message_bytes = 1 << 20;
  // Only the natural (rank-index) ring order is defined.
  std::string ring_order = "natural";
  CouplingFlags couplings;
};

/// One synthetic competing-traffic pattern: demand-capped flows on every
/// link of a tier, square-wave duty cycle with a seeded phase offset.
struct BackgroundTraffic {
  LinkTier tier = LinkTier::Spine;
  double load = 0.0;  // demand cap as a fraction of link bandwidth, [0,1)
  double on_ms = 0.0;
  double off_ms = 0.0;
  uint64_t seed_offset = 0;
};

struct ScenarioConfig {
  std::string name;
  uint64_t seed = 42;
  int iterations = 50;
  int warmup_iterations = 5;  // excluded from metrics
  TopologyConfig topology;
  WorkloadConfig workload;
  CollectiveConfig collective;
  std::vector<BackgroundTraffic> background;
  PacingConfig coordination;
};

/// Strict parse: unknown keys, wrong types, and out-of-range values raise
/// ConfigError with the offending field path (e.g. "workload.jitter.sigma").
ScenarioConfig parse_scenario(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::string& path);

/// Inverse of parse_scenario: parse(to_json(s)) reproduces s exactly.
nlohmann::ordered_json scenario_to_json(const ScenarioConfig& s);

}  // namespace fabricsim
