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

#include "fabricsim/scenario.hpp"

#include <doctest.h>

#include <fstream>
#include <string>

#include "fabricsim/error.hpp"

using namespace fabricsim;
using nlohmann::json;

namespace {

// Returns the field path ConfigError reports for a bad document.
std::string field_of(const json& j) {
  try {
    parse_scenario(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("empty document yields the documented defaults") {
  ScenarioConfig s = parse_scenario(json::object());
  CHECK(s.name.empty());
  CHECK(s.seed == 42);
  CHECK(s.iterations == 50);
  CHECK(s.warmup_iterations == 5);
  CHECK(s.topology.nodes == 1);
  CHECK(s.topology.link_bandwidth_gbps == 100.0);
  CHECK_FALSE(s.topology.uplink_bandwidth_gbps.has_value());
  CHECK(s.workload.base_compute_ms == 10.0);
  CHECK(s.workload.jitter == JitterFamily::None);
  CHECK(s.workload.per_rank_batch == 32);
  CHECK(s.collective.algorithm == CollectiveAlgorithm::Ring);
  CHECK(s.collective.message_bytes == 1048576.0);
  CHECK(s.background.empty());
  CHECK_FALSE(s.coordination.enabled);
  CHECK(s.coordination.window_size == 16);
}

TEST_CASE("round trip reproduces every field exactly") {
  ScenarioConfig s;
  s.name = "round-trip";
  s.seed = 31337;
  s.iterations = 80;
  s.warmup_iterations = 10;
  s.topology.nodes = 8;
  s.topology.gpus_per_node = 4;
  s.topology.leaves = 2;
  s.topology.uplinks_per_leaf = 2;
  s.topology.link_bandwidth_gbps = 200.0;
  s.topology.uplink_bandwidth_gbps = 400.0;
  s.topology.link_latency_us = 1.25;
  s.topology.intra_node_bandwidth_gbps = 600.0;
  s.topology.far_path_penalty = 1.5;
  s.topology.far_gpus_per_node = 1;
  s.topology.asymmetric_routing = true;
  s.topology.placement = Placement::RoundRobin;
  s.workload.base_compute_ms = 7.5;
  s.workload.jitter = JitterFamily::Gamma;
  s.workload.jitter_shape = 6.0;
  s.workload.straggler_prob = 0.02;
  s.workload.straggler_slowdown = 3.0;
  s.workload.locality_penalty = 1.3;
  s.workload.per_rank_batch = 16;
  s.collective.algorithm = CollectiveAlgorithm::HierarchicalRing;
  s.collective.message_bytes = 1 << 22;
  s.collective.couplings.eager_entry = true;
  s.collective.couplings.stall_reservations = true;
  s.background.push_back(BackgroundTraffic{LinkTier::Spine, 0.4, 30.0, 20.0, 1});
  s.background.push_back(BackgroundTraffic{LinkTier::Leaf, 0.1, 5.0, 0.0, 2});
  s.coordination.enabled = true;
  s.coordination.window_size = 8;
  s.coordination.skew_threshold = 0.2;
  s.coordination.max_delay_fraction = 0.5;
  s.coordination.target_quantile = 0.75;
  s.coordination.cooldown = 4;
  s.coordination.omniscient = true;

  // Through serialized text, as the CLI would write and read it.
  ScenarioConfig r = parse_scenario(json::parse(scenario_to_json(s).dump()));

  CHECK(r.name == s.name);
  CHECK(r.seed == s.seed);
  CHECK(r.iterations == s.iterations);
  CHECK(r.warmup_iterations == s.warmup_iterations);
  CHECK(r.topology.nodes == s.topology.nodes);
  CHECK(r.topology.gpus_per_node == s.topology.gpus_per_node);
  CHECK(r.topology.leaves == s.topology.leaves);
  CHECK(r.topology.uplinks_per_leaf == s.topology.uplinks_per_leaf);
  CHECK(r.topology.link_bandwidth_gbps == s.topology.link_bandwidth_gbps);
  REQUIRE(r.topology.uplink_bandwidth_gbps.has_value());
  CHECK(*r.topology.uplink_bandwidth_gbps == *s.topology.uplink_bandwidth_gbps);
  CHECK(r.topology.link_latency_us == s.topology.link_latency_us);
  CHECK(r.topology.intra_node_bandwidth_gbps ==
        s.topology.intra_node_bandwidth_gbps);
  CHECK(r.topology.far_path_penalty == s.topology.far_path_penalty);
  CHECK(r.topology.far_gpus_per_node == s.topology.far_gpus_per_node);
  CHECK(r.topology.asymmetric_routing == s.topology.asymmetric_routing);
  CHECK(r.topology.placement == s.topology.placement);
  CHECK(r.workload.base_compute_ms == s.workload.base_compute_ms);
  CHECK(r.workload.jitter == s.workload.jitter);
  CHECK(r.workload.jitter_shape == s.workload.jitter_shape);
  CHECK(r.workload.straggler_prob == s.workload.straggler_prob);
  CHECK(r.workload.straggler_slowdown == s.workload.straggler_slowdown);
  CHECK(r.workload.locality_penalty == s.workload.locality_penalty);
  CHECK(r.workload.per_rank_batch == s.workload.per_rank_batch);
  CHECK(r.collective.algorithm == s.collective.algorithm);
  CHECK(r.collective.message_bytes == s.collective.message_bytes);
  CHECK(r.collective.ring_order == s.collective.ring_order);
  CHECK(r.collective.couplings.eager_entry == s.collective.couplings.eager_entry);
  CHECK(r.collective.couplings.stall_reservations ==
        s.collective.couplings.stall_reservations);
  REQUIRE(r.background.size() == 2);
  CHECK(r.background[0].tier == LinkTier::Spine);
  CHECK(r.background[0].load == 0.4);
  CHECK(r.background[0].on_ms == 30.0);
  CHECK(r.background[0].off_ms == 20.0);
  CHECK(r.background[0].seed_offset == 1);
  CHECK(r.background[1].tier == LinkTier::Leaf);
  CHECK(r.coordination.enabled == s.coordination.enabled);
  CHECK(r.coordination.window_size == s.coordination.window_size);
  CHECK(r.coordination.skew_threshold == s.coordination.skew_threshold);
  CHECK(r.coordination.max_delay_fraction == s.coordination.max_delay_fraction);
  CHECK(r.coordination.target_quantile == s.coordination.target_quantile);
  CHECK(r.coordination.cooldown == s.coordination.cooldown);
  CHECK(r.coordination.omniscient == s.coordination.omniscient);

  // A second lap produces identical text.
  CHECK(scenario_to_json(r).dump() == scenario_to_json(s).dump());
}

TEST_CASE("unknown keys are rejected with their full path") {
  CHECK(field_of({{"bogus", 1}}) == "bogus");
  CHECK(field_of({{"topology", {{"nodez", 4}}}}) == "topology.nodez");
  CHECK(field_of({{"workload", {{"jitter", {{"family", "lognormal"},
                                            {"scale", 2.0}}}}}}) ==
        "workload.jitter.scale");
  CHECK(field_of({{"collective", {{"chunking", "auto"}}}}) ==
        "collective.chunking");
  CHECK(field_of({{"coordination", {{"alpha", 0.5}}}}) ==
        "coordination.alpha");
  json bg = json::array({json{{"tier", "spine"}}, json{{"tear", "leaf"}}});
  CHECK(field_of({{"background", bg}}) == "background[1].tear");
}

TEST_CASE("type errors name the offending field") {
  CHECK(field_of({{"seed", "abc"}}) == "seed");
  CHECK(field_of({{"seed", -3}}) == "seed");
  CHECK(field_of({{"iterations", 12.5}}) == "iterations");
  CHECK(field_of({{"topology", {{"nodes", "four"}}}}) == "topology.nodes");
  CHECK(field_of({{"workload", {{"straggler_prob", true}}}}) ==
        "workload.straggler_prob");
  CHECK(field_of({{"collective", {{"eager_entry", 1}}}}) ==
        "collective.eager_entry");
  CHECK(field_of({{"background", 7}}) == "background");
  CHECK(field_of({{"topology", 7}}) == "topology");
}

TEST_CASE("range errors name the offending field") {
  CHECK(field_of({{"iterations", 0}}) == "iterations");
  CHECK(field_of({{"iterations", 10}, {"warmup_iterations", 10}}) ==
        "warmup_iterations");
  CHECK(field_of({{"workload", {{"straggler_prob", 1.5}}}}) ==
        "workload.straggler_prob");
  CHECK(field_of({{"workload", {{"straggler_slowdown", 0.5}}}}) ==
        "workload.straggler_slowdown");
  CHECK(field_of({{"workload", {{"locality_penalty", 0.9}}}}) ==
        "workload.locality_penalty");
  CHECK(field_of({{"workload", {{"jitter", {{"family", "gamma"},
                                            {"shape", 0.0}}}}}}) ==
        "workload.jitter.shape");
  CHECK(field_of({{"workload", {{"jitter", {{"family", "weird"}}}}}}) ==
        "workload.jitter.family");
  CHECK(field_of({{"collective", {{"message_bytes", 0.5}}}}) ==
        "collective.message_bytes");
  CHECK(field_of({{"collective", {{"ring_order", "reversed"}}}}) ==
        "collective.ring_order");
  CHECK(field_of({{"background", json::array({json{{"load", 1.0}}})}}) ==
        "background[0].load");
  CHECK(field_of({{"coordination", {{"window_size", 1}}}}) ==
        "coordination.window_size");
  CHECK(field_of({{"coordination", {{"target_quantile", 0.0}}}}) ==
        "coordination.target_quantile");
  CHECK(field_of({{"topology", {{"placement", "diagonal"}}}}) ==
        "topology.placement");
}

TEST_CASE("topology cross-field validation runs at parse time") {
  CHECK(field_of({{"topology", {{"nodes", 6}, {"leaves", 4}}}}) ==
        "topology.leaves");
  CHECK(field_of({{"topology", {{"nodes", 4}, {"leaves", 2},
                                {"uplinks_per_leaf", 0}}}}) ==
        "topology.uplinks_per_leaf");
  CHECK(field_of({{"topology", {{"nodes", 0}}}}) == "topology.nodes");
}

TEST_CASE("scenario files load from disk and bad paths are reported") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/path.json"), ConfigError);

  const std::string path = "/tmp/fabricsim_test_scenario.json";
  {
    ScenarioConfig s;
    s.name = "disk";
    s.seed = 7;
    std::ofstream out(path);
    out << scenario_to_json(s).dump(2);
  }
  ScenarioConfig r = load_scenario(path);
  CHECK(r.name == "disk");
  CHECK(r.seed == 7);

  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_AS(load_scenario(path), ConfigError);
}
