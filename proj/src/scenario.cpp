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

#include <fstream>
#include <initializer_list>
#include <string>

#include "fabricsim/error.hpp"

namespace fabricsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path, msg);
}

std::string sub(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (item.key() == a) {
        known = true;
        break;
      }
    if (!known) fail(sub(path, item.key()), "unknown key");
  }
}

double num_field(const json& j, const std::string& path, const char* key,
                 double def) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number()) fail(sub(path, key), "expected a number");
  return v.get<double>();
}

int int_field(const json& j, const std::string& path, const char* key,
              int def) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(sub(path, key), "expected an integer");
  return v.get<int>();
}

uint64_t u64_field(const json& j, const std::string& path, const char* key,
                   uint64_t def) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number_integer() ||
      (!v.is_number_unsigned() && v.get<int64_t>() < 0))
    fail(sub(path, key), "expected a non-negative integer");
  return v.get<uint64_t>();
}

bool bool_field(const json& j, const std::string& path, const char* key,
                bool def) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_boolean()) fail(sub(path, key), "expected a boolean");
  return v.get<bool>();
}

std::string str_field(const json& j, const std::string& path, const char* key,
                      const std::string& def) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_string()) fail(sub(path, key), "expected a string");
  return v.get<std::string>();
}

void expect_range(double v, double lo, double hi, const std::string& path) {
  if (!(v >= lo && v <= hi))
    fail(path, "value " + std::to_string(v) + " outside [" +
                   std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

void expect_min(double v, double lo, const std::string& path) {
  if (!(v >= lo))
    fail(path, "value " + std::to_string(v) + " must be >= " +
                   std::to_string(lo));
}

TopologyConfig parse_topology(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path,
             {"nodes", "gpus_per_node", "leaves", "uplinks_per_leaf",
              "link_bandwidth_gbps", "uplink_bandwidth_gbps",
              "link_latency_us", "intra_node_bandwidth_gbps",
              "far_path_penalty", "far_gpus_per_node", "asymmetric_routing",
              "placement"});
  TopologyConfig t;
  t.nodes = int_field(j, path, "nodes", t.nodes);
  t.gpus_per_node = int_field(j, path, "gpus_per_node", t.gpus_per_node);
  t.leaves = int_field(j, path, "leaves", t.leaves);
  t.uplinks_per_leaf =
      int_field(j, path, "uplinks_per_leaf", t.uplinks_per_leaf);
  t.link_bandwidth_gbps =
      num_field(j, path, "link_bandwidth_gbps", t.link_bandwidth_gbps);
  if (j.contains("uplink_bandwidth_gbps"))
    t.uplink_bandwidth_gbps =
        num_field(j, path, "uplink_bandwidth_gbps", 0.0);
  t.link_latency_us = num_field(j, path, "link_latency_us", t.link_latency_us);
  t.intra_node_bandwidth_gbps = num_field(j, path, "intra_node_bandwidth_gbps",
                                          t.intra_node_bandwidth_gbps);
  t.far_path_penalty = num_field(j, path, "far_path_penalty", t.far_path_penalty);
  t.far_gpus_per_node =
      int_field(j, path, "far_gpus_per_node", t.far_gpus_per_node);
  t.asymmetric_routing =
      bool_field(j, path, "asymmetric_routing", t.asymmetric_routing);
  std::string placement = str_field(j, path, "placement", "contiguous");
  if (placement == "contiguous") {
    t.placement = Placement::Contiguous;
  } else if (placement == "round_robin") {
    t.placement = Placement::RoundRobin;
  } else {
    fail(sub(path, "placement"), "expected \"contiguous\" or \"round_robin\"");
  }
  return t;
}

WorkloadConfig parse_workload(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path,
             {"base_compute_ms", "jitter", "straggler_prob",
              "straggler_slowdown", "locality_penalty", "per_rank_batch"});
  WorkloadConfig w;
  w.base_compute_ms = num_field(j, path, "base_compute_ms", w.base_compute_ms);
  expect_min(w.base_compute_ms, 0.0, sub(path, "base_compute_ms"));
  if (j.contains("jitter")) {
    const json& jj = j.at("jitter");
    const std::string jpath = sub(path, "jitter");
    require_object(jj, jpath);
    check_keys(jj, jpath, {"family", "sigma", "shape"});
    std::string family = str_field(jj, jpath, "family", "none");
    if (family == "none") {
      w.jitter = JitterFamily::None;
    } else if (family == "lognormal") {
      w.jitter = JitterFamily::LogNormal;
      w.jitter_sigma = num_field(jj, jpath, "sigma", 0.0);
      expect_min(w.jitter_sigma, 0.0, sub(jpath, "sigma"));
    } else if (family == "gamma") {
      w.jitter = JitterFamily::Gamma;
      w.jitter_shape = num_field(jj, jpath, "shape", 0.0);
      if (w.jitter_shape <= 0.0)
        fail(sub(jpath, "shape"), "gamma shape must be > 0");
    } else {
      fail(sub(jpath, "family"),
           "expected \"none\", \"lognormal\" or \"gamma\"");
    }
  }
  w.straggler_prob = num_field(j, path, "straggler_prob", w.straggler_prob);
  expect_range(w.straggler_prob, 0.0, 1.0, sub(path, "straggler_prob"));
  w.straggler_slowdown =
      num_field(j, path, "straggler_slowdown", w.straggler_slowdown);
  expect_min(w.straggler_slowdown, 1.0, sub(path, "straggler_slowdown"));
  w.locality_penalty =
      num_field(j, path, "locality_penalty", w.locality_penalty);
  expect_min(w.locality_penalty, 1.0, sub(path, "locality_penalty"));
  w.per_rank_batch = int_field(j, path, "per_rank_batch", w.per_rank_batch);
  if (w.per_rank_batch < 1)
    fail(sub(path, "per_rank_batch"), "must be >= 1");
  return w;
}

CollectiveConfig parse_collective(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path,
             {"algorithm", "message_bytes", "ring_order", "eager_entry",
              "stall_reservations"});
  CollectiveConfig c;
  std::string algo = str_field(j, path, "algorithm", "ring");
  if (algo == "ring") {
    c.algorithm = CollectiveAlgorithm::Ring;
  } else if (algo == "hierarchical_ring") {
    c.algorithm = CollectiveAlgorithm::HierarchicalRing;
  } else {
    fail(sub(path, "algorithm"),
         "expected \"ring\" or \"hierarchical_ring\"");
  }
  c.message_bytes = num_field(j, path, "message_bytes", c.message_bytes);
  if (c.message_bytes < 1.0)
    fail(sub(path, "message_bytes"), "must be >= 1");
  c.ring_order = str_field(j, path, "ring_order", c.ring_order);
  if (c.ring_order != "natural")
    fail(sub(path, "ring_order"), "only \"natural\" is defined");
  c.couplings.eager_entry =
      bool_field(j, path, "eager_entry", c.couplings.eager_entry);
  c.couplings.stall_reservations = bool_field(
      j, path, "stall_reservations", c.couplings.stall_reservations);
  return c;
}

BackgroundTraffic parse_background_entry(const json& j,
                                         const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"tier", "load", "on_ms", "off_ms", "seed_offset"});
  BackgroundTraffic b;
  std::string tier = str_field(j, path, "tier", "spine");
  if (tier == "leaf") {
    b.tier = LinkTier::Leaf;
  } else if (tier == "spine") {
    b.tier = LinkTier::Spine;
  } else {
    fail(sub(path, "tier"), "expected \"leaf\" or \"spine\"");
  }
  b.load = num_field(j, path, "load", b.load);
  if (!(b.load >= 0.0 && b.load < 1.0))
    fail(sub(path, "load"), "load fraction must be in [0, 1)");
  b.on_ms = num_field(j, path, "on_ms", b.on_ms);
  expect_min(b.on_ms, 0.0, sub(path, "on_ms"));
  b.off_ms = num_field(j, path, "off_ms", b.off_ms);
  expect_min(b.off_ms, 0.0, sub(path, "off_ms"));
  b.seed_offset = u64_field(j, path, "seed_offset", b.seed_offset);
  return b;
}

PacingConfig parse_coordination(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path,
             {"enabled", "window_size", "skew_threshold",
              "max_delay_fraction", "target_quantile", "cooldown",
              "estimator"});
  PacingConfig p;
  p.enabled = bool_field(j, path, "enabled", p.enabled);
  p.window_size = int_field(j, path, "window_size", p.window_size);
  if (p.window_size < 2) fail(sub(path, "window_size"), "must be >= 2");
  p.skew_threshold = num_field(j, path, "skew_threshold", p.skew_threshold);
  if (p.skew_threshold <= 0.0)
    fail(sub(path, "skew_threshold"), "must be > 0");
  p.max_delay_fraction =
      num_field(j, path, "max_delay_fraction", p.max_delay_fraction);
  expect_range(p.max_delay_fraction, 0.0, 1.0,
               sub(path, "max_delay_fraction"));
  p.target_quantile = num_field(j, path, "target_quantile", p.target_quantile);
  if (!(p.target_quantile > 0.0 && p.target_quantile <= 1.0))
    fail(sub(path, "target_quantile"), "must be in (0, 1]");
  p.cooldown = int_field(j, path, "cooldown", p.cooldown);
  if (p.cooldown < 1) fail(sub(path, "cooldown"), "must be >= 1");
  std::string est = str_field(j, path, "estimator", "local");
  if (est == "local") {
    p.omniscient = false;
  } else if (est == "omniscient") {
    p.omniscient = true;
  } else {
    fail(sub(path, "estimator"), "expected \"local\" or \"omniscient\"");
  }
  return p;
}

}  // namespace

ScenarioConfig parse_scenario(const nlohmann::json& j) {
  require_object(j, "");
  check_keys(j, "",
             {"name", "seed", "iterations", "warmup_iterations", "topology",
              "workload", "collective", "background", "coordination"});
  ScenarioConfig s;
  s.name = str_field(j, "", "name", "");
  s.seed = u64_field(j, "", "seed", s.seed);
  s.iterations = int_field(j, "", "iterations", s.iterations);
  if (s.iterations < 1) fail("iterations", "must be >= 1");
  s.warmup_iterations =
      int_field(j, "", "warmup_iterations", s.warmup_iterations);
  if (s.warmup_iterations < 0 || s.warmup_iterations >= s.iterations)
    fail("warmup_iterations", "must be in [0, iterations)");
  if (j.contains("topology"))
    s.topology = parse_topology(j.at("topology"), "topology");
  if (j.contains("workload"))
    s.workload = parse_workload(j.at("workload"), "workload");
  if (j.contains("collective"))
    s.collective = parse_collective(j.at("collective"), "collective");
  if (j.contains("background")) {
    const json& bg = j.at("background");
    if (!bg.is_array()) fail("background", "expected an array");
    for (size_t i = 0; i < bg.size(); ++i)
      s.background.push_back(parse_background_entry(
          bg.at(i), "background[" + std::to_string(i) + "]"));
  }
  if (j.contains("coordination"))
    s.coordination = parse_coordination(j.at("coordination"), "coordination");
  // Topology cross-field validation lives in build_topology; run it here
  // so load-time errors surface with their config field paths.
  build_topology(s.topology);
  return s;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open scenario file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON in ") + path + ": " +
                              e.what());
  }
  return parse_scenario(j);
}

nlohmann::ordered_json scenario_to_json(const ScenarioConfig& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["iterations"] = s.iterations;
  j["warmup_iterations"] = s.warmup_iterations;

  nlohmann::ordered_json t;
  t["nodes"] = s.topology.nodes;
  t["gpus_per_node"] = s.topology.gpus_per_node;
  t["leaves"] = s.topology.leaves;
  t["uplinks_per_leaf"] = s.topology.uplinks_per_leaf;
  t["link_bandwidth_gbps"] = s.topology.link_bandwidth_gbps;
  if (s.topology.uplink_bandwidth_gbps)
    t["uplink_bandwidth_gbps"] = *s.topology.uplink_bandwidth_gbps;
  t["link_latency_us"] = s.topology.link_latency_us;
  t["intra_node_bandwidth_gbps"] = s.topology.intra_node_bandwidth_gbps;
  t["far_path_penalty"] = s.topology.far_path_penalty;
  t["far_gpus_per_node"] = s.topology.far_gpus_per_node;
  t["asymmetric_routing"] = s.topology.asymmetric_routing;
  t["placement"] = s.topology.placement == Placement::RoundRobin
                       ? "round_robin"
                       : "contiguous";
  j["topology"] = std::move(t);

  nlohmann::ordered_json w;
  w["base_compute_ms"] = s.workload.base_compute_ms;
  nlohmann::ordered_json jit;
  switch (s.workload.jitter) {
    case JitterFamily::None:
      jit["family"] = "none";
      break;
    case JitterFamily::LogNormal:
      jit["family"] = "lognormal";
      jit["sigma"] = s.workload.jitter_sigma;
      break;
    case JitterFamily::Gamma:
      jit["family"] = "gamma";
      jit["shape"] = s.workload.jitter_shape;
      break;
  }
  w["jitter"] = std::move(jit);
  w["straggler_prob"] = s.workload.straggler_prob;
  w["straggler_slowdown"] = s.workload.straggler_slowdown;
  w["locality_penalty"] = s.workload.locality_penalty;
  w["per_rank_batch"] = s.workload.per_rank_batch;
  j["workload"] = std::move(w);

  nlohmann::ordered_json c;
  c["algorithm"] = s.collective.algorithm == CollectiveAlgorithm::Ring
                       ? "ring"
                       : "hierarchical_ring";
  c["message_bytes"] = s.collective.message_bytes;
  c["ring_order"] = s.collective.ring_order;
  c["eager_entry"] = s.collective.couplings.eager_entry;
  c["stall_reservations"] = s.collective.couplings.stall_reservations;
  j["collective"] = std::move(c);

  nlohmann::ordered_json bgs = nlohmann::ordered_json::array();
  for (const BackgroundTraffic& b : s.background) {
    nlohmann::ordered_json e;
    e["tier"] = b.tier == LinkTier::Leaf ? "leaf" : "spine";
    e["load"] = b.load;
    e["on_ms"] = b.on_ms;
    e["off_ms"] = b.off_ms;
    e["seed_offset"] = b.seed_offset;
    bgs.push_back(std::move(e));
  }
  j["background"] = std::move(bgs);

  nlohmann::ordered_json p;
  p["enabled"] = s.coordination.enabled;
  p["window_size"] = s.coordination.window_size;
  p["skew_threshold"] = s.coordination.skew_threshold;
  p["max_delay_fraction"] = s.coordination.max_delay_fraction;
  p["target_quantile"] = s.coordination.target_quantile;
  p["cooldown"] = s.coordination.cooldown;
  p["estimator"] = s.coordination.omniscient ? "omniscient" : "local";
  j["coordination"] = std::move(p);
  return j;
}

}  // namespace fabricsim
