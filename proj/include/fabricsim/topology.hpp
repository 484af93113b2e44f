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
#include <optional>
#include <string>
#include <vector>

#include "fabricsim/error.hpp"

namespace fabricsim {

enum class LinkTier { IntraNode, Leaf, Spine };
enum class Locality { Near, Far };
enum class Placement { Contiguous, RoundRobin };

/// Two-tier leaf/spine fabric description. Bandwidths in Gb/s, latency in
/// microseconds; build_topology converts to bytes/s and seconds.
struct TopologyConfig {
  int nodes = 1;
  int gpus_per_node = 1;
  int leaves = 1;
  int uplinks_per_leaf = 1;
  double link_bandwidth_gbps = 100.0;       // node NIC / leaf downlink cables
  std::optional<double> uplink_bandwidth_gbps;  // leaf->spine cables; defaults to link bw
  double link_latency_us = 5.0;
  double intra_node_bandwidth_gbps = 300.0;
  double far_path_penalty = 1.0;
  int far_gpus_per_node = 0;  // last k GPUs of each node are Far
  bool asymmetric_routing = false;
  Placement placement = Placement::Contiguous;
};

/// A full-duplex cable. Capacity is enforced per direction by the traffic
/// module; the id names the cable, not a direction.
struct Link {
  int id = -1;
  double bandwidth = 0.0;  // bytes/s, per direction
  double latency = 0.0;    // seconds
  LinkTier tier = LinkTier::Leaf;
  std::string name;
};

struct NodeSpec {
  int index = -1;
  int leaf = -1;
  int first_rank = -1;
  int gpu_count = 0;
  int nic_link = -1;  // cable to the node's leaf switch
  std::vector<Locality> locality;  // per local GPU
  double intra_node_bandwidth = 0.0;  // bytes/s
  double far_path_penalty = 1.0;
};

/// Direction of travel over a cable: Up is node->leaf->spine.
enum class HopDir : uint8_t { Up, Down };

struct Hop {
  int link = -1;
  HopDir dir = HopDir::Up;
  bool operator==(const Hop&) const = default;
};

/// Fabric path between two ranks. Empty hop list iff both ranks live on
/// the same node (intra-node path).
struct Route {
  int src_rank = -1;
  int dst_rank = -1;
  std::vector<Hop> hops;
  double latency = 0.0;  // sum of hop link latencies
};

class Topology {
 public:
  int rank_count() const { return rank_count_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int leaf_count() const { return leaf_count_; }
  int spine_count() const { return spine_count_; }
  int gpus_per_node() const { return gpus_per_node_; }

  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(int id) const { return links_.at(static_cast<size_t>(id)); }

  int node_of(int rank) const;
  int gpu_of(int rank) const;
  int leaf_of_node(int node) const { return nodes_.at(static_cast<size_t>(node)).leaf; }
  Locality locality(int rank) const;

  /// Deterministic path between two distinct ranks. Self routes are
  /// rejected; unknown ranks are rejected.
  Route route(int src_rank, int dst_rank) const;

  /// Downlink/uplink bandwidth ratio at a tier. Tiers with nothing above
  /// them (Spine, IntraNode, or a Leaf tier with no uplinks) report 1.0.
  double oversubscription_ratio(LinkTier tier) const;

  bool asymmetric_routing() const { return asymmetric_; }

  friend Topology build_topology(const TopologyConfig& config);

 private:
  int rank_count_ = 0;
  int gpus_per_node_ = 1;
  int leaf_count_ = 0;
  int spine_count_ = 0;
  bool asymmetric_ = false;
  std::vector<NodeSpec> nodes_;
  std::vector<Link> links_;
  // uplink_links_[leaf][spine] -> link id
  std::vector<std::vector<int>> uplink_links_;
};

/// Builds the two-tier fabric. Validates bandwidths, node counts, and the
/// node/leaf division; uplinks per leaf are capped at the leaf's downlink
/// count so the oversubscription ratio stays >= 1.
Topology build_topology(const TopologyConfig& config);

}  // namespace fabricsim
