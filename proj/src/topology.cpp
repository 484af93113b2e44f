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

#include "fabricsim/topology.hpp"

#include <algorithm>

#include "fabricsim/rng.hpp"

namespace fabricsim {

namespace {

constexpr double kGbpsToBytes = 1e9 / 8.0;
constexpr double kMicros = 1e-6;

}  // namespace

int Topology::node_of(int rank) const {
  if (rank < 0 || rank >= rank_count_) throw ConfigError("", "unknown rank " + std::to_string(rank));
  return rank / gpus_per_node_;
}

int Topology::gpu_of(int rank) const {
  if (rank < 0 || rank >= rank_count_) throw ConfigError("", "unknown rank " + std::to_string(rank));
  return rank % gpus_per_node_;
}

Locality Topology::locality(int rank) const {
  const NodeSpec& n = nodes_.at(static_cast<size_t>(node_of(rank)));
  return n.locality.at(static_cast<size_t>(gpu_of(rank)));
}

Route Topology::route(int src_rank, int dst_rank) const {
  int src_node = node_of(src_rank);
  int dst_node = node_of(dst_rank);
  if (src_rank == dst_rank) throw ConfigError("", "self route rejected for rank " + std::to_string(src_rank));

  Route r;
  r.src_rank = src_rank;
  r.dst_rank = dst_rank;
  if (src_node == dst_node) return r;  // intra-node path, no fabric hops

  const NodeSpec& sn = nodes_[static_cast<size_t>(src_node)];
  const NodeSpec& dn = nodes_[static_cast<size_t>(dst_node)];
  r.hops.push_back({sn.nic_link, HopDir::Up});
  if (sn.leaf != dn.leaf) {
    // ECMP over spines: symmetric routing hashes the unordered pair so
    // both directions pick the same cable pair.
    uint64_t h = asymmetric_
                     ? derive_seed({static_cast<uint64_t>(src_rank), static_cast<uint64_t>(dst_rank)})
                     : derive_seed({static_cast<uint64_t>(std::min(src_rank, dst_rank)),
                                    static_cast<uint64_t>(std::max(src_rank, dst_rank))});
    int spine = static_cast<int>(h % static_cast<uint64_t>(spine_count_));
    r.hops.push_back({uplink_links_[static_cast<size_t>(sn.leaf)][static_cast<size_t>(spine)], HopDir::Up});
    r.hops.push_back({uplink_links_[static_cast<size_t>(dn.leaf)][static_cast<size_t>(spine)], HopDir::Down});
  }
  r.hops.push_back({dn.nic_link, HopDir::Down});
  for (const Hop& h : r.hops) r.latency += links_[static_cast<size_t>(h.link)].latency;
  return r;
}

double Topology::oversubscription_ratio(LinkTier tier) const {
  if (tier == LinkTier::IntraNode || tier == LinkTier::Spine) return 1.0;
  double down = 0.0;
  double up = 0.0;
  for (const Link& l : links_) {
    if (l.tier == LinkTier::Leaf) down += l.bandwidth;
    if (l.tier == LinkTier::Spine) up += l.bandwidth;
  }
  if (up <= 0.0) return 1.0;
  return down / up;
}

Topology build_topology(const TopologyConfig& config) {
  const char* section = "topology";
  auto fail = [&](const std::string& field, const std::string& msg) {
    throw ConfigError(std::string(section) + "." + field, msg);
  };

  if (config.nodes < 1) fail("nodes", "must be >= 1");
  if (config.gpus_per_node < 1) fail("gpus_per_node", "must be >= 1");
  if (config.leaves < 1) fail("leaves", "must be >= 1");
  if (config.uplinks_per_leaf < 0) fail("uplinks_per_leaf", "must be >= 0");
  if (config.link_bandwidth_gbps <= 0.0) fail("link_bandwidth_gbps", "must be > 0");
  if (config.uplink_bandwidth_gbps && *config.uplink_bandwidth_gbps <= 0.0)
    fail("uplink_bandwidth_gbps", "must be > 0");
  if (config.link_latency_us < 0.0) fail("link_latency_us", "must be >= 0");
  if (config.intra_node_bandwidth_gbps <= 0.0) fail("intra_node_bandwidth_gbps", "must be > 0");
  if (config.far_path_penalty < 1.0) fail("far_path_penalty", "must be >= 1");
  if (config.far_gpus_per_node < 0 || config.far_gpus_per_node > config.gpus_per_node)
    fail("far_gpus_per_node", "must be in [0, gpus_per_node]");

  int leaves = std::min(config.leaves, config.nodes);
  if (config.nodes % leaves != 0)
    fail("leaves", "nodes (" + std::to_string(config.nodes) + ") must divide evenly across leaves (" +
                       std::to_string(leaves) + ")");
  int nodes_per_leaf = config.nodes / leaves;
  if (leaves > 1 && config.uplinks_per_leaf < 1)
    fail("uplinks_per_leaf", "must be >= 1 when leaves > 1");
  // Cap uplinks at the downlink count: ratio stays >= 1 across sweeps.
  int uplinks = std::min(config.uplinks_per_leaf, nodes_per_leaf);

  double down_bw = config.link_bandwidth_gbps * kGbpsToBytes;
  double up_bw = config.uplink_bandwidth_gbps.value_or(config.link_bandwidth_gbps) * kGbpsToBytes;
  double latency = config.link_latency_us * kMicros;

  Topology t;
  t.rank_count_ = config.nodes * config.gpus_per_node;
  t.gpus_per_node_ = config.gpus_per_node;
  t.leaf_count_ = leaves;
  t.spine_count_ = uplinks;
  t.asymmetric_ = config.asymmetric_routing;

  for (int n = 0; n < config.nodes; ++n) {
    NodeSpec spec;
    spec.index = n;
    spec.leaf = config.placement == Placement::RoundRobin ? n % leaves : n / nodes_per_leaf;
    spec.first_rank = n * config.gpus_per_node;
    spec.gpu_count = config.gpus_per_node;
    spec.intra_node_bandwidth = config.intra_node_bandwidth_gbps * kGbpsToBytes;
    spec.far_path_penalty = config.far_path_penalty;
    spec.locality.resize(static_cast<size_t>(config.gpus_per_node), Locality::Near);
    for (int g = config.gpus_per_node - config.far_gpus_per_node; g < config.gpus_per_node; ++g)
      spec.locality[static_cast<size_t>(g)] = Locality::Far;

    Link nic;
    nic.id = static_cast<int>(t.links_.size());
    nic.bandwidth = down_bw;
    nic.latency = latency;
    nic.tier = LinkTier::Leaf;
    nic.name = "nic" + std::to_string(n);
    spec.nic_link = nic.id;
    t.links_.push_back(std::move(nic));
    t.nodes_.push_back(std::move(spec));
  }

  t.uplink_links_.assign(static_cast<size_t>(leaves), std::vector<int>());
  for (int l = 0; l < leaves; ++l) {
    for (int s = 0; s < uplinks; ++s) {
      Link up;
      up.id = static_cast<int>(t.links_.size());
      up.bandwidth = up_bw;
      up.latency = latency;
      up.tier = LinkTier::Spine;
      up.name = "up" + std::to_string(l) + "." + std::to_string(s);
      t.uplink_links_[static_cast<size_t>(l)].push_back(up.id);
      t.links_.push_back(std::move(up));
    }
  }
  return t;
}

}  // namespace fabricsim
