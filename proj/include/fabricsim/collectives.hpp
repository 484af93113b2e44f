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
#include <map>
#include <vector>

#include "fabricsim/events.hpp"
#include "fabricsim/topology.hpp"
#include "fabricsim/traffic.hpp"

namespace fabricsim {

enum class CollectiveAlgorithm : uint8_t { Ring, HierarchicalRing };

/// One directed chunk transfer inside a collective schedule.
struct SendOp {
  int step = 0;
  int sender = 0;    // rank
  int receiver = 0;  // rank
  double bytes = 0.0;
};

/// A full collective expressed as synchronous steps of concurrent sends.
/// Ops are ordered by (step, sender); a rank appears as sender at most
/// once per step.
struct ChunkSchedule {
  CollectiveAlgorithm algorithm = CollectiveAlgorithm::Ring;
  std::vector<int> participants;  // ring order
  double message_bytes = 0.0;
  int step_count = 0;
  std::vector<SendOp> ops;
};

/// Ring all-reduce: 2(p-1) steps, each rank forwarding message/p bytes to
/// its ring successor per step (reduce-scatter then all-gather).
ChunkSchedule plan_ring(const std::vector<int>& ring_order,
                        double message_bytes);

/// Hierarchical variant: chain-reduce onto each node's leader, ring
/// all-reduce across leaders, then chain-broadcast back down.
ChunkSchedule plan_hierarchical(const Topology& topo, double message_bytes);

/// Closed-form ring cost on an idle fabric with synchronized entry:
/// 2(p-1) * step_latency + (2(p-1)/p) * message / bandwidth.
/// step_latency is the full per-hop route latency of one step.
double analytic_ring_cost(int participants, double message_bytes,
                          double bandwidth, double step_latency);

/// Composition for the hierarchical schedule: two (gpus-1)-hop intra-node
/// chains at intra_bandwidth plus a leader ring over the fabric.
double analytic_hierarchical_cost(int nodes, int gpus_per_node,
                                  double message_bytes, double net_bandwidth,
                                  double net_step_latency,
                                  double intra_bandwidth);

struct CouplingFlags {
  // Senders start step transfers at their own entry instead of waiting
  // for the receiver; arrival is still held to the receiver's entry.
  bool eager_entry = false;
  // An idle rank blocked on a peer (a receiver that has not entered, or
  // an unarrived inbound chunk) holds a zero-byte fair-share reservation
  // on its next send's route. A rank still draining one of its own sends
  // is pipelining, not stalled, and holds nothing.
  bool stall_reservations = false;
};

struct CollectiveOutcome {
  std::vector<int> participants;
  std::vector<double> entry;       // by participant position
  std::vector<double> exit;        // last involved arrival
  std::vector<double> first_send;  // first own transfer start
  std::vector<double> send_busy;   // total own-transfer drain time
  double finish = 0.0;             // max exit
};

/// Event-driven execution of one collective over the shared fluid fabric.
///
/// An op (s, a->b) may start once every op of step s-1 involving a has
/// arrived and both endpoints have entered (under eager_entry only the
/// sender's entry gates the start). Completion is arrival: drain end plus
/// route latency. A rank exits when all ops involving it have arrived.
class CollectiveRun {
 public:
  CollectiveRun(const ChunkSchedule& schedule, const Topology& topo,
                NetState& net, EventQueue& queue, CouplingFlags flags);

  void rank_enter(int rank, double now);
  void on_flow_drained(int64_t flow, double now);
  void on_flow_arrived(int64_t flow, double now);
  /// True when the drained/arrived flow belongs to this collective.
  bool owns_flow(int64_t flow) const { return flow_to_op_.count(flow) != 0; }

  bool complete() const { return exited_ == participant_count(); }
  int participant_count() const {
    return static_cast<int>(schedule_.participants.size());
  }
  bool entered(int rank) const;
  CollectiveOutcome take_outcome() const;

 private:
  struct OpState {
    Route route;
    double fixed_rate = 0.0;  // >0 for intra-node ops
    int unmet = 0;            // unarrived deps + missing entry gates
    bool started = false;
    bool arrived = false;
    bool awaiting_receiver = false;  // drained, held for receiver entry
    double start = 0.0;
    double drain_end = 0.0;
    int64_t flow = -1;
  };

  void try_start(int op, double now);
  void satisfy(int op, double now);  // one gate cleared
  void recheck_reservation(int pos, double now);
  int pos_of(int rank) const { return rank_pos_[rank]; }

  const ChunkSchedule schedule_;
  const Topology& topo_;
  NetState& net_;
  EventQueue& queue_;
  CouplingFlags flags_;

  std::vector<int> rank_pos_;
  std::vector<OpState> op_state_;
  std::vector<std::vector<int>> deps_;           // op -> prior-step gates
  std::vector<std::vector<int>> dependents_;     // op -> next-step ops
  std::vector<std::vector<int>> entry_gated_;    // pos -> ops awaiting entry
  std::vector<std::vector<int>> sends_of_;       // pos -> own sends by step
  std::vector<int> next_send_;                   // pos -> index into sends_of_
  std::vector<std::vector<int>> receives_of_;    // pos -> inbound ops
  std::vector<int> ops_left_;                    // pos -> unarrived involved
  std::vector<int> active_sends_;                // pos -> own sends draining
  std::vector<int64_t> reservation_;             // pos -> flow id or -1
  std::map<int64_t, int> flow_to_op_;

  std::vector<char> entered_;
  std::vector<double> entry_, exit_, first_send_, send_busy_;
  int exited_ = 0;
};

/// Self-contained driver: runs one collective to completion with the given
/// entry times on an otherwise idle fabric built from `topo`.
CollectiveOutcome execute_collective(const Topology& topo,
                                     const ChunkSchedule& schedule,
                                     const std::vector<double>& entry_times,
                                     CouplingFlags flags = {});

}  // namespace fabricsim
