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
#include <limits>
#include <map>
#include <vector>

#include "fabricsim/events.hpp"
#include "fabricsim/topology.hpp"

namespace fabricsim {

/// Each full-duplex cable exposes two independent directed resources.
using ResourceId = int32_t;

inline ResourceId resource_of(const Hop& hop) {
  return static_cast<ResourceId>(hop.link * 2 +
                                 (hop.dir == HopDir::Down ? 1 : 0));
}

/// One participant in a max-min allocation. `cap <= 0` means uncapped.
/// An empty resource list yields an unbounded rate and is rejected.
struct AllocFlow {
  std::vector<ResourceId> resources;
  double cap = 0.0;
};

/// Progressive-filling max-min fair share with per-flow demand caps.
/// Returns one rate per flow. Rates of flows sharing only equal-capacity
/// bottlenecks come out as exact equal splits (no iterative solve).
std::vector<double> max_min_allocate(const std::vector<AllocFlow>& flows,
                                     const std::vector<double>& capacity);

enum class FlowPhase : uint8_t {
  Draining,  // consuming capacity on its route
  InFlight,  // drained; trailing latency until arrival
  Done,
};

struct Flow {
  int64_t id = 0;
  std::vector<ResourceId> resources;  // empty for intra-node transfers
  double bytes = 0.0;
  double remaining = 0.0;
  double latency = 0.0;     // added after drain end
  double cap = 0.0;         // demand cap (background flows), <=0 uncapped
  double fixed_rate = 0.0;  // >0: fixed-rate path, not in the allocator
  bool reservation = false;
  bool background = false;
  bool on = true;  // background duty-cycle state
  FlowPhase phase = FlowPhase::Draining;
  double rate = 0.0;
  double drain_end = std::numeric_limits<double>::infinity();
  double arrival_time = std::numeric_limits<double>::infinity();
  // Time of the currently live drain event; bit-equality against the
  // popped event time distinguishes live events from stale ones.
  double scheduled_drain = std::numeric_limits<double>::infinity();
};

/// Per directed resource, accumulated between reset_stats() calls.
struct ResourceStats {
  double shared_saturated_time = 0.0;  // >=90% allocated, >=2 sharers
  double collective_busy_time = 0.0;   // >=1 collective flow draining
};

/// Fluid network state: the set of in-progress flows and their
/// piecewise-constant max-min fair rates. Rates stay fixed between
/// recompute() calls; advance_to() drains bytes under the current rates.
class NetState {
 public:
  explicit NetState(const Topology& topo);
  explicit NetState(std::vector<double> capacities);  // bare harness

  /// Starts a transfer. Empty-hop routes must supply fixed_rate > 0.
  int64_t add_transfer(const Route& route, double bytes, double fixed_rate = 0.0);
  /// Same, over raw directed resources (used by the bare-capacity harness).
  int64_t add_raw_transfer(std::vector<ResourceId> resources, double bytes,
                           double latency, double fixed_rate = 0.0);
  /// Zero-byte flow that holds a fair share on the route without draining.
  int64_t add_reservation(const Route& route);
  int64_t add_background(std::vector<ResourceId> resources, double cap);

  void set_background_on(int64_t id, bool on);
  void remove_flow(int64_t id);

  /// Drains active flows over [last_time, now] and integrates resource
  /// statistics. Must run before any same-timestamp flow mutations.
  void advance_to(double now);

  /// Re-solves the allocation if the flow set changed. Returns true if a
  /// solve happened (callers then refresh scheduled drain events).
  bool recompute_if_dirty();

  /// Pushes/refreshes TransferDone events for draining byte flows whose
  /// projected drain end moved. Call after a successful recompute.
  void reschedule_drains(EventQueue& queue, double now);

  enum class DrainEvent { Stale, Drained, Arrived };
  /// Classifies a popped TransferDone event. On Drained the flow stops
  /// consuming capacity (remaining forced to exactly zero) and the caller
  /// owns scheduling the arrival via set_arrival().
  DrainEvent on_transfer_event(const Event& event, double now);

  void set_arrival(int64_t id, double time, EventQueue& queue);
  void finish_flow(int64_t id);  // erase after arrival was consumed

  const Flow& flow(int64_t id) const;
  bool has_flow(int64_t id) const { return flows_.count(id) != 0; }
  /// Projected completion (drain end + latency) under current rates.
  double projected_completion(int64_t id, double now) const;

  void reset_stats(double now);
  const std::vector<ResourceStats>& stats() const { return stats_; }
  double capacity(ResourceId r) const { return capacity_[r]; }
  int resource_count() const { return static_cast<int>(capacity_.size()); }
  double allocated(ResourceId r) const { return sum_rate_[r]; }

 private:
  void touch() { dirty_ = true; }
  void solve();

  std::vector<double> capacity_;
  std::map<int64_t, Flow> flows_;  // ordered: deterministic iteration
  int64_t next_id_ = 0;
  bool dirty_ = false;
  double last_time_ = 0.0;

  // Aggregates per directed resource, valid since the last solve().
  std::vector<double> sum_rate_;
  std::vector<int> sharer_count_;
  std::vector<int> collective_count_;
  std::vector<ResourceStats> stats_;
};

}  // namespace fabricsim
