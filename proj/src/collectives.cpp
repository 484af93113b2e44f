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

#include "fabricsim/collectives.hpp"

#include <algorithm>
#include <stdexcept>

namespace fabricsim {

ChunkSchedule plan_ring(const std::vector<int>& ring_order,
                        double message_bytes) {
  ChunkSchedule s;
  s.algorithm = CollectiveAlgorithm::Ring;
  s.participants = ring_order;
  s.message_bytes = message_bytes;
  const int p = static_cast<int>(ring_order.size());
  if (p <= 1) return s;
  s.step_count = 2 * (p - 1);
  const double chunk = message_bytes / p;
  s.ops.reserve(static_cast<size_t>(s.step_count) * p);
  for (int step = 0; step < s.step_count; ++step)
    for (int i = 0; i < p; ++i)
      s.ops.push_back(SendOp{step, ring_order[i], ring_order[(i + 1) % p],
                             chunk});
  return s;
}

ChunkSchedule plan_hierarchical(const Topology& topo, double message_bytes) {
  ChunkSchedule s;
  s.algorithm = CollectiveAlgorithm::HierarchicalRing;
  s.message_bytes = message_bytes;
  for (int r = 0; r < topo.rank_count(); ++r) s.participants.push_back(r);

  const int g = topo.gpus_per_node();
  const int n = topo.node_count();
  // Chain-reduce onto each node's leader (first rank), in parallel.
  for (int k = 0; k < g - 1; ++k)
    for (const NodeSpec& node : topo.nodes())
      s.ops.push_back(SendOp{k, node.first_rank + g - 1 - k,
                             node.first_rank + g - 2 - k, message_bytes});
  // Leader ring across nodes.
  const int ring_base = g - 1;
  if (n > 1) {
    const double chunk = message_bytes / n;
    for (int step = 0; step < 2 * (n - 1); ++step)
      for (int i = 0; i < n; ++i)
        s.ops.push_back(SendOp{ring_base + step,
                               topo.nodes()[i].first_rank,
                               topo.nodes()[(i + 1) % n].first_rank, chunk});
  }
  // Chain-broadcast back down.
  const int bcast_base = ring_base + (n > 1 ? 2 * (n - 1) : 0);
  for (int k = 0; k < g - 1; ++k)
    for (const NodeSpec& node : topo.nodes())
      s.ops.push_back(SendOp{bcast_base + k, node.first_rank + k,
                             node.first_rank + k + 1, message_bytes});
  s.step_count = bcast_base + (g - 1);
  return s;
}

double analytic_ring_cost(int participants, double message_bytes,
                          double bandwidth, double step_latency) {
  if (participants <= 1) return 0.0;
  const double steps = 2.0 * (participants - 1);
  return steps * step_latency +
         (steps / participants) * (message_bytes / bandwidth);
}

double analytic_hierarchical_cost(int nodes, int gpus_per_node,
                                  double message_bytes, double net_bandwidth,
                                  double net_step_latency,
                                  double intra_bandwidth) {
  return 2.0 * (gpus_per_node - 1) * (message_bytes / intra_bandwidth) +
         analytic_ring_cost(nodes, message_bytes, net_bandwidth,
                            net_step_latency);
}

CollectiveRun::CollectiveRun(const ChunkSchedule& schedule,
                             const Topology& topo, NetState& net,
                             EventQueue& queue, CouplingFlags flags)
    : schedule_(schedule),
      topo_(topo),
      net_(net),
      queue_(queue),
      flags_(flags) {
  const int p = participant_count();
  rank_pos_.assign(topo.rank_count(), -1);
  for (int i = 0; i < p; ++i) rank_pos_[schedule_.participants[i]] = i;

  const int n_ops = static_cast<int>(schedule_.ops.size());
  op_state_.resize(n_ops);
  dependents_.resize(n_ops);
  entry_gated_.resize(p);
  sends_of_.resize(p);
  receives_of_.resize(p);
  next_send_.assign(p, 0);
  ops_left_.assign(p, 0);
  active_sends_.assign(p, 0);
  reservation_.assign(p, -1);
  entered_.assign(p, 0);
  entry_.assign(p, 0.0);
  exit_.assign(p, 0.0);
  first_send_.assign(p, -1.0);
  send_busy_.assign(p, 0.0);

  // involved[step][pos]: ops touching a rank at a step; send_at[step][pos]:
  // the (at most one) op a rank sends at a step.
  std::vector<std::vector<std::vector<int>>> involved(
      schedule_.step_count, std::vector<std::vector<int>>(p));
  std::vector<std::vector<int>> send_at(schedule_.step_count,
                                        std::vector<int>(p, -1));
  for (int i = 0; i < n_ops; ++i) {
    const SendOp& op = schedule_.ops[i];
    const int sp = pos_of(op.sender), rp = pos_of(op.receiver);
    involved[op.step][sp].push_back(i);
    involved[op.step][rp].push_back(i);
    if (send_at[op.step][sp] != -1)
      throw std::logic_error("rank sends twice in one step");
    send_at[op.step][sp] = i;
    ops_left_[sp] += 1;
    ops_left_[rp] += 1;
    sends_of_[sp].push_back(i);
    receives_of_[rp].push_back(i);
    entry_gated_[sp].push_back(i);
    if (!flags_.eager_entry) entry_gated_[rp].push_back(i);

    OpState& st = op_state_[i];
    if (topo.node_of(op.sender) == topo.node_of(op.receiver)) {
      const NodeSpec& node = topo.nodes()[topo.node_of(op.sender)];
      double penalty =
          (topo.locality(op.sender) == Locality::Far ||
           topo.locality(op.receiver) == Locality::Far)
              ? node.far_path_penalty
              : 1.0;
      st.route = Route{op.sender, op.receiver, {}, 0.0};
      st.fixed_rate = node.intra_node_bandwidth / penalty;
    } else {
      st.route = topo.route(op.sender, op.receiver);
    }
  }
  deps_.assign(n_ops, {});
  for (int i = 0; i < n_ops; ++i) {
    const SendOp& op = schedule_.ops[i];
    const int sp = pos_of(op.sender);
    if (op.step > 0) {
      deps_[i] = involved[op.step - 1][sp];
      for (int d : deps_[i]) dependents_[d].push_back(i);
    }
    // Gates: unarrived prior-step ops involving the sender, sender entry,
    // and receiver entry (the latter only under rendezvous semantics).
    op_state_[i].unmet = static_cast<int>(deps_[i].size()) + 1 +
                         (flags_.eager_entry ? 0 : 1);
  }
}

bool CollectiveRun::entered(int rank) const {
  return entered_[pos_of(rank)] != 0;
}

void CollectiveRun::rank_enter(int rank, double now) {
  const int pos = pos_of(rank);
  if (pos < 0 || entered_[pos]) throw std::logic_error("bad rank_enter");
  entered_[pos] = 1;
  entry_[pos] = now;
  if (ops_left_[pos] == 0) {  // single-participant collective
    exit_[pos] = now;
    ++exited_;
  }
  for (int op : entry_gated_[pos]) satisfy(op, now);
  if (flags_.eager_entry) {
    for (int op : receives_of_[pos]) {
      OpState& st = op_state_[op];
      if (st.awaiting_receiver) {
        st.awaiting_receiver = false;
        net_.set_arrival(st.flow,
                         std::max(now, st.drain_end + st.route.latency),
                         queue_);
      }
    }
  }
  recheck_reservation(pos, now);
}

void CollectiveRun::satisfy(int op, double now) {
  OpState& st = op_state_[op];
  if (--st.unmet == 0) try_start(op, now);
}

void CollectiveRun::try_start(int op, double now) {
  OpState& st = op_state_[op];
  if (st.started || st.unmet > 0) return;
  st.started = true;
  st.start = now;
  const SendOp& o = schedule_.ops[op];
  const int sp = pos_of(o.sender);
  if (first_send_[sp] < 0.0) first_send_[sp] = now;
  st.flow = net_.add_transfer(st.route, o.bytes, st.fixed_rate);
  flow_to_op_.emplace(st.flow, op);
  ++active_sends_[sp];
  if (next_send_[sp] < static_cast<int>(sends_of_[sp].size()) &&
      sends_of_[sp][next_send_[sp]] == op)
    ++next_send_[sp];
  recheck_reservation(sp, now);
}

void CollectiveRun::on_flow_drained(int64_t flow, double now) {
  const int op = flow_to_op_.at(flow);
  OpState& st = op_state_[op];
  st.drain_end = now;
  const SendOp& o = schedule_.ops[op];
  const int sp = pos_of(o.sender);
  send_busy_[sp] += now - st.start;
  --active_sends_[sp];
  const int rp = pos_of(o.receiver);
  if (!flags_.eager_entry || entered_[rp]) {
    net_.set_arrival(flow, now + st.route.latency, queue_);
  } else {
    st.awaiting_receiver = true;  // arrival held until the receiver enters
  }
  recheck_reservation(sp, now);
}

void CollectiveRun::on_flow_arrived(int64_t flow, double now) {
  const int op = flow_to_op_.at(flow);
  OpState& st = op_state_[op];
  st.arrived = true;
  net_.finish_flow(flow);
  flow_to_op_.erase(flow);
  const SendOp& o = schedule_.ops[op];
  for (int pos : {pos_of(o.sender), pos_of(o.receiver)}) {
    if (--ops_left_[pos] == 0) {
      exit_[pos] = now;
      ++exited_;
    }
  }
  for (int dep : dependents_[op]) satisfy(dep, now);
  recheck_reservation(pos_of(o.sender), now);
  recheck_reservation(pos_of(o.receiver), now);
}

void CollectiveRun::recheck_reservation(int pos, double now) {
  (void)now;
  if (!flags_.stall_reservations) return;
  bool want = false;
  if (entered_[pos] && active_sends_[pos] == 0 &&
      next_send_[pos] < static_cast<int>(sends_of_[pos].size())) {
    const int op = sends_of_[pos][next_send_[pos]];
    const OpState& st = op_state_[op];
    if (!st.started && !st.route.hops.empty()) {
      // Idle and stalled on someone else: an unarrived inbound
      // dependency, or a receiver that has not entered yet.
      const SendOp& o = schedule_.ops[op];
      if (!flags_.eager_entry && !entered_[pos_of(o.receiver)]) want = true;
      if (!want)
        for (int d : deps_[op])
          if (!op_state_[d].arrived &&
              schedule_.ops[d].receiver == o.sender) {
            want = true;
            break;
          }
    }
  }
  if (want && reservation_[pos] == -1) {
    const int op = sends_of_[pos][next_send_[pos]];
    reservation_[pos] = net_.add_reservation(op_state_[op].route);
  } else if (!want && reservation_[pos] != -1) {
    net_.remove_flow(reservation_[pos]);
    reservation_[pos] = -1;
  }
}

CollectiveOutcome CollectiveRun::take_outcome() const {
  if (!complete()) throw std::logic_error("collective still in progress");
  CollectiveOutcome out;
  out.participants = schedule_.participants;
  out.entry = entry_;
  out.exit = exit_;
  out.first_send = first_send_;
  out.send_busy = send_busy_;
  for (int i = 0; i < participant_count(); ++i) {
    if (out.first_send[i] < 0.0) out.first_send[i] = out.exit[i];
    out.finish = std::max(out.finish, out.exit[i]);
  }
  return out;
}

CollectiveOutcome execute_collective(const Topology& topo,
                                     const ChunkSchedule& schedule,
                                     const std::vector<double>& entry_times,
                                     CouplingFlags flags) {
  if (entry_times.size() != schedule.participants.size())
    throw std::logic_error("entry_times size mismatch");
  NetState net(topo);
  EventQueue queue;
  CollectiveRun run(schedule, topo, net, queue, flags);
  for (size_t i = 0; i < entry_times.size(); ++i)
    queue.push(entry_times[i], EventKind::ComputeDone,
               static_cast<int64_t>(i));

  while (!queue.empty()) {
    const double now = queue.top().time;
    net.advance_to(now);
    while (!queue.empty() && queue.top().time == now) {
      Event e = queue.pop();
      if (e.kind == EventKind::ComputeDone) {
        run.rank_enter(schedule.participants[e.id], now);
      } else if (e.kind == EventKind::TransferDone) {
        switch (net.on_transfer_event(e, now)) {
          case NetState::DrainEvent::Stale:
            break;
          case NetState::DrainEvent::Drained:
            run.on_flow_drained(e.id, now);
            break;
          case NetState::DrainEvent::Arrived:
            run.on_flow_arrived(e.id, now);
            break;
        }
      } else {
        throw std::logic_error("unexpected event kind");
      }
    }
    if (net.recompute_if_dirty()) net.reschedule_drains(queue, now);
  }
  if (!run.complete()) throw std::logic_error("collective deadlocked");
  return run.take_outcome();
}

}  // namespace fabricsim
