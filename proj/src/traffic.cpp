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

#include "fabricsim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fabricsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative slack for detecting a saturated resource or reached cap; the
// progressive fill is exact for equal splits, this only absorbs last-ulp
// residue from the delta arithmetic.
constexpr double kRelTol = 1e-12;
}  // namespace

std::vector<double> max_min_allocate(const std::vector<AllocFlow>& flows,
                                     const std::vector<double>& capacity) {
  const int nf = static_cast<int>(flows.size());
  const int nr = static_cast<int>(capacity.size());
  std::vector<double> rate(nf, 0.0);
  std::vector<double> headroom = capacity;
  std::vector<int> count(nr, 0);
  std::vector<std::vector<int>> on_resource(nr);
  std::vector<char> frozen(nf, 0);

  for (int f = 0; f < nf; ++f) {
    if (flows[f].resources.empty())
      throw std::logic_error("max_min_allocate: flow without resources");
    for (ResourceId r : flows[f].resources) {
      if (r < 0 || r >= nr)
        throw std::logic_error("max_min_allocate: resource out of range");
      ++count[r];
      on_resource[r].push_back(f);
    }
  }

  double level = 0.0;
  int unfrozen = nf;
  auto freeze = [&](int f, double at) {
    frozen[f] = 1;
    rate[f] = at;
    --unfrozen;
    for (ResourceId r : flows[f].resources) --count[r];
  };

  while (unfrozen > 0) {
    // Smallest uniform increment until a resource saturates or a cap binds.
    double delta = kInf;
    for (int r = 0; r < nr; ++r)
      if (count[r] > 0) delta = std::min(delta, headroom[r] / count[r]);
    for (int f = 0; f < nf; ++f)
      if (!frozen[f] && flows[f].cap > 0.0)
        delta = std::min(delta, flows[f].cap - level);
    if (delta == kInf)
      throw std::logic_error("max_min_allocate: unconstrained flow");
    delta = std::max(delta, 0.0);

    level += delta;
    for (int r = 0; r < nr; ++r)
      if (count[r] > 0) headroom[r] -= delta * count[r];

    for (int r = 0; r < nr; ++r) {
      if (count[r] > 0 && headroom[r] <= kRelTol * capacity[r]) {
        for (int f : on_resource[r])
          if (!frozen[f])
            freeze(f, flows[f].cap > 0.0 ? std::min(level, flows[f].cap)
                                         : level);
      }
    }
    for (int f = 0; f < nf; ++f)
      if (!frozen[f] && flows[f].cap > 0.0 &&
          level >= flows[f].cap * (1.0 - kRelTol))
        freeze(f, flows[f].cap);  // exact cap, not the accumulated level
  }
  return rate;
}

NetState::NetState(const Topology& topo) {
  capacity_.resize(topo.links().size() * 2);
  for (const Link& l : topo.links()) {
    capacity_[l.id * 2] = l.bandwidth;
    capacity_[l.id * 2 + 1] = l.bandwidth;
  }
  sum_rate_.assign(capacity_.size(), 0.0);
  sharer_count_.assign(capacity_.size(), 0);
  collective_count_.assign(capacity_.size(), 0);
  stats_.assign(capacity_.size(), ResourceStats{});
}

NetState::NetState(std::vector<double> capacities)
    : capacity_(std::move(capacities)) {
  sum_rate_.assign(capacity_.size(), 0.0);
  sharer_count_.assign(capacity_.size(), 0);
  collective_count_.assign(capacity_.size(), 0);
  stats_.assign(capacity_.size(), ResourceStats{});
}

int64_t NetState::add_raw_transfer(std::vector<ResourceId> resources,
                                   double bytes, double latency,
                                   double fixed_rate) {
  if (resources.empty() && fixed_rate <= 0.0)
    throw std::logic_error("transfer without resources needs a fixed rate");
  Flow f;
  f.id = next_id_++;
  f.resources = std::move(resources);
  f.bytes = bytes;
  f.remaining = bytes;
  f.latency = latency;
  f.fixed_rate = fixed_rate;
  f.rate = fixed_rate > 0.0 ? fixed_rate : 0.0;
  int64_t id = f.id;
  flows_.emplace(id, std::move(f));
  // Fixed-rate flows never change the allocation, but drain scheduling
  // piggybacks on the recompute signal, so every new draining flow must
  // raise it.
  touch();
  return id;
}

int64_t NetState::add_transfer(const Route& route, double bytes,
                               double fixed_rate) {
  std::vector<ResourceId> rs;
  rs.reserve(route.hops.size());
  for (const Hop& h : route.hops) rs.push_back(resource_of(h));
  return add_raw_transfer(std::move(rs), bytes, route.latency, fixed_rate);
}

int64_t NetState::add_reservation(const Route& route) {
  Flow f;
  f.id = next_id_++;
  for (const Hop& h : route.hops) f.resources.push_back(resource_of(h));
  f.reservation = true;
  int64_t id = f.id;
  flows_.emplace(id, std::move(f));
  touch();
  return id;
}

int64_t NetState::add_background(std::vector<ResourceId> resources,
                                 double cap) {
  Flow f;
  f.id = next_id_++;
  f.resources = std::move(resources);
  f.cap = cap;
  f.background = true;
  int64_t id = f.id;
  flows_.emplace(id, std::move(f));
  touch();
  return id;
}

void NetState::set_background_on(int64_t id, bool on) {
  Flow& f = flows_.at(id);
  if (f.on != on) {
    f.on = on;
    touch();
  }
}

void NetState::remove_flow(int64_t id) {
  auto it = flows_.find(id);
  if (it == flows_.end()) throw std::logic_error("remove_flow: unknown flow");
  flows_.erase(it);
  touch();
}

void NetState::advance_to(double now) {
  double dt = now - last_time_;
  if (dt < 0.0) throw std::logic_error("NetState time moved backwards");
  if (dt > 0.0) {
    for (auto& [id, f] : flows_) {
      if (f.phase == FlowPhase::Draining && !f.background && !f.reservation &&
          f.rate > 0.0)
        f.remaining -= f.rate * dt;
    }
    for (size_t r = 0; r < capacity_.size(); ++r) {
      if (sharer_count_[r] >= 2 && sum_rate_[r] >= 0.9 * capacity_[r])
        stats_[r].shared_saturated_time += dt;
      if (collective_count_[r] >= 1) stats_[r].collective_busy_time += dt;
    }
    last_time_ = now;
  } else {
    last_time_ = now;
  }
}

bool NetState::recompute_if_dirty() {
  if (!dirty_) return false;
  solve();
  dirty_ = false;
  return true;
}

void NetState::solve() {
  std::vector<AllocFlow> in;
  std::vector<int64_t> ids;
  for (auto& [id, f] : flows_) {
    bool participates = f.phase == FlowPhase::Draining &&
                        f.fixed_rate <= 0.0 && (!f.background || f.on);
    if (participates) {
      in.push_back(AllocFlow{f.resources, f.cap});
      ids.push_back(id);
    } else if (f.fixed_rate <= 0.0) {
      f.rate = 0.0;
    }
  }
  std::vector<double> rates = max_min_allocate(in, capacity_);

  std::fill(sum_rate_.begin(), sum_rate_.end(), 0.0);
  std::fill(sharer_count_.begin(), sharer_count_.end(), 0);
  std::fill(collective_count_.begin(), collective_count_.end(), 0);
  for (size_t i = 0; i < ids.size(); ++i) {
    Flow& f = flows_.at(ids[i]);
    f.rate = rates[i];
    bool collective = !f.background && !f.reservation;
    for (ResourceId r : f.resources) {
      sum_rate_[r] += f.rate;
      sharer_count_[r] += 1;
      if (collective) collective_count_[r] += 1;
    }
  }
  for (size_t r = 0; r < capacity_.size(); ++r) {
    if (sum_rate_[r] > capacity_[r] * (1.0 + 1e-9) + 1e-12)
      throw std::logic_error("max-min allocation exceeded link capacity");
  }
}

void NetState::reschedule_drains(EventQueue& queue, double now) {
  for (auto& [id, f] : flows_) {
    if (f.phase != FlowPhase::Draining || f.background || f.reservation)
      continue;
    double proj = f.rate > 0.0 ? now + f.remaining / f.rate : kInf;
    if (proj != f.scheduled_drain) {
      f.scheduled_drain = proj;
      if (proj < kInf) queue.push(proj, EventKind::TransferDone, id);
    }
  }
}

NetState::DrainEvent NetState::on_transfer_event(const Event& event,
                                                 double now) {
  auto it = flows_.find(event.id);
  if (it == flows_.end()) return DrainEvent::Stale;
  Flow& f = it->second;
  if (f.phase == FlowPhase::Draining) {
    if (event.time != f.scheduled_drain) return DrainEvent::Stale;
    f.remaining = 0.0;  // the live event fires exactly at the projection
    f.phase = FlowPhase::InFlight;
    f.drain_end = now;
    f.rate = 0.0;
    touch();
    return DrainEvent::Drained;
  }
  if (f.phase == FlowPhase::InFlight && event.time == f.arrival_time)
    return DrainEvent::Arrived;
  return DrainEvent::Stale;
}

void NetState::set_arrival(int64_t id, double time, EventQueue& queue) {
  Flow& f = flows_.at(id);
  f.arrival_time = time;
  queue.push(time, EventKind::TransferDone, id);
}

void NetState::finish_flow(int64_t id) {
  auto it = flows_.find(id);
  if (it == flows_.end()) throw std::logic_error("finish_flow: unknown flow");
  flows_.erase(it);
}

const Flow& NetState::flow(int64_t id) const {
  auto it = flows_.find(id);
  if (it == flows_.end()) throw std::logic_error("flow: unknown id");
  return it->second;
}

double NetState::projected_completion(int64_t id, double now) const {
  const Flow& f = flow(id);
  if (f.phase == FlowPhase::InFlight) return f.arrival_time;
  if (f.phase != FlowPhase::Draining || f.rate <= 0.0) return kInf;
  return now + f.remaining / f.rate + f.latency;
}

void NetState::reset_stats(double) {
  std::fill(stats_.begin(), stats_.end(), ResourceStats{});
}

}  // namespace fabricsim
