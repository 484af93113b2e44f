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

#include "fabricsim/engine.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

#include "fabricsim/collectives.hpp"
#include "fabricsim/coordination.hpp"
#include "fabricsim/rng.hpp"
#include "fabricsim/workload.hpp"

namespace fabricsim {

namespace {

ChunkSchedule make_schedule(const ScenarioConfig& s, const Topology& topo) {
  if (s.collective.algorithm == CollectiveAlgorithm::HierarchicalRing)
    return plan_hierarchical(topo, s.collective.message_bytes);
  std::vector<int> order(topo.rank_count());
  for (int r = 0; r < topo.rank_count(); ++r) order[r] = r;
  return plan_ring(order, s.collective.message_bytes);
}

class Engine {
 public:
  explicit Engine(const ScenarioConfig& s)
      : s_(s),
        topo_(build_topology(s.topology)),
        schedule_(make_schedule(s, topo_)),
        net_(topo_) {
    idle_cost_ =
        execute_collective(topo_, schedule_,
                           std::vector<double>(topo_.rank_count(), 0.0),
                           s_.collective.couplings)
            .finish;
    if (s_.coordination.enabled)
      pacing_.emplace(s_.coordination, topo_.rank_count());
    setup_background();
  }

  RunResult run() {
    RunResult out;
    out.scenario = s_;
    out.ranks = topo_.rank_count();
    out.idle_collective_cost = idle_cost_;
    double t = 0.0;
    for (int64_t i = 0; i < s_.iterations; ++i) {
      out.iterations.push_back(run_iteration(i, t));
      const IterationRecord& rec = out.iterations.back();
      t = rec.start + rec.iteration_time;
      if (i + 1 == s_.warmup_iterations) net_.reset_stats(t);
    }
    collect_link_stats(out);
    return out;
  }

 private:
  IterationRecord run_iteration(int64_t index, double start) {
    const int ranks = topo_.rank_count();
    IterationRecord rec;
    rec.index = index;
    rec.warmup = index < s_.warmup_iterations;
    rec.start = start;
    rec.compute_end.assign(ranks, 0.0);
    rec.pacing_delay.assign(ranks, 0.0);
    rec.pacing_bound.assign(ranks, 0.0);
    rec.pacing_engaged.assign(ranks, 0);
    rec.entry.assign(ranks, 0.0);
    rec.first_send.assign(ranks, 0.0);
    rec.exit.assign(ranks, 0.0);
    rec.comm_busy.assign(ranks, 0.0);

    CollectiveRun run(schedule_, topo_, net_, queue_, s_.collective.couplings);
    for (int r = 0; r < ranks; ++r) {
      double dur = sample_compute_time(s_.workload, s_.seed, r, index,
                                       topo_.locality(r));
      rec.compute_end[r] = start + dur;
      queue_.push(rec.compute_end[r], EventKind::ComputeDone, r);
    }

    while (!run.complete()) {
      if (queue_.empty())
        throw std::logic_error("simulation deadlocked: no runnable events");
      const double now = queue_.top().time;
      net_.advance_to(now);
      while (!queue_.empty() && queue_.top().time == now)
        dispatch(queue_.pop(), now, run, rec);
      if (net_.recompute_if_dirty()) net_.reschedule_drains(queue_, now);
    }

    CollectiveOutcome oc = run.take_outcome();
    rec.iteration_time = oc.finish - start;
    rec.entry_spread = entry_spread(oc.entry);
    for (int r = 0; r < ranks; ++r) {
      rec.first_send[r] = oc.first_send[r];
      rec.exit[r] = oc.exit[r];
      rec.comm_busy[r] = oc.send_busy[r];
    }
    if (pacing_) {
      for (int r = 0; r < ranks; ++r) {
        double dur = rec.compute_end[r] - start;
        double skew = s_.coordination.omniscient
                          ? rec.entry_spread
                          : local_skew_estimate(rec.entry[r], rec.exit[r],
                                                idle_cost_);
        pacing_->observe(r, rec.iteration_time, dur, skew);
      }
    }
    return rec;
  }

  void dispatch(const Event& e, double now, CollectiveRun& run,
                IterationRecord& rec) {
    switch (e.kind) {
      case EventKind::ComputeDone: {
        const int r = static_cast<int>(e.id);
        double delay = 0.0;
        if (pacing_) {
          double dur = now - rec.start;
          delay = pacing_->decide_delay(r, dur);
          rec.pacing_bound[r] = pacing_->bound(r);
          rec.pacing_engaged[r] = pacing_->engaged(r) ? 1 : 0;
        }
        rec.pacing_delay[r] = delay;
        if (delay > 0.0) {
          // Zero delays enter directly so an all-zero pacing run produces
          // the exact event stream of a run without pacing.
          queue_.push(now + delay, EventKind::PacingRelease, r);
        } else {
          rec.entry[r] = now;
          run.rank_enter(r, now);
        }
        break;
      }
      case EventKind::PacingRelease: {
        const int r = static_cast<int>(e.id);
        rec.entry[r] = now;
        run.rank_enter(r, now);
        break;
      }
      case EventKind::TransferDone:
        switch (net_.on_transfer_event(e, now)) {
          case NetState::DrainEvent::Stale:
            break;
          case NetState::DrainEvent::Drained:
            run.on_flow_drained(e.id, now);
            break;
          case NetState::DrainEvent::Arrived:
            run.on_flow_arrived(e.id, now);
            break;
        }
        break;
      case EventKind::BackgroundEdge: {
        BgFlowState& b = bg_[static_cast<size_t>(e.id)];
        net_.set_background_on(b.flow, bg_on(b, now));
        queue_.push(bg_next_edge(b, now), EventKind::BackgroundEdge, e.id);
        break;
      }
    }
  }

  struct BgFlowState {
    int64_t flow = -1;
    double period = 0.0;
    double on_len = 0.0;
    double phase = 0.0;  // start of an on-window
  };

  // On during [phase + k*period, phase + k*period + on_len).
  bool bg_on(const BgFlowState& b, double t) const {
    if (b.on_len >= b.period) return true;
    double rel = t - b.phase - std::floor((t - b.phase) / b.period) * b.period;
    return rel < b.on_len;
  }

  double bg_next_edge(const BgFlowState& b, double t) const {
    double base = b.phase + std::floor((t - b.phase) / b.period) * b.period;
    for (double edge :
         {base, base + b.on_len, base + b.period, base + b.period + b.on_len})
      if (edge > t) return edge;
    throw std::logic_error("background edge did not advance");
  }

  void setup_background() {
    for (size_t entry = 0; entry < s_.background.size(); ++entry) {
      const BackgroundTraffic& bt = s_.background[entry];
      if (bt.load <= 0.0 || bt.on_ms <= 0.0) continue;
      int ordinal = 0;
      for (const Link& link : topo_.links()) {
        if (link.tier != bt.tier) continue;
        for (int dir = 0; dir < 2; ++dir, ++ordinal) {
          BgFlowState b;
          b.flow = net_.add_background({ResourceId(link.id * 2 + dir)},
                                       bt.load * link.bandwidth);
          b.on_len = bt.on_ms * 1e-3;
          b.period = (bt.on_ms + bt.off_ms) * 1e-3;
          if (bt.off_ms <= 0.0) {
            net_.set_background_on(b.flow, true);
            continue;  // always on, no duty-cycle edges
          }
          CounterRng rng(derive_seed(
              {s_.seed, static_cast<uint64_t>(SeedStream::BackgroundPhase),
               bt.seed_offset, static_cast<uint64_t>(entry),
               static_cast<uint64_t>(ordinal)}));
          b.phase = rng.uniform() * b.period;
          net_.set_background_on(b.flow, bg_on(b, 0.0));
          bg_.push_back(b);
          queue_.push(bg_next_edge(b, 0.0), EventKind::BackgroundEdge,
                      static_cast<int64_t>(bg_.size() - 1));
        }
      }
    }
  }

  void collect_link_stats(RunResult& out) const {
    const auto& stats = net_.stats();
    for (const Link& link : topo_.links()) {
      LinkRecord lr;
      lr.name = link.name;
      lr.tier = link.tier;
      lr.capacity = link.bandwidth;
      // Keep the direction with the larger saturation ratio, so the max
      // over links equals the max over directed resources.
      const ResourceStats& up = stats[link.id * 2];
      const ResourceStats& down = stats[link.id * 2 + 1];
      auto ratio = [](const ResourceStats& s) {
        return s.collective_busy_time > 0.0
                   ? s.shared_saturated_time / s.collective_busy_time
                   : 0.0;
      };
      const ResourceStats& pick = ratio(down) > ratio(up) ? down : up;
      lr.shared_saturated_time = pick.shared_saturated_time;
      lr.collective_busy_time = pick.collective_busy_time;
      out.links.push_back(std::move(lr));
    }
  }

  ScenarioConfig s_;
  Topology topo_;
  ChunkSchedule schedule_;
  NetState net_;
  EventQueue queue_;
  std::vector<BgFlowState> bg_;
  std::optional<PacingController> pacing_;
  double idle_cost_ = 0.0;
};

}  // namespace

RunResult run_simulation(const ScenarioConfig& scenario) {
  Engine engine(scenario);
  return engine.run();
}

nlohmann::ordered_json result_to_json(const RunResult& result) {
  nlohmann::ordered_json j;
  j["scenario"] = scenario_to_json(result.scenario);
  j["ranks"] = result.ranks;
  j["idle_collective_cost_s"] = result.idle_collective_cost;
  nlohmann::ordered_json iters = nlohmann::ordered_json::array();
  for (const IterationRecord& r : result.iterations) {
    nlohmann::ordered_json it;
    it["index"] = r.index;
    it["warmup"] = r.warmup;
    it["start_s"] = r.start;
    it["iteration_time_s"] = r.iteration_time;
    it["entry_spread_s"] = r.entry_spread;
    it["compute_end_s"] = r.compute_end;
    it["pacing_delay_s"] = r.pacing_delay;
    it["pacing_bound_s"] = r.pacing_bound;
    it["pacing_engaged"] = r.pacing_engaged;
    it["entry_s"] = r.entry;
    it["first_send_s"] = r.first_send;
    it["exit_s"] = r.exit;
    it["comm_busy_s"] = r.comm_busy;
    iters.push_back(std::move(it));
  }
  j["iterations"] = std::move(iters);
  nlohmann::ordered_json links = nlohmann::ordered_json::array();
  for (const LinkRecord& l : result.links) {
    nlohmann::ordered_json lj;
    lj["name"] = l.name;
    lj["tier"] = l.tier == LinkTier::Spine
                     ? "spine"
                     : (l.tier == LinkTier::Leaf ? "leaf" : "intra");
    lj["capacity_bytes_per_s"] = l.capacity;
    lj["shared_saturated_s"] = l.shared_saturated_time;
    lj["collective_busy_s"] = l.collective_busy_time;
    links.push_back(std::move(lj));
  }
  j["links"] = std::move(links);
  return j;
}

}  // namespace fabricsim
