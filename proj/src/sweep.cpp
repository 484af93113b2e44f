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

#include "fabricsim/sweep.hpp"

#include <cstdio>
#include <stdexcept>

#include "fabricsim/engine.hpp"
#include "fabricsim/rng.hpp"

namespace fabricsim {

namespace {

// Seed-stream tag for per-cell seeds; part of the reproducibility contract.
constexpr uint64_t kSweepStream = 3;

RunMetrics run_cell(const ScenarioConfig& base, int nodes, bool coordination,
                    int repeat) {
  ScenarioConfig s = base;
  s.topology.nodes = nodes;
  s.coordination.enabled = coordination;
  // Paired seeding: both variants of a cell see identical compute draws
  // and background phases.
  s.seed = derive_seed({base.seed, kSweepStream,
                        static_cast<uint64_t>(nodes),
                        static_cast<uint64_t>(repeat)});
  return compute_metrics(run_simulation(s));
}

SweepRow aggregate(const std::vector<SweepRow>& cell) {
  SweepRow m = cell.front();
  m.repeat = -1;
  m.metrics = RunMetrics{};
  m.efficiency = 0.0;
  m.metrics.measured_iterations = cell.front().metrics.measured_iterations;
  for (const SweepRow& r : cell) {
    m.metrics.mean_iter_s += r.metrics.mean_iter_s;
    m.metrics.throughput_sps += r.metrics.throughput_sps;
    m.metrics.cv += r.metrics.cv;
    m.metrics.p95_s += r.metrics.p95_s;
    m.metrics.p99_s += r.metrics.p99_s;
    m.efficiency += r.efficiency;
  }
  const double n = static_cast<double>(cell.size());
  m.metrics.mean_iter_s /= n;
  m.metrics.throughput_sps /= n;
  m.metrics.cv /= n;
  m.metrics.p95_s /= n;
  m.metrics.p99_s /= n;
  m.efficiency /= n;
  return m;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec,
                      const std::function<void(const SweepRow&)>& on_row) {
  if (spec.node_counts.empty())
    throw std::invalid_argument("sweep needs at least one node count");
  if (spec.repeats < 1)
    throw std::invalid_argument("sweep needs at least one repeat");

  SweepResult out;
  // Single-node reference for scaling efficiency.
  {
    double total = 0.0;
    for (int rep = 0; rep < spec.repeats; ++rep)
      total += run_cell(spec.base, 1, false, rep).throughput_sps;
    out.reference_throughput = total / spec.repeats;
  }

  std::vector<SweepRow> means;
  for (int nodes : spec.node_counts) {
    for (int variant = 0; variant < 2; ++variant) {
      const bool coordination = variant == 1;
      if (coordination ? !spec.run_coordination : !spec.run_baseline)
        continue;
      std::vector<SweepRow> cell;
      for (int rep = 0; rep < spec.repeats; ++rep) {
        SweepRow row;
        row.nodes = nodes;
        row.variant = coordination ? "coordination" : "baseline";
        row.repeat = rep;
        row.metrics = run_cell(spec.base, nodes, coordination, rep);
        row.efficiency = row.metrics.throughput_sps /
                         (nodes * out.reference_throughput);
        if (on_row) on_row(row);
        cell.push_back(std::move(row));
        out.rows.push_back(cell.back());
      }
      means.push_back(aggregate(cell));
      if (on_row) on_row(means.back());
    }
  }
  for (SweepRow& m : means) out.rows.push_back(std::move(m));
  return out;
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << "nodes,variant,repeat,mean_iter_s,throughput_sps,cv,p95_s,p99_s,"
         "efficiency\n";
  char buf[256];
  for (const SweepRow& r : result.rows) {
    std::string repeat =
        r.repeat < 0 ? std::string("mean") : std::to_string(r.repeat);
    std::snprintf(buf, sizeof(buf), "%d,%s,%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  r.nodes, r.variant.c_str(), repeat.c_str(),
                  r.metrics.mean_iter_s, r.metrics.throughput_sps,
                  r.metrics.cv, r.metrics.p95_s, r.metrics.p99_s,
                  r.efficiency);
    out << buf;
  }
}

nlohmann::ordered_json sweep_to_json(const SweepResult& result) {
  nlohmann::ordered_json j;
  j["reference_throughput_sps"] = result.reference_throughput;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const SweepRow& r : result.rows) {
    nlohmann::ordered_json row;
    row["nodes"] = r.nodes;
    row["variant"] = r.variant;
    if (r.repeat < 0)
      row["repeat"] = "mean";
    else
      row["repeat"] = r.repeat;
    row["mean_iter_s"] = r.metrics.mean_iter_s;
    row["throughput_sps"] = r.metrics.throughput_sps;
    row["cv"] = r.metrics.cv;
    row["p95_s"] = r.metrics.p95_s;
    row["p99_s"] = r.metrics.p99_s;
    row["efficiency"] = r.efficiency;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

}  // namespace fabricsim
