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

#include "fabricsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fabricsim/workload.hpp"

namespace fabricsim {

namespace {

double nearest_rank(std::vector<double> values, double q) {
  if (values.empty()) throw std::logic_error("percentile of empty sample");
  std::sort(values.begin(), values.end());
  int idx = static_cast<int>(std::ceil(q * values.size())) - 1;
  idx = std::clamp(idx, 0, static_cast<int>(values.size()) - 1);
  return values[idx];
}

std::vector<const IterationRecord*> measured(const RunResult& r) {
  std::vector<const IterationRecord*> out;
  for (const IterationRecord& it : r.iterations)
    if (!it.warmup) out.push_back(&it);
  if (out.empty()) throw std::logic_error("run has no measured iterations");
  return out;
}

}  // namespace

RunMetrics compute_metrics(const RunResult& result) {
  auto iters = measured(result);
  std::vector<double> times;
  times.reserve(iters.size());
  for (const IterationRecord* it : iters) times.push_back(it->iteration_time);

  RunMetrics m;
  m.measured_iterations = static_cast<int>(times.size());
  double sum = 0.0;
  for (double t : times) sum += t;
  m.mean_iter_s = sum / times.size();
  double ss = 0.0;
  for (double t : times) ss += (t - m.mean_iter_s) * (t - m.mean_iter_s);
  m.cv = std::sqrt(ss / times.size()) / m.mean_iter_s;
  m.p95_s = nearest_rank(times, 0.95);
  m.p99_s = nearest_rank(times, 0.99);
  m.throughput_sps =
      global_batch(result.scenario.workload, result.ranks) / m.mean_iter_s;
  return m;
}

FailureScores failure_scores(const RunResult& result) {
  auto iters = measured(result);
  const int ranks = result.ranks;
  FailureScores s;

  // Synchronization amplification: excess of the slowest compute over
  // 1.5x the median, averaged as a fraction of iteration time.
  double amp = 0.0;
  for (const IterationRecord* it : iters) {
    std::vector<double> d(ranks);
    for (int r = 0; r < ranks; ++r) d[r] = it->compute_end[r] - it->start;
    double med = nearest_rank(d, 0.5);
    double worst = *std::max_element(d.begin(), d.end());
    amp += std::max(0.0, worst - 1.5 * med) / it->iteration_time;
  }
  s.synchronization_amplification = amp / iters.size();

  // Fabric contention: worst link's saturated-and-shared share of its
  // collective-active time.
  for (const LinkRecord& l : result.links)
    if (l.collective_busy_time > 0.0)
      s.fabric_contention =
          std::max(s.fabric_contention,
                   l.shared_saturated_time / l.collective_busy_time);

  // Locality imbalance: Far vs Near busy-time separation.
  Topology topo = build_topology(result.scenario.topology);
  std::vector<double> busy(ranks, 0.0);
  for (const IterationRecord* it : iters)
    for (int r = 0; r < ranks; ++r)
      busy[r] += (it->compute_end[r] - it->start) + it->comm_busy[r];
  std::vector<double> near, far;
  for (int r = 0; r < ranks; ++r)
    (topo.locality(r) == Locality::Far ? far : near).push_back(busy[r]);
  if (!near.empty() && !far.empty()) {
    auto mean = [](const std::vector<double>& v) {
      double t = 0.0;
      for (double x : v) t += x;
      return t / v.size();
    };
    double mn = mean(near), mf = mean(far);
    double ss = 0.0;
    for (double x : near) ss += (x - mn) * (x - mn);
    for (double x : far) ss += (x - mf) * (x - mf);
    double pooled = std::sqrt(ss / (near.size() + far.size()));
    double separation = std::fabs(mf - mn) / (pooled + 1e-12);
    s.locality_imbalance = std::min(1.0, separation / 4.0);
  }

  // Runtime variance: CV of compute durations normalized by each rank's
  // own median, outliers (beyond 3x the pooled median) excluded so that
  // straggler spikes do not register as broadband jitter.
  std::vector<std::vector<double>> per_rank(ranks);
  for (const IterationRecord* it : iters)
    for (int r = 0; r < ranks; ++r)
      per_rank[r].push_back(it->compute_end[r] - it->start);
  std::vector<double> normalized;
  for (int r = 0; r < ranks; ++r) {
    double med = nearest_rank(per_rank[r], 0.5);
    for (double d : per_rank[r]) normalized.push_back(d / med);
  }
  double cutoff = 3.0 * nearest_rank(normalized, 0.5);
  std::vector<double> keep;
  for (double x : normalized)
    if (x <= cutoff) keep.push_back(x);
  if (keep.size() >= 2) {
    double mu = 0.0;
    for (double x : keep) mu += x;
    mu /= keep.size();
    double ss = 0.0;
    for (double x : keep) ss += (x - mu) * (x - mu);
    double cv = std::sqrt(ss / keep.size()) / mu;
    s.runtime_variance = std::min(1.0, cv / 0.1);
  }
  return s;
}

FailureFlags classify(const FailureScores& scores) {
  FailureFlags f;
  f.synchronization_amplification =
      scores.synchronization_amplification > kFailureThreshold;
  f.fabric_contention = scores.fabric_contention > kFailureThreshold;
  f.locality_imbalance = scores.locality_imbalance > kFailureThreshold;
  f.runtime_variance = scores.runtime_variance > kFailureThreshold;
  return f;
}

nlohmann::ordered_json export_timeline(const RunResult& result) {
  nlohmann::ordered_json spans = nlohmann::ordered_json::array();
  for (const IterationRecord& it : result.iterations) {
    const double end = it.start + it.iteration_time;
    for (int r = 0; r < result.ranks; ++r) {
      const double marks[6] = {it.start,         it.compute_end[r],
                               it.entry[r],      it.first_send[r],
                               it.exit[r],       end};
      static const char* kPhases[5] = {"compute", "pacing", "collective_wait",
                                       "collective_transfer", "barrier"};
      for (int p = 0; p < 5; ++p) {
        nlohmann::ordered_json span;
        span["iteration"] = it.index;
        span["rank"] = r;
        span["phase"] = kPhases[p];
        span["begin_s"] = marks[p];
        span["end_s"] = marks[p + 1];
        spans.push_back(std::move(span));
      }
    }
  }
  return spans;
}

}  // namespace fabricsim
