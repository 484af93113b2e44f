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

#include <doctest.h>

#include <vector>

using namespace fabricsim;

namespace {

// Minimal synthetic run: iteration times only, everything else neutral.
RunResult make_result(const std::vector<double>& iter_times, int nodes,
                      int warmup = 0) {
  RunResult r;
  r.scenario.topology.nodes = nodes;
  r.scenario.topology.leaves = 1;
  r.ranks = nodes;
  for (size_t i = 0; i < iter_times.size(); ++i) {
    IterationRecord it;
    it.index = static_cast<int64_t>(i);
    it.warmup = i < static_cast<size_t>(warmup);
    it.start = 0.0;
    it.iteration_time = iter_times[i];
    it.compute_end.assign(nodes, iter_times[i]);
    it.pacing_delay.assign(nodes, 0.0);
    it.pacing_bound.assign(nodes, 0.0);
    it.pacing_engaged.assign(nodes, 0);
    it.entry.assign(nodes, iter_times[i]);
    it.first_send.assign(nodes, iter_times[i]);
    it.exit.assign(nodes, iter_times[i]);
    it.comm_busy.assign(nodes, 0.0);
    r.iterations.push_back(std::move(it));
  }
  return r;
}

// Overrides one iteration's per-rank compute durations (start stays 0).
void set_computes(RunResult& r, size_t iter, const std::vector<double>& d) {
  r.iterations[iter].compute_end = d;
}

}  // namespace

TEST_CASE("cv of {1,3} is exactly one half") {
  RunResult r = make_result({1.0, 3.0}, 4);
  RunMetrics m = compute_metrics(r);
  CHECK(m.measured_iterations == 2);
  CHECK(m.mean_iter_s == 2.0);
  CHECK(m.cv == 0.5);  // population stddev 1 over mean 2
  CHECK(m.throughput_sps == 64.0);  // 4 ranks x 32 samples / 2s
}

TEST_CASE("throughput is the global batch over the mean iteration") {
  RunResult r = make_result({0.125, 0.125, 0.125}, 4);
  RunMetrics m = compute_metrics(r);
  CHECK(m.mean_iter_s == 0.125);
  CHECK(m.throughput_sps == 1024.0);  // 128 samples / 0.125s, exact
  CHECK(m.cv == 0.0);
}

TEST_CASE("percentiles use the nearest-rank convention") {
  std::vector<double> times;
  for (int i = 1; i <= 10; ++i) times.push_back(i / 10.0);
  RunMetrics m = compute_metrics(make_result(times, 2));
  CHECK(m.p95_s == 1.0);  // ceil(0.95*10) = 10th order statistic
  CHECK(m.p99_s == 1.0);

  times.clear();
  for (int i = 1; i <= 20; ++i) times.push_back(i / 10.0);
  m = compute_metrics(make_result(times, 2));
  CHECK(m.p95_s == 1.9);  // ceil(0.95*20) = 19th
  CHECK(m.p99_s == 2.0);  // ceil(0.99*20) = 20th
}

TEST_CASE("warmup iterations are excluded from every statistic") {
  RunResult r = make_result({9.0, 9.0, 0.1, 0.3}, 1, 2);
  RunMetrics m = compute_metrics(r);
  CHECK(m.measured_iterations == 2);
  CHECK(m.mean_iter_s == doctest::Approx(0.2));
  CHECK(m.p99_s == 0.3);
}

TEST_CASE("synchronization amplification: frozen two-iteration example") {
  RunResult r = make_result({4.0, 4.0}, 4);
  set_computes(r, 0, {1.0, 1.0, 1.0, 2.0});  // excess (2 - 1.5)/4 = 0.125
  set_computes(r, 1, {1.0, 1.0, 1.0, 4.0});  // excess (4 - 1.5)/4 = 0.625
  FailureScores s = failure_scores(r);
  CHECK(s.synchronization_amplification == doctest::Approx(0.375));
  CHECK(classify(s).synchronization_amplification);

  RunResult calm = make_result({4.0}, 4);
  set_computes(calm, 0, {1.0, 1.0, 1.0, 1.4});  // under the 1.5x gate
  CHECK(failure_scores(calm).synchronization_amplification == 0.0);
}

TEST_CASE("fabric contention takes the worst link ratio") {
  RunResult r = make_result({1.0}, 4);
  r.links.push_back(LinkRecord{"nic0", LinkTier::Leaf, 1e9, 2.0, 10.0});
  r.links.push_back(LinkRecord{"up0.0", LinkTier::Spine, 1e9, 1.0, 5.0});
  r.links.push_back(LinkRecord{"up0.1", LinkTier::Spine, 1e9, 9.0, 0.0});
  FailureScores s = failure_scores(r);
  CHECK(s.fabric_contention == doctest::Approx(0.2));  // idle link ignored
  CHECK_FALSE(classify(s).fabric_contention);          // 0.2 < 0.25 gate
  r.links[1].shared_saturated_time = 4.0;  // 0.8 of its busy time
  CHECK(failure_scores(r).fabric_contention == doctest::Approx(0.8));
  CHECK(classify(failure_scores(r)).fabric_contention);
}

TEST_CASE("locality imbalance: frozen separation values") {
  // 1 node x 4 GPUs, last two Far. Constant within-class busy time:
  // infinite separation saturates the score at 1.
  RunResult r = make_result({1.0}, 1);
  r.scenario.topology.nodes = 1;
  r.scenario.topology.gpus_per_node = 4;
  r.scenario.topology.far_gpus_per_node = 2;
  r.ranks = 4;
  set_computes(r, 0, {1.0, 1.0, 2.0, 2.0});
  r.iterations[0].comm_busy.assign(4, 0.0);
  FailureScores s = failure_scores(r);
  CHECK(s.locality_imbalance == doctest::Approx(1.0));

  // Means 0.05 apart with pooled within-class stddev 0.05: separation 1,
  // score 1/4 -- exactly at (not over) the 0.25 flag threshold.
  set_computes(r, 0, {1.0, 1.1, 1.05, 1.15});
  s = failure_scores(r);
  CHECK(s.locality_imbalance == doctest::Approx(0.25));
  CHECK_FALSE(classify(s).locality_imbalance);
}

TEST_CASE("locality imbalance is zero without far ranks") {
  RunResult r = make_result({1.0, 2.0}, 4);
  CHECK(failure_scores(r).locality_imbalance == 0.0);
}

TEST_CASE("runtime variance: frozen cv and straggler-spike exclusion") {
  RunResult r = make_result({2.0, 2.0, 2.0, 2.0}, 1);
  r.iterations[0].compute_end = {0.9};
  r.iterations[1].compute_end = {1.0};
  r.iterations[2].compute_end = {1.0};
  r.iterations[3].compute_end = {1.1};
  FailureScores s = failure_scores(r);
  // Normalized by the rank median 1.0: population stddev of
  // {0.9, 1.0, 1.0, 1.1} is sqrt(0.005); score = cv / 0.1.
  CHECK(s.runtime_variance == doctest::Approx(0.7071).epsilon(1e-3));
  CHECK(classify(s).runtime_variance);

  // A lone 9x spike normalizes to 9 > 3x median cutoff and is dropped:
  // the remaining samples are flat, scoring zero.
  r.iterations[0].compute_end = {1.0};
  r.iterations[3].compute_end = {9.0};
  CHECK(failure_scores(r).runtime_variance == 0.0);
}

TEST_CASE("timeline spans tile every iteration exactly") {
  ScenarioConfig s;
  s.seed = 11;
  s.iterations = 3;
  s.warmup_iterations = 1;
  s.topology.nodes = 2;
  s.topology.leaves = 1;
  s.workload.jitter = JitterFamily::LogNormal;
  s.workload.jitter_sigma = 0.2;
  s.collective.message_bytes = 1 << 20;
  RunResult r = run_simulation(s);
  auto spans = export_timeline(r);
  REQUIRE(spans.size() == 3 * 2 * 5);

  static const char* kOrder[5] = {"compute", "pacing", "collective_wait",
                                  "collective_transfer", "barrier"};
  for (size_t i = 0; i < spans.size(); i += 5) {
    int64_t iter = spans[i]["iteration"].get<int64_t>();
    const IterationRecord& it = r.iterations[static_cast<size_t>(iter)];
    CHECK(spans[i]["begin_s"].get<double>() == it.start);
    for (int p = 0; p < 5; ++p) {
      CHECK(spans[i + p]["phase"] == kOrder[p]);
      CHECK(spans[i + p]["rank"] == spans[i]["rank"]);
      double b = spans[i + p]["begin_s"].get<double>();
      double e = spans[i + p]["end_s"].get<double>();
      CHECK(b <= e);
      if (p > 0) CHECK(spans[i + p - 1]["end_s"].get<double>() == b);
    }
    CHECK(spans[i + 4]["end_s"].get<double>() ==
          it.start + it.iteration_time);
  }
}

// ---- Single-cause scenarios classified through real simulations ----

namespace {

ScenarioConfig base_scenario() {
  ScenarioConfig s;
  s.seed = 5;
  s.iterations = 40;
  s.warmup_iterations = 4;
  s.topology.nodes = 4;
  s.topology.leaves = 1;
  s.topology.link_bandwidth_gbps = 100.0;
  s.collective.message_bytes = 65536.0;  // communication stays negligible
  s.workload.base_compute_ms = 10.0;
  return s;
}

}  // namespace

TEST_CASE("classifier: stragglers trip only synchronization amplification") {
  ScenarioConfig s = base_scenario();
  s.workload.straggler_prob = 0.2;
  s.workload.straggler_slowdown = 4.0;
  FailureFlags f = classify(failure_scores(run_simulation(s)));
  CHECK(f.synchronization_amplification);
  CHECK_FALSE(f.fabric_contention);
  CHECK_FALSE(f.locality_imbalance);
  CHECK_FALSE(f.runtime_variance);
}

TEST_CASE("classifier: oversubscription trips only fabric contention") {
  ScenarioConfig s = base_scenario();
  s.topology.leaves = 2;
  s.topology.uplinks_per_leaf = 1;
  s.topology.placement = Placement::RoundRobin;
  s.collective.message_bytes = 8388608.0;  // transfers dominate
  s.workload.base_compute_ms = 1.0;
  FailureFlags f = classify(failure_scores(run_simulation(s)));
  CHECK_FALSE(f.synchronization_amplification);
  CHECK(f.fabric_contention);
  CHECK_FALSE(f.locality_imbalance);
  CHECK_FALSE(f.runtime_variance);
}

TEST_CASE("classifier: far placement trips only locality imbalance") {
  ScenarioConfig s = base_scenario();
  s.topology.nodes = 1;
  s.topology.gpus_per_node = 4;
  s.topology.far_gpus_per_node = 2;
  s.topology.far_path_penalty = 1.2;
  s.workload.locality_penalty = 1.3;  // below the 1.5x sync-amp gate
  s.collective.algorithm = CollectiveAlgorithm::HierarchicalRing;
  FailureFlags f = classify(failure_scores(run_simulation(s)));
  CHECK_FALSE(f.synchronization_amplification);
  CHECK_FALSE(f.fabric_contention);
  CHECK(f.locality_imbalance);
  CHECK_FALSE(f.runtime_variance);
}

TEST_CASE("classifier: broadband jitter trips only runtime variance") {
  ScenarioConfig s = base_scenario();
  s.workload.jitter = JitterFamily::LogNormal;
  s.workload.jitter_sigma = 0.15;
  FailureFlags f = classify(failure_scores(run_simulation(s)));
  CHECK_FALSE(f.synchronization_amplification);
  CHECK_FALSE(f.fabric_contention);
  CHECK_FALSE(f.locality_imbalance);
  CHECK(f.runtime_variance);
}

TEST_CASE("classifier: a calm run raises no flags") {
  FailureFlags f = classify(failure_scores(run_simulation(base_scenario())));
  CHECK_FALSE(f.synchronization_amplification);
  CHECK_FALSE(f.fabric_contention);
  CHECK_FALSE(f.locality_imbalance);
  CHECK_FALSE(f.runtime_variance);
}
