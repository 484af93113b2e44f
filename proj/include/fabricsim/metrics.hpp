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

#include <json.hpp>

#include "fabricsim/engine.hpp"

namespace fabricsim {

/// Summary statistics over the non-warmup iterations of one run.
struct RunMetrics {
  int measured_iterations = 0;
  double mean_iter_s = 0.0;
  double throughput_sps = 0.0;  // global batch / mean iteration time
  double cv = 0.0;              // population stddev / mean
  double p95_s = 0.0;           // nearest-rank percentiles
  double p99_s = 0.0;
};

RunMetrics compute_metrics(const RunResult& result);

/// Orthogonal slowdown diagnostics, each in [0, 1]:
/// - synchronization_amplification: time lost to the slowest rank's
///   compute exceeding 1.5x the per-iteration median, as a fraction of
///   iteration time.
/// - fabric_contention: worst link's share of collective-active time
///   spent >=90% allocated with >=2 concurrent flows.
/// - locality_imbalance: Far-vs-Near separation of per-rank busy time
///   (compute + own transfer serialization) in pooled within-class
///   standard deviations, saturating at 4.
/// - runtime_variance: coefficient of variation of per-rank-normalized,
///   non-outlier compute durations, saturating at 0.1.
struct FailureScores {
  double synchronization_amplification = 0.0;
  double fabric_contention = 0.0;
  double locality_imbalance = 0.0;
  double runtime_variance = 0.0;
};

struct FailureFlags {
  bool synchronization_amplification = false;
  bool fabric_contention = false;
  bool locality_imbalance = false;
  bool runtime_variance = false;
};

inline constexpr double kFailureThreshold = 0.25;

FailureScores failure_scores(const RunResult& result);
FailureFlags classify(const FailureScores& scores);

/// Per-rank, per-iteration phase spans. The five phases (compute, pacing,
/// collective_wait, collective_transfer, barrier) tile each iteration
/// exactly: consecutive spans share endpoints and the last span ends at
/// iteration start + iteration_time.
nlohmann::ordered_json export_timeline(const RunResult& result);

}  // namespace fabricsim
