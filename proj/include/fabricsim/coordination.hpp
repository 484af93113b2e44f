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

#include <vector>

namespace fabricsim {

struct PacingConfig {
  bool enabled = false;
  int window_size = 16;              // rolling observation window W
  double skew_threshold = 0.1;       // engage when skew > threshold * median
  double max_delay_fraction = 0.25;  // delay bound as fraction of iter time
  double target_quantile = 0.9;      // alignment target within own window
  int cooldown = 8;                  // calm iterations before disengaging
  bool omniscient = false;           // true entry spread vs local residual
};

/// Fixed-capacity rolling sample window with order statistics.
class RollingWindow {
 public:
  explicit RollingWindow(int capacity);
  void push(double v);
  bool full() const { return size_ == capacity_; }
  int size() const { return size_; }
  /// Nearest-rank quantile over the current contents.
  double quantile(double q) const;
  double median() const { return quantile(0.5); }
  bool all_above(double threshold) const;

 private:
  std::vector<double> ring_;
  int capacity_;
  int size_ = 0;
  int head_ = 0;
};

/// Per-rank adaptive pacing: inserts a bounded delay between compute
/// completion and collective entry so entries align near the window's
/// target_quantile compute duration. Purely observational (no RNG, no
/// shared state between ranks under the local estimator); a run with
/// pacing enabled but all delays zero is indistinguishable from one
/// without pacing.
class PacingController {
 public:
  PacingController(const PacingConfig& cfg, int ranks);

  /// Delay to insert after this iteration's compute, in seconds.
  /// Zero while disengaged or before the window fills. Always within
  /// [0, bound(rank)].
  double decide_delay(int rank, double compute_duration) const;

  /// Current delay ceiling: max_delay_fraction times the rank's
  /// window-median iteration time (zero before any observation).
  double bound(int rank) const;

  /// Record the finished iteration (called once per rank per iteration).
  /// Engagement requires every skew sample in a full window above
  /// threshold * median iteration time; cooldown consecutive calm
  /// iterations disengage.
  void observe(int rank, double iter_time, double compute_duration,
               double skew_sample);

  bool engaged(int rank) const { return ranks_[rank].engaged; }

 private:
  struct RankState {
    RollingWindow iter_times;
    RollingWindow offsets;  // undelayed entry offsets = compute durations
    RollingWindow skews;
    bool engaged = false;
    int calm = 0;
    explicit RankState(int w) : iter_times(w), offsets(w), skews(w) {}
  };
  PacingConfig cfg_;
  std::vector<RankState> ranks_;
};

/// Local skew estimate: residual of the observed collective duration over
/// its idle-fabric cost (what the rank can measure without global state).
double local_skew_estimate(double entry, double exit, double idle_cost);

/// Omniscient skew estimate: true collective entry spread.
double entry_spread(const std::vector<double>& entries);

}  // namespace fabricsim
