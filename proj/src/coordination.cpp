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

#include "fabricsim/coordination.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fabricsim {

RollingWindow::RollingWindow(int capacity) : capacity_(capacity) {
  if (capacity <= 0) throw std::logic_error("window capacity must be > 0");
  ring_.resize(capacity);
}

void RollingWindow::push(double v) {
  ring_[head_] = v;
  head_ = (head_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

double RollingWindow::quantile(double q) const {
  if (size_ == 0) throw std::logic_error("quantile of empty window");
  std::vector<double> sorted(ring_.begin(), ring_.begin() + size_);
  std::sort(sorted.begin(), sorted.end());
  int idx = static_cast<int>(std::ceil(q * size_)) - 1;
  idx = std::clamp(idx, 0, size_ - 1);
  return sorted[idx];
}

bool RollingWindow::all_above(double threshold) const {
  for (int i = 0; i < size_; ++i)
    if (ring_[i] <= threshold) return false;
  return true;
}

PacingController::PacingController(const PacingConfig& cfg, int ranks)
    : cfg_(cfg) {
  ranks_.reserve(ranks);
  for (int r = 0; r < ranks; ++r) ranks_.emplace_back(cfg.window_size);
}

double PacingController::decide_delay(int rank,
                                      double compute_duration) const {
  const RankState& s = ranks_[rank];
  if (!cfg_.enabled || !s.engaged || !s.offsets.full()) return 0.0;
  const double target = s.offsets.quantile(cfg_.target_quantile);
  const double delay = target - compute_duration;
  return std::clamp(delay, 0.0, bound(rank));
}

double PacingController::bound(int rank) const {
  const RankState& s = ranks_[rank];
  if (s.iter_times.size() == 0) return 0.0;
  return cfg_.max_delay_fraction * s.iter_times.median();
}

void PacingController::observe(int rank, double iter_time,
                               double compute_duration, double skew_sample) {
  RankState& s = ranks_[rank];
  s.iter_times.push(iter_time);
  s.offsets.push(compute_duration);
  s.skews.push(skew_sample);
  const double threshold = cfg_.skew_threshold * s.iter_times.median();
  if (!s.engaged) {
    // A single spike must not engage: every slot of a full window has to
    // sit above the threshold.
    if (s.skews.full() && s.skews.all_above(threshold)) {
      s.engaged = true;
      s.calm = 0;
    }
  } else if (skew_sample <= threshold) {
    if (++s.calm >= cfg_.cooldown) {
      s.engaged = false;
      s.calm = 0;
    }
  } else {
    s.calm = 0;
  }
}

double local_skew_estimate(double entry, double exit, double idle_cost) {
  return std::max(0.0, (exit - entry) - idle_cost);
}

double entry_spread(const std::vector<double>& entries) {
  if (entries.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(entries.begin(), entries.end());
  return *hi - *lo;
}

}  // namespace fabricsim
