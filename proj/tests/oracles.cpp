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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracles {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<double> max_min_rates(const std::vector<Flow>& flows,
                                  const std::vector<double>& capacity) {
  const size_t nf = flows.size();
  std::vector<double> rate(nf, 0.0);
  std::vector<bool> frozen(nf, false);
  std::vector<double> used(capacity.size(), 0.0);
  double level = 0.0;
  size_t remaining = nf;
  while (remaining > 0) {
    // How much further can the shared level rise before the next
    // constraint binds?
    double step = kInf;
    for (size_t r = 0; r < capacity.size(); ++r) {
      int sharers = 0;
      for (size_t f = 0; f < nf; ++f)
        if (!frozen[f] &&
            std::count(flows[f].resources.begin(), flows[f].resources.end(),
                       static_cast<int>(r)))
          ++sharers;
      if (sharers > 0)
        step = std::min(step, (capacity[r] - used[r]) / sharers);
    }
    for (size_t f = 0; f < nf; ++f)
      if (!frozen[f] && flows[f].cap > 0.0)
        step = std::min(step, flows[f].cap - level);
    if (step == kInf) throw std::logic_error("oracle: unconstrained flow");
    step = std::max(step, 0.0);
    level += step;
    for (size_t r = 0; r < capacity.size(); ++r) {
      int sharers = 0;
      for (size_t f = 0; f < nf; ++f)
        if (!frozen[f] &&
            std::count(flows[f].resources.begin(), flows[f].resources.end(),
                       static_cast<int>(r)))
          ++sharers;
      used[r] += step * sharers;
    }
    // Freeze every flow that hit a binding constraint this round.
    for (size_t f = 0; f < nf; ++f) {
      if (frozen[f]) continue;
      bool bound = false;
      if (flows[f].cap > 0.0 && level >= flows[f].cap * (1.0 - 1e-12))
        bound = true;
      for (int r : flows[f].resources)
        if (capacity[r] - used[r] <= 1e-12 * capacity[r]) bound = true;
      if (bound) {
        frozen[f] = true;
        rate[f] = flows[f].cap > 0.0 ? std::min(level, flows[f].cap) : level;
        --remaining;
      }
    }
  }
  return rate;
}

bool is_max_min(const std::vector<Flow>& flows,
                const std::vector<double>& capacity,
                const std::vector<double>& rates, double tol) {
  const size_t nf = flows.size();
  std::vector<double> used(capacity.size(), 0.0);
  for (size_t f = 0; f < nf; ++f)
    for (int r : flows[f].resources) used[r] += rates[f];
  for (size_t r = 0; r < capacity.size(); ++r)
    if (used[r] > capacity[r] * (1.0 + tol) + tol) return false;
  for (size_t f = 0; f < nf; ++f) {
    if (flows[f].cap > 0.0) {
      if (rates[f] > flows[f].cap * (1.0 + tol)) return false;
      if (rates[f] >= flows[f].cap * (1.0 - tol)) continue;  // cap-bound
    }
    // Must be bottlenecked: a saturated resource where this flow is the
    // (joint) largest sharer.
    bool bottleneck = false;
    for (int r : flows[f].resources) {
      if (used[r] < capacity[r] * (1.0 - tol) - tol) continue;
      double max_other = 0.0;
      for (size_t g = 0; g < nf; ++g)
        if (g != f &&
            std::count(flows[g].resources.begin(), flows[g].resources.end(),
                       r))
          max_other = std::max(max_other, rates[g]);
      if (rates[f] >= max_other - tol * std::max(1.0, max_other)) {
        bottleneck = true;
        break;
      }
    }
    if (!bottleneck) return false;
  }
  return true;
}

std::vector<double> fluid_completions(
    const std::vector<TimedTransfer>& transfers,
    const std::vector<Flow>& persistent, const std::vector<double>& capacity,
    double dt) {
  const size_t nt = transfers.size();
  std::vector<double> remaining(nt), done(nt, -1.0);
  for (size_t i = 0; i < nt; ++i) remaining[i] = transfers[i].bytes;

  double t = 0.0;
  size_t finished = 0;
  int guard = 0;
  while (finished < nt) {
    if (++guard > 10'000'000)
      throw std::logic_error("fluid oracle did not converge");
    // Solve rates for currently active transfers plus persistent flows.
    std::vector<Flow> active;
    std::vector<size_t> idx;
    for (size_t i = 0; i < nt; ++i)
      if (done[i] < 0.0 && transfers[i].start <= t) {
        active.push_back(Flow{transfers[i].resources, 0.0});
        idx.push_back(i);
      }
    for (const Flow& p : persistent) active.push_back(p);
    std::vector<double> rates =
        active.empty() ? std::vector<double>{}
                       : max_min_rates(active, capacity);

    // Advance to the next boundary: grid tick, a start, or a completion.
    double next = std::floor(t / dt + 1.0 + 1e-9) * dt;
    for (size_t i = 0; i < nt; ++i)
      if (done[i] < 0.0 && transfers[i].start > t)
        next = std::min(next, transfers[i].start);
    for (size_t k = 0; k < idx.size(); ++k)
      if (rates[k] > 0.0)
        next = std::min(next, t + remaining[idx[k]] / rates[k]);
    if (!(next > t)) throw std::logic_error("fluid oracle stalled");

    for (size_t k = 0; k < idx.size(); ++k) {
      remaining[idx[k]] -= rates[k] * (next - t);
      if (remaining[idx[k]] <= 1e-9 * transfers[idx[k]].bytes) {
        remaining[idx[k]] = 0.0;
        done[idx[k]] = next;
        ++finished;
      }
    }
    t = next;
  }
  return done;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double population_std(const std::vector<double>& v) {
  double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace oracles
