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

#include <cstdint>

#include "fabricsim/topology.hpp"

namespace fabricsim {

enum class JitterFamily : uint8_t { None, LogNormal, Gamma };

struct WorkloadConfig {
  double base_compute_ms = 10.0;
  JitterFamily jitter = JitterFamily::None;
  double jitter_sigma = 0.0;  // lognormal: factor = exp(sigma * N(0,1))
  double jitter_shape = 0.0;  // gamma: factor ~ Gamma(shape, 1/shape)
  double straggler_prob = 0.0;
  double straggler_slowdown = 1.0;
  double locality_penalty = 1.0;  // multiplier for Far-placed ranks
  int per_rank_batch = 32;        // samples processed per rank per iteration
};

/// Seed-stream purposes folded into derived RNG seeds. Values are part of
/// the reproducibility contract and must not be renumbered.
enum class SeedStream : uint64_t {
  Compute = 1,
  BackgroundPhase = 2,
};

/// Compute duration in seconds for (rank, iteration), drawn from a
/// counter-based stream so the value is independent of simulation event
/// order: base * jitter * straggler * locality. Draw order within the
/// stream is jitter first, then the straggler coin.
double sample_compute_time(const WorkloadConfig& w, uint64_t seed, int rank,
                           int64_t iteration, Locality locality);

/// Samples processed fabric-wide per iteration.
double global_batch(const WorkloadConfig& w, int ranks);

}  // namespace fabricsim
