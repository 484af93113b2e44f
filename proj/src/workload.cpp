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

#include "fabricsim/workload.hpp"

#include "fabricsim/rng.hpp"

namespace fabricsim {

double sample_compute_time(const WorkloadConfig& w, uint64_t seed, int rank,
                           int64_t iteration, Locality locality) {
  CounterRng rng(derive_seed({seed,
                              static_cast<uint64_t>(SeedStream::Compute),
                              static_cast<uint64_t>(rank),
                              static_cast<uint64_t>(iteration)}));
  double factor = 1.0;
  switch (w.jitter) {
    case JitterFamily::None:
      break;
    case JitterFamily::LogNormal:
      factor = rng.lognormal(w.jitter_sigma);
      break;
    case JitterFamily::Gamma:
      factor = rng.gamma(w.jitter_shape) / w.jitter_shape;
      break;
  }
  if (w.straggler_prob > 0.0 && rng.uniform() < w.straggler_prob)
    factor *= w.straggler_slowdown;
  if (locality == Locality::Far) factor *= w.locality_penalty;
  return w.base_compute_ms * 1e-3 * factor;
}

double global_batch(const WorkloadConfig& w, int ranks) {
  return static_cast<double>(w.per_rank_batch) * ranks;
}

}  // namespace fabricsim
