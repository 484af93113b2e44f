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
#include <initializer_list>

namespace fabricsim {

/// splitmix64 finalizer; bijective on uint64.
uint64_t mix64(uint64_t x);

/// Folds a tuple of identifiers into one stream seed. Order-sensitive.
uint64_t derive_seed(std::initializer_list<uint64_t> parts);

/// Small deterministic generator for one logical stream.
///
/// Streams are created per (run seed, rank, iteration, purpose) so every
/// sample is a pure function of those identifiers and never depends on
/// simulation event order. All math is hand-rolled (splitmix64 +
/// Box-Muller + Marsaglia-Tsang) so replays are bit-exact across
/// platforms and standard-library versions.
class CounterRng {
 public:
  explicit CounterRng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64();

  /// Uniform draw in [0, 1), 53 bits of precision.
  double uniform();

  /// Standard normal via Box-Muller (both variates used).
  double normal();

  /// exp(sigma * z), mean exp(sigma^2 / 2).
  double lognormal(double sigma);

  /// Gamma(shape, 1). Marsaglia-Tsang, with the u^(1/shape) boost for
  /// shape < 1.
  double gamma(double shape);

 private:
  uint64_t state_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fabricsim
